"""CSV / JSON writers for estimates, per-CMG statistics and performance tables."""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

from ._format import money, percent
from .domain import CmgStats, PerformanceTable, bucket_label
from .models import CaseEstimate

PathLike = Union[str, os.PathLike]

MEASURE_ROWS = ("E_avg", "E_min", "E_max")
STDEV_ROW = "E_stdev"


def _write(path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def write_estimates(estimates: Mapping[str, Sequence[CaseEstimate]], path: PathLike, fmt: str = "csv") -> Path:
    """``estimates`` maps a model label to its per-case estimates."""
    path = Path(path)
    rows = [(e.case_id, e.cmg, model, money(e.cce)) for model, ests in estimates.items() for e in ests]
    if fmt == "json":
        _write_json(path, [dict(zip(("case_id", "cmg", "model", "cce"), r)) for r in rows])
    else:
        _write(path, ("case_id", "cmg", "model", "cce"), rows)
    return path


CMG_STATS_COLUMNS = ("cmg", "model", "case_count", "total", "average", "stdev", "min", "max")


def cmg_stats_rows(stats: Mapping[str, Mapping[str, CmgStats]]) -> list[tuple[str, ...]]:
    rows = []
    for model, by_cmg in stats.items():
        for s in by_cmg.values():
            rows.append((s.cmg, model, str(s.case_count), money(s.total), money(s.average),
                         money(s.stdev), money(s.min), money(s.max)))
    return rows


def write_cmg_stats(stats: Mapping[str, Mapping[str, CmgStats]], path: PathLike, fmt: str = "csv") -> Path:
    path = Path(path)
    rows = cmg_stats_rows(stats)
    if fmt == "json":
        _write_json(path, [dict(zip(CMG_STATS_COLUMNS, r)) for r in rows])
    else:
        _write(path, CMG_STATS_COLUMNS, rows)
    return path


def performance_rows(tables: Sequence[PerformanceTable], include_stdev: bool = False) -> list[list[str]]:
    """Table layout: one column per model; mean-error rows, then one row per bucket."""
    if not tables:
        raise ValueError("no performance tables")
    buckets = tables[0].buckets
    if any(t.buckets != buckets for t in tables):
        raise ValueError("performance tables use different buckets")
    rows = [
        ["E_avg", *(money(t.mean_abs_e_avg) for t in tables)],
        ["E_min", *(money(t.mean_abs_e_min) for t in tables)],
        ["E_max", *(money(t.mean_abs_e_max) for t in tables)],
    ]
    if include_stdev:
        rows.append([STDEV_ROW, *(money(t.mean_abs_e_stdev) for t in tables)])
    for i, b in enumerate(buckets):
        rows.append([f"P {bucket_label(b)}", *(percent(t.p_ab[i]) for t in tables)])
    return rows


def write_performance(
    tables: Sequence[PerformanceTable], path: PathLike, fmt: str = "csv", include_stdev: bool = False
) -> Path:
    path = Path(path)
    header = ["measure", *(t.model_id for t in tables)]
    rows = performance_rows(tables, include_stdev)
    if fmt == "json":
        _write_json(
            path,
            {
                "models": header[1:],
                "n_groups": tables[0].n_groups,
                "rows": [{"measure": r[0], "values": dict(zip(header[1:], r[1:]))} for r in rows],
            },
        )
    else:
        _write(path, header, rows)
    return path


def format_table(tables: Sequence[PerformanceTable], include_stdev: bool = False) -> str:
    """Fixed-width text rendering for terminals."""
    header = ["measure", *(t.model_id for t in tables)]
    rows = [header, *performance_rows(tables, include_stdev)]
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    return "\n".join(
        "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
        for r in rows
    )
