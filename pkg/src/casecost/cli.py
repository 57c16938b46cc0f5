"""Command-line front end: ``casecost generate|estimate|report|optimize``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .aggregation import aggregate, model_stats
from .domain import CaseCostWarning, ModelConfig, ModelId
from .evaluation import compute_errors, performance_table
from .ingestion import CostProcess, DataError, SyntheticSpec, generate_synthetic, load_dir, write_dataset, write_ground_truth
from .models import benchmark_total, estimate
from .optimizer import CoefRange, GridSpec, grid_search, write_trace
from .reports import format_table, write_cmg_stats, write_estimates, write_performance

log = logging.getLogger("casecost")


class UsageError(Exception):
    pass


def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--format", choices=("csv", "json"), default=d("csv"), help="report file format")
    parser.add_argument("--threads", type=int, default=d(None), help="worker bound for grid search")
    parser.add_argument("--quiet", action="store_true", default=d(False), help="suppress warnings")


def _add_k(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k1", type=float, default=1.3, help="acute-care multiplier (default 1.3)")
    parser.add_argument("--k2", type=float, default=0.5, help="ALC multiplier (default 0.5)")
    parser.add_argument("--k3", type=float, default=2.85, help="special-care multiplier (default 2.85)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="casecost", description="Patient-level hospital case-cost estimation.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _common(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset with ground truth")
    _common(g, suppress=True)
    g.add_argument("--cmgs", type=int, default=163)
    g.add_argument("--cases-min", type=int, default=1)
    g.add_argument("--cases-max", type=int, default=94)
    g.add_argument("--process", choices=[c.value for c in CostProcess], default="mixed")
    g.add_argument("--degenerate-pac", type=float, default=0.025)
    g.add_argument("--degenerate-both", type=float, default=0.043)
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--cpwc", type=float, default=6000.0)
    g.add_argument("--cpd", type=float, default=1600.0)
    g.add_argument("--stay-k", default="1.3,0.5,2.85", help="k1,k2,k3 for the stay-type process")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", required=True, type=Path)

    e = sub.add_parser("estimate", help="per-case estimates for one model")
    _common(e, suppress=True)
    e.add_argument("--model", required=True)
    _add_k(e)
    e.add_argument("data", type=Path)
    e.add_argument("-o", "--output", type=Path, help="output directory (default: data dir)")

    r = sub.add_parser("report", help="performance table across models")
    _common(r, suppress=True)
    r.add_argument("--models", default="m1,m2,m3,m4,m5")
    r.add_argument("--hybrid", action="store_true", help="add the M3+M5 hybrid column")
    r.add_argument("--stdev-row", action="store_true", help="add mean |stdev error| row")
    r.add_argument("--population-stdev", action="store_true", help="divide by n instead of n-1")
    _add_k(r)
    r.add_argument("data", type=Path)
    r.add_argument("-o", "--output", type=Path)

    o = sub.add_parser("optimize", help="grid search for k1, k2, k3")
    _common(o, suppress=True)
    o.add_argument("--model", default="m5", choices=("m5", "hybrid"))
    o.add_argument("--k1", default="1.0:2.0:0.1", help="lo:hi:step or a single value")
    o.add_argument("--k2", default="0.3:0.7:0.1")
    o.add_argument("--k3", default="2.0:3.0:0.05")
    o.add_argument("--max-points", type=int, default=10**6)
    o.add_argument("--trace", action="store_true", help="write trace.csv with every grid point")
    o.add_argument("data", type=Path)
    o.add_argument("-o", "--output", type=Path)
    return p


def _out_dir(args) -> Path:
    d = args.output if args.output is not None else args.data
    d.mkdir(parents=True, exist_ok=True)
    return d


def _sidecar(directory: Path, argv: Sequence[str], **extra) -> None:
    meta = {
        "tool": "casecost",
        "version": __version__,
        "argv": list(argv),
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        **extra,
    }
    with open(directory / "run.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def _config(args, model: ModelId) -> ModelConfig:
    try:
        return ModelConfig(model, args.k1, args.k2, args.k3)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load(args):
    ds = load_dir(args.data)
    for v in ds.warnings:
        log.warning("%s", v)
    return ds


def cmd_generate(args, argv) -> int:
    try:
        k = tuple(float(x) for x in args.stay_k.split(","))
        if len(k) != 3:
            raise ValueError
    except ValueError:
        raise UsageError("--stay-k expects three comma-separated numbers") from None
    try:
        spec = SyntheticSpec(
            n_cmgs=args.cmgs,
            cases_per_cmg_range=(args.cases_min, args.cases_max),
            cost_process=CostProcess(args.process),
            degenerate_pac_fraction=args.degenerate_pac,
            degenerate_both_fraction=args.degenerate_both,
            seed=args.seed,
            cpwc=args.cpwc,
            cpd_total=args.cpd,
            stay_k=k,
            noise=args.noise,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    dataset, truth = generate_synthetic(spec)
    out = args.output
    write_dataset(dataset, out)
    write_ground_truth(truth, out / "ground_truth.csv")
    _sidecar(out, argv, seed=args.seed)
    print(f"wrote {len(dataset.cases)} cases in {len(dataset.benchmark)} CMGs to {out}")
    return 0


def cmd_estimate(args, argv) -> int:
    try:
        model = ModelId.parse(args.model)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if model is ModelId.HYBRID:
        raise UsageError("hybrid combines per-CMG statistics; use `casecost report --hybrid`")
    config = _config(args, model)
    ds = _load(args)
    ests = estimate(model, ds, config)
    out = _out_dir(args)
    path = write_estimates({model.label: ests}, out / f"estimates.{args.format}", args.format)
    _sidecar(out, argv)
    total = sum(e.cce for e in ests)
    print(f"{model.label}: {len(ests)} estimates, sum {total:.2f}, "
          f"benchmark sum {benchmark_total(ds.benchmark):.2f} -> {path}")
    return 0


def cmd_report(args, argv) -> int:
    names = [m for m in (s.strip() for s in args.models.split(",")) if m]
    if not names:
        raise UsageError("--models needs at least one model")
    try:
        models = [ModelId.parse(m) for m in names]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.hybrid and ModelId.HYBRID not in models:
        models.append(ModelId.HYBRID)
    ds = _load(args)
    tables, stats = [], {}
    for m in models:
        config = _config(args, m)
        s = model_stats(m, ds, config, args.population_stdev)
        errs = compute_errors(s, ds.benchmark)
        tables.append(performance_table(m, errs, config.buckets))
        stats[m.label] = s
    out = _out_dir(args)
    write_performance(tables, out / f"performance.{args.format}", args.format, args.stdev_row)
    write_cmg_stats(stats, out / f"cmg_stats.{args.format}", args.format)
    _sidecar(out, argv)
    print(format_table(tables, args.stdev_row))
    return 0


def cmd_optimize(args, argv) -> int:
    try:
        grid = GridSpec(CoefRange.parse(args.k1), CoefRange.parse(args.k2), CoefRange.parse(args.k3),
                        max_points=args.max_points)
        if grid.size > grid.max_points:
            raise ValueError(f"grid has {grid.size} points, over the cap of {grid.max_points}")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ds = _load(args)
    res = grid_search(ds, grid, args.model, threads=args.threads, keep_trace=args.trace)
    out = _out_dir(args)
    if args.trace:
        write_trace(res.trace, out / "trace.csv")
    k1, k2, k3 = res.k
    c = res.criteria
    payload = {
        "model": ModelId.parse(args.model).label,
        "k1": k1, "k2": k2, "k3": k3,
        "large_err_pct": c.large_err_pct,
        "very_large_err_pct": c.very_large_err_pct,
        "small_err_pct": c.small_err_pct,
        "n_points": res.n_points,
    }
    if args.format == "json":
        with open(out / "optimize.json", "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        with open(out / "optimize.csv", "w", encoding="utf-8") as fh:
            fh.write(",".join(payload) + "\n" + ",".join(str(v) for v in payload.values()) + "\n")
    _sidecar(out, argv)
    print(f"best k1={k1:g} k2={k2:g} k3={k3:g} over {res.n_points} points: "
          f"large {c.large_err_pct:.2f}%, very large {c.very_large_err_pct:.2f}%, "
          f"small {c.small_err_pct:.2f}%")
    return 0


COMMANDS = {"generate": cmd_generate, "estimate": cmd_estimate, "report": cmd_report, "optimize": cmd_optimize}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr, force=True)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", CaseCostWarning)
            rc = COMMANDS[args.command](args, argv)
        for w in caught:
            log.warning("%s", w.message)
        return rc
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"casecost: error: {exc}", file=sys.stderr)
        return 2
    except (DataError, ValueError, KeyError, OSError) as exc:
        print(f"casecost: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
