"""Exhaustive grid search over the stay-type coefficients (k1, k2, k3).

Grid points are ranked lexicographically by three bucket-share criteria,
in this order:

1. share of CMGs with relative total error above 30% (lower is better),
2. share above 50% (lower is better),
3. share at or below 10% (higher is better).

Points whose bucket shares are identical are separated by the mean absolute
relative total error (rounded to 1e-9), and remaining ties go to the
numerically smallest (k1, k2, k3). Without the error-size tie-break, grids
near the optimum are often flat: every nearby triple puts all CMGs under
10% error.

Because the per-CMG raw totals of Model 5 are linear in the coefficients,
each grid point is scored from per-CMG sums of the three stay components
rather than by re-running the per-case model. The winning point is then
re-evaluated through the full pipeline to produce its performance table.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .domain import DEFAULT_BUCKETS, ModelConfig, ModelId, PerformanceTable
from .evaluation import evaluate_model
from .ingestion import Dataset

DEFAULT_MAX_POINTS = 10**6
_CHUNK = 512


@dataclass(frozen=True)
class CoefRange:
    lo: float
    hi: float
    step: float

    def __post_init__(self) -> None:
        if not (self.lo > 0 and self.hi >= self.lo and self.step > 0):
            raise ValueError(f"invalid range lo={self.lo} hi={self.hi} step={self.step}")

    @classmethod
    def parse(cls, text: str) -> "CoefRange":
        """Parse ``lo:hi:step`` or a single value."""
        parts = text.split(":")
        try:
            nums = [float(p) for p in parts]
        except ValueError:
            raise ValueError(f"bad range {text!r}; expected lo:hi:step or a number") from None
        if len(nums) == 1:
            return cls(nums[0], nums[0], 1.0)
        if len(nums) == 3:
            return cls(*nums)
        raise ValueError(f"bad range {text!r}; expected lo:hi:step or a number")

    def __len__(self) -> int:
        return int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1

    def values(self) -> list[float]:
        return [round(self.lo + i * self.step, 10) for i in range(len(self))]


@dataclass(frozen=True)
class GridSpec:
    k1: CoefRange
    k2: CoefRange
    k3: CoefRange
    max_points: int = DEFAULT_MAX_POINTS

    @property
    def size(self) -> int:
        return len(self.k1) * len(self.k2) * len(self.k3)

    def axes(self) -> tuple[list[float], list[float], list[float]]:
        return self.k1.values(), self.k2.values(), self.k3.values()


@dataclass(frozen=True)
class ExplicitGrid:
    """Grid given by explicit coefficient lists rather than ranges."""

    k1: tuple[float, ...]
    k2: tuple[float, ...]
    k3: tuple[float, ...]
    max_points: int = DEFAULT_MAX_POINTS

    def __post_init__(self) -> None:
        for axis in (self.k1, self.k2, self.k3):
            if any(not v > 0 for v in axis):
                raise ValueError("grid coefficients must be positive")

    @property
    def size(self) -> int:
        return len(self.k1) * len(self.k2) * len(self.k3)

    def axes(self) -> tuple[list[float], list[float], list[float]]:
        return list(self.k1), list(self.k2), list(self.k3)


Grid = Union[GridSpec, ExplicitGrid]


# Decimal places kept from the mean relative error before it breaks ties.
TIE_DECIMALS = 9


@dataclass(frozen=True)
class CriterionVector:
    large_err_pct: float
    very_large_err_pct: float
    small_err_pct: float
    # Tie-break only; not compared by lex_better.
    mean_abs_rel: float = 0.0


def _criterion_indices(buckets) -> tuple[list[int], list[int], list[int]]:
    if tuple(buckets) != DEFAULT_BUCKETS:
        raise ValueError("selection criteria are defined only for the default error buckets")
    return [5, 6], [6], [0, 1]


def criterion_vector(table: Union[PerformanceTable, Sequence[float]]) -> CriterionVector:
    """Reduce a performance table (or a bare bucket-percentage vector) to the three criteria.

    For a table the shares are computed from integer bucket counts, so two
    tables with equal counts always produce identical criteria.
    """
    if isinstance(table, PerformanceTable):
        large, very, small = _criterion_indices(table.buckets)
        n, c = table.n_groups, table.counts
        share = lambda idx: 100.0 * sum(c[i] for i in idx) / n  # noqa: E731
        return CriterionVector(share(large), share(very), share(small), table.mean_abs_rel_total)
    else:
        p = list(table)
        if len(p) != len(DEFAULT_BUCKETS):
            raise ValueError(f"expected {len(DEFAULT_BUCKETS)} bucket percentages, got {len(p)}")
        large, very, small = _criterion_indices(DEFAULT_BUCKETS)
        share = lambda idx: math.fsum(p[i] for i in idx)  # noqa: E731
    return CriterionVector(share(large), share(very), share(small))


def lex_better(a: CriterionVector, b: CriterionVector, tolerance: float = 0.0) -> int:
    """Compare two criterion vectors: -1 if ``a`` is better, 1 if ``b`` is, 0 on a tie."""
    pairs = (
        (a.large_err_pct, b.large_err_pct),
        (a.very_large_err_pct, b.very_large_err_pct),
        (-a.small_err_pct, -b.small_err_pct),
    )
    for x, y in pairs:
        if abs(x - y) <= tolerance:
            continue
        return -1 if x < y else 1
    return 0


@dataclass(frozen=True)
class TracePoint:
    k1: float
    k2: float
    k3: float
    criteria: CriterionVector


@dataclass(frozen=True)
class SearchResult:
    k: tuple[float, float, float]
    table: PerformanceTable
    criteria: CriterionVector
    n_points: int
    trace: tuple[TracePoint, ...] = field(default=(), repr=False)


class _Scorer:
    """Scores coefficient triples from per-CMG sums of the three stay components."""

    def __init__(self, dataset: Dataset, model_id: ModelId):
        arr = dataset.arrays
        ng = len(arr.cmgs)
        sc_days = arr.sc_hours / 24.0
        comps = np.stack([np.maximum(arr.los_acute - sc_days, 0.0), arr.los_alc, sc_days], axis=1)
        self.units = np.zeros((ng, 3))
        np.add.at(self.units, arr.group, comps)
        self.cpd = dataset.params.cpd_total
        bench = [dataset.benchmark[c] for c in arr.cmgs]
        self.actual = np.array([s.total for s in bench])
        self.target = math.fsum(s.average * s.case_count for s in bench)
        self.n = ng
        self.fixed: Optional[np.ndarray] = None
        if model_id is ModelId.HYBRID:
            # Totals come from M3 and do not depend on the coefficients.
            stats, _, _ = evaluate_model(ModelId.M3, dataset)
            self.fixed = np.array([stats[c].total for c in arr.cmgs])
        lo = np.array([a for a, _ in DEFAULT_BUCKETS]) / 100.0
        hi = np.array([b for _, b in DEFAULT_BUCKETS]) / 100.0
        self.lo, self.hi = lo, hi

    def counts(self, ks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Bucket counts, shape (len(ks), n_buckets), and mean |relative error| per point."""
        if self.fixed is not None:
            totals = np.repeat(self.fixed[:, None], len(ks), axis=1)
        else:
            raw = (self.units @ ks.T) * self.cpd  # (n_cmg, n_points)
            denom = raw.sum(axis=0)
            if np.any(denom <= 0):
                raise ValueError("raw stay units sum to zero; cannot normalize")
            totals = raw * (self.target / denom)
        rel = np.abs((totals - self.actual[:, None]) / self.actual[:, None])
        out = np.empty((len(ks), len(self.lo)), dtype=np.int64)
        for j, (a, b) in enumerate(zip(self.lo, self.hi)):
            inside = rel <= b if np.isfinite(b) else np.ones_like(rel, dtype=bool)
            if j:
                inside &= rel > a
            out[:, j] = inside.sum(axis=0)
        return out, rel.mean(axis=0)


def _criteria_from_counts(counts: np.ndarray, mean_rel: np.ndarray, n: int) -> list[CriterionVector]:
    return [
        CriterionVector(100.0 * int(c[5] + c[6]) / n, 100.0 * int(c[6]) / n,
                        100.0 * int(c[0] + c[1]) / n, float(m))
        for c, m in zip(counts, mean_rel)
    ]


def search_key(cv: CriterionVector, k: tuple[float, float, float]):
    """Total order used by :func:`grid_search`; smaller is better."""
    return (cv.large_err_pct, cv.very_large_err_pct, -cv.small_err_pct, round(cv.mean_abs_rel, TIE_DECIMALS), k)


def grid_search(
    dataset: Dataset,
    grid: Grid,
    model_id: "ModelId | str" = ModelId.M5,
    threads: Optional[int] = None,
    keep_trace: bool = False,
) -> SearchResult:
    """Return the lexicographically best coefficient triple on ``grid``.

    Raises:
        ValueError: empty grid, grid over its point cap, or a model other
            than M5 / HYBRID.
    """
    model_id = ModelId.parse(model_id)
    if model_id not in (ModelId.M5, ModelId.HYBRID):
        raise ValueError("grid search applies to M5 or HYBRID only")
    if grid.size == 0:
        raise ValueError("empty grid")
    if grid.size > grid.max_points:
        raise ValueError(f"grid has {grid.size} points, over the cap of {grid.max_points}")

    a1, a2, a3 = grid.axes()
    ks = np.array(np.meshgrid(a1, a2, a3, indexing="ij")).reshape(3, -1).T
    scorer = _Scorer(dataset, model_id)
    chunks = [ks[i : i + _CHUNK] for i in range(0, len(ks), _CHUNK)]
    workers = threads or os.cpu_count() or 1
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scored = list(pool.map(scorer.counts, chunks))
    else:
        scored = [scorer.counts(c) for c in chunks]
    criteria = _criteria_from_counts(
        np.concatenate([c for c, _ in scored]), np.concatenate([m for _, m in scored]), scorer.n
    )

    points = [tuple(float(v) for v in k) for k in ks]
    best = min(range(len(points)), key=lambda i: search_key(criteria[i], points[i]))
    k1, k2, k3 = points[best]
    _, _, table = evaluate_model(model_id, dataset, ModelConfig(model_id, k1, k2, k3))
    trace = ()
    if keep_trace:
        trace = tuple(TracePoint(*p, cv) for p, cv in zip(points, criteria))
    return SearchResult((k1, k2, k3), table, criterion_vector(table), len(points), trace)


def write_trace(trace: Sequence[TracePoint], path: Union[str, os.PathLike]) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k1", "k2", "k3", "large", "very_large", "small", "mean_abs_rel"])
        for t in trace:
            c = t.criteria
            w.writerow([repr(t.k1), repr(t.k2), repr(t.k3), f"{c.large_err_pct:.6f}",
                        f"{c.very_large_err_pct:.6f}", f"{c.small_err_pct:.6f}", f"{c.mean_abs_rel:.{TIE_DECIMALS}f}"])
