"""Per-CMG summary statistics and the hybrid (M3 totals, M5 extremes) combination."""

from __future__ import annotations

import math
import warnings
from typing import TYPE_CHECKING, Iterable, Mapping, Optional, Sequence

from .domain import CaseCostWarning, CmgStats, ModelConfig, ModelId

if TYPE_CHECKING:
    from .ingestion import Dataset
    from .models import CaseEstimate


def summarize(cmg: str, values: Sequence[float], population: bool = False) -> CmgStats:
    """Total, mean, standard deviation, min and max of one group's case costs.

    The standard deviation divides by n - 1 unless ``population`` is set; a
    single-case group has standard deviation 0 either way.
    """
    n = len(values)
    if n == 0:
        raise ValueError(f"CMG {cmg}: no values to summarize")
    total = math.fsum(values)
    lo, hi = min(values), max(values)
    # Round-off can push the quotient a hair outside [lo, hi].
    avg = min(max(total / n, lo), hi)
    if n == 1 or lo == hi:
        sd = 0.0
    else:
        ss = math.fsum((v - avg) ** 2 for v in values)
        sd = math.sqrt(ss / (n if population else n - 1))
    return CmgStats(cmg=cmg, case_count=n, total=total, average=avg, stdev=sd, min=lo, max=hi)


def aggregate(estimates: Iterable["CaseEstimate"], population: bool = False) -> dict[str, CmgStats]:
    """Collapse per-case estimates into per-CMG statistics, keyed and sorted by CMG code."""
    groups: dict[str, list[float]] = {}
    for e in estimates:
        groups.setdefault(e.cmg, []).append(e.cce)
    if not groups:
        raise ValueError("no estimates to aggregate")
    return {cmg: summarize(cmg, sorted(groups[cmg]), population) for cmg in sorted(groups)}


def hybrid_combine(
    primary_stats: Mapping[str, CmgStats], minmax_stats: Mapping[str, CmgStats]
) -> dict[str, CmgStats]:
    """Take total, average, stdev and count from ``primary_stats`` and min/max from ``minmax_stats``.

    If the borrowed extremes do not bracket the primary average they are
    widened to include it. The primary standard deviation is kept as is; a
    warning flags groups where it exceeds what the borrowed range allows.
    """
    if set(primary_stats) != set(minmax_stats):
        diff = sorted(set(primary_stats) ^ set(minmax_stats))
        raise ValueError(f"CMG coverage mismatch between models: {', '.join(diff)}")

    out: dict[str, CmgStats] = {}
    repaired: list[str] = []
    sd_flagged: list[str] = []
    for cmg in sorted(primary_stats):
        p, m = primary_stats[cmg], minmax_stats[cmg]
        if p.case_count != m.case_count:
            raise ValueError(f"CMG {cmg}: case counts differ ({p.case_count} vs {m.case_count})")
        n = p.case_count
        lo, hi = m.min, m.max
        if n == 1:
            # A single case has one cost; min and max must equal the average.
            lo = hi = p.average
        elif lo > p.average or hi < p.average:
            lo, hi = min(lo, p.average), max(hi, p.average)
            repaired.append(cmg)
        if n > 1 and p.stdev > 0.5 * (hi - lo) * math.sqrt(n / (n - 1)) * (1 + 1e-12):
            sd_flagged.append(cmg)
        out[cmg] = CmgStats(cmg, n, p.total, p.average, p.stdev, lo, hi)

    if repaired:
        warnings.warn(
            f"hybrid: widened min/max to include the average for CMG(s) {', '.join(repaired)}",
            CaseCostWarning,
            stacklevel=2,
        )
    if sd_flagged:
        warnings.warn(
            f"hybrid: stdev exceeds the bound implied by min/max for CMG(s) {', '.join(sd_flagged)}",
            CaseCostWarning,
            stacklevel=2,
        )
    return out


def model_stats(
    model_id: "ModelId | str",
    dataset: "Dataset",
    config: Optional[ModelConfig] = None,
    population: bool = False,
) -> dict[str, CmgStats]:
    """Estimated per-CMG statistics for one model, including HYBRID."""
    from .models import estimate

    model_id = ModelId.parse(model_id)
    config = config or ModelConfig(model_id)
    if model_id is ModelId.HYBRID:
        m3 = aggregate(estimate(ModelId.M3, dataset, config), population)
        m5 = aggregate(estimate(ModelId.M5, dataset, config), population)
        return hybrid_combine(m3, m5)
    return aggregate(estimate(model_id, dataset, config), population)
