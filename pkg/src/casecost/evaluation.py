"""Estimated-versus-actual error analysis per CMG and the performance summary table."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, Mapping, Optional, Sequence

from .aggregation import model_stats
from .domain import DEFAULT_BUCKETS, Bucket, CmgStats, ErrorRecord, ModelConfig, ModelId, PerformanceTable, check_buckets

if TYPE_CHECKING:
    from .ingestion import Dataset


def compute_errors(estimated: Mapping[str, CmgStats], actual: Mapping[str, CmgStats]) -> list[ErrorRecord]:
    """Signed estimate-minus-actual differences of every statistic, one record per CMG."""
    if set(estimated) != set(actual):
        diff = sorted(set(estimated) ^ set(actual))
        raise ValueError(f"CMG coverage mismatch: {', '.join(diff)}")
    out = []
    for cmg in sorted(actual):
        e, a = estimated[cmg], actual[cmg]
        if a.total == 0:
            raise ValueError(f"CMG {cmg}: actual total is 0, relative error undefined")
        e_total = e.total - a.total
        out.append(
            ErrorRecord(
                cmg=cmg,
                e_total=e_total,
                e_avg=e.average - a.average,
                e_stdev=e.stdev - a.stdev,
                e_min=e.min - a.min,
                e_max=e.max - a.max,
                rel_total=e_total / a.total,
            )
        )
    return out


def bucket_index(rel: float, buckets: Sequence[Bucket] = DEFAULT_BUCKETS) -> int:
    """Index of the bucket holding ``|rel|`` (in percent): (a, b], first bucket closed at 0."""
    r = abs(rel)
    for i, (a, b) in enumerate(buckets):
        # Compare fractions, not percents: r * 100 can land one ulp past a boundary.
        lower_ok = r >= 0.0 if i == 0 else r > a / 100.0
        if lower_ok and (math.isinf(b) or r <= b / 100.0):
            return i
    raise ValueError(f"relative error {rel!r} falls outside every bucket")


def bucket_counts(errors: Sequence[ErrorRecord], buckets: Sequence[Bucket] = DEFAULT_BUCKETS) -> tuple[int, ...]:
    counts = [0] * len(buckets)
    for e in errors:
        counts[bucket_index(e.rel_total, buckets)] += 1
    return tuple(counts)


def bucketize(errors: Sequence[ErrorRecord], buckets: Sequence[Bucket] = DEFAULT_BUCKETS) -> tuple[float, ...]:
    """Percentage of CMGs per relative-error bucket."""
    buckets = check_buckets(buckets)
    if not errors:
        raise ValueError("no error records to bucketize")
    n = len(errors)
    return tuple(100.0 * c / n for c in bucket_counts(errors, buckets))


def mean_abs_errors(errors: Sequence[ErrorRecord]) -> tuple[float, float, float]:
    """Mean absolute error of the average, minimum and maximum case cost."""
    if not errors:
        raise ValueError("no error records")
    n = len(errors)
    return (
        math.fsum(abs(e.e_avg) for e in errors) / n,
        math.fsum(abs(e.e_min) for e in errors) / n,
        math.fsum(abs(e.e_max) for e in errors) / n,
    )


def performance_table(
    model_id: "ModelId | str", errors: Sequence[ErrorRecord], buckets: Sequence[Bucket] = DEFAULT_BUCKETS
) -> PerformanceTable:
    buckets = check_buckets(buckets)
    counts = bucket_counts(errors, buckets)
    n = len(errors)
    e_avg, e_min, e_max = mean_abs_errors(errors)
    return PerformanceTable(
        model_id=ModelId.parse(model_id).label,
        buckets=buckets,
        counts=counts,
        p_ab=tuple(100.0 * c / n for c in counts),
        mean_abs_e_avg=e_avg,
        mean_abs_e_min=e_min,
        mean_abs_e_max=e_max,
        n_groups=n,
        mean_abs_e_stdev=math.fsum(abs(e.e_stdev) for e in errors) / n,
        mean_abs_rel_total=math.fsum(abs(e.rel_total) for e in errors) / n,
    )


def evaluate_model(
    model_id: "ModelId | str",
    dataset: "Dataset",
    config: Optional[ModelConfig] = None,
    population: bool = False,
) -> tuple[dict[str, CmgStats], list[ErrorRecord], PerformanceTable]:
    """Run estimate -> aggregate -> errors -> table for one model against the dataset benchmark."""
    model_id = ModelId.parse(model_id)
    config = config or ModelConfig(model_id)
    stats = model_stats(model_id, dataset, config, population)
    errors = compute_errors(stats, dataset.benchmark)
    return stats, errors, performance_table(model_id, errors, config.buckets)
