"""Per-case cost estimates under the five financial models.

Models 1-3 price a case by its relative intensity weight times the cost per
weighted case (CPWC); Models 4-5 by its stay length times the cost per diem
(CpD). Models 3-5 are scaled so that the estimates add up to the benchmark
total of the dataset:

    M1  cce = pac_riw * cpwc
    M2  cce = pac_mod * cpwc
    M3  cce = pac_mod * cpwc * F
    M4  cce = los_total * cpd * F
    M5  cce = (max(0, acute - sc/24) * k1 + alc * k2 + sc/24 * k3) * cpd * F

where F = sum(benchmark average * case_count) / sum(raw estimates) and
``pac_mod`` is the PAC weight repaired per CMG (see :func:`compute_pac_mod`).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping, Optional, Sequence, Union

from .domain import CaseCostWarning, CaseRecord, CmgStats, HospitalCostParams, ModelConfig, ModelId

if TYPE_CHECKING:
    from .ingestion import Dataset

WeightMap = dict[str, float]


@dataclass(frozen=True)
class CaseEstimate:
    case_id: str
    cmg: str
    cce: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.cce) and self.cce >= 0):
            raise ValueError(f"case {self.case_id}: estimate must be finite and >= 0, got {self.cce}")


def _group(cases: Union[Mapping[str, Sequence[CaseRecord]], Iterable[CaseRecord]]) -> dict[str, list[CaseRecord]]:
    if isinstance(cases, Mapping):
        return {k: list(v) for k, v in cases.items()}
    out: dict[str, list[CaseRecord]] = {}
    for c in cases:
        out.setdefault(c.cmg, []).append(c)
    return out


def compute_pac_mod(cases: Union[Mapping[str, Sequence[CaseRecord]], Iterable[CaseRecord]]) -> WeightMap:
    """Repair degenerate PAC weights CMG by CMG.

    Where every case in a CMG carries the same PAC weight but the RIW values
    differ, the PAC weights are replaced by the RIW values rescaled so the
    CMG's weight sum is unchanged. Other CMGs keep their PAC weights. Ties are
    detected by exact equality.

    Raises:
        ValueError: a CMG needing redistribution has RIW values summing to 0.
    """
    out: WeightMap = {}
    for cmg, group in _group(cases).items():
        pac = [c.pac_riw for c in group]
        riw = [c.riw for c in group]
        if min(pac) == max(pac) and min(riw) != max(riw):
            riw_sum = math.fsum(riw)
            if riw_sum == 0:
                raise ValueError(f"CMG {cmg}: RIW weights sum to 0, cannot redistribute PAC weight")
            scale = math.fsum(pac) / riw_sum
            for c in group:
                out[c.case_id] = c.riw * scale
        else:
            for c in group:
                out[c.case_id] = c.pac_riw
    return out


def estimate_m1(case: CaseRecord, params: HospitalCostParams) -> CaseEstimate:
    return CaseEstimate(case.case_id, case.cmg, case.pac_riw * params.cpwc)


def estimate_m2(case: CaseRecord, weights: Mapping[str, float], params: HospitalCostParams) -> CaseEstimate:
    try:
        w = weights[case.case_id]
    except KeyError:
        raise KeyError(f"case {case.case_id} has no repaired weight") from None
    return CaseEstimate(case.case_id, case.cmg, w * params.cpwc)


def benchmark_total(benchmark: Mapping[str, CmgStats]) -> float:
    """Sum over CMGs of average x case count."""
    return math.fsum(s.average * s.case_count for s in benchmark.values())


def normalization_factor(raw_estimates: Sequence[CaseEstimate], benchmark: Mapping[str, CmgStats]) -> float:
    """Ratio that scales raw estimates so their sum equals the benchmark total."""
    covered = {e.cmg for e in raw_estimates}
    if covered != set(benchmark):
        diff = sorted(covered ^ set(benchmark))
        raise ValueError(f"raw estimates and benchmark cover different CMGs: {', '.join(diff)}")
    denom = math.fsum(e.cce for e in raw_estimates)
    if not denom > 0:
        raise ValueError("raw estimates sum to zero; cannot normalize to the benchmark total")
    return benchmark_total(benchmark) / denom


def _normalized(raw: list[CaseEstimate], benchmark: Mapping[str, CmgStats]) -> list[CaseEstimate]:
    f = normalization_factor(raw, benchmark)
    return [CaseEstimate(e.case_id, e.cmg, e.cce * f) for e in raw]


def estimate_m3(
    cases: Sequence[CaseRecord],
    weights: Mapping[str, float],
    params: HospitalCostParams,
    benchmark: Mapping[str, CmgStats],
) -> list[CaseEstimate]:
    return _normalized([estimate_m2(c, weights, params) for c in cases], benchmark)


def _warn_zero_stay(raw: list[CaseEstimate], model: str) -> None:
    zero = [e.case_id for e in raw if e.cce == 0]
    if zero:
        shown = ", ".join(zero[:10]) + (" ..." if len(zero) > 10 else "")
        warnings.warn(
            f"{model}: {len(zero)} case(s) with zero stay get a zero estimate: {shown}",
            CaseCostWarning,
            stacklevel=3,
        )


def estimate_m4(
    cases: Sequence[CaseRecord], params: HospitalCostParams, benchmark: Mapping[str, CmgStats]
) -> list[CaseEstimate]:
    raw = [CaseEstimate(c.case_id, c.cmg, c.los_total * params.cpd_total) for c in cases]
    _warn_zero_stay(raw, "M4")
    return _normalized(raw, benchmark)


def stay_units(case: CaseRecord, k1: float, k2: float, k3: float) -> float:
    """Cost-weighted days: acute (less special care, floored at 0), ALC and special care."""
    sc_days = case.sc_hours / 24.0
    return max(case.los_acute - sc_days, 0.0) * k1 + case.los_alc * k2 + sc_days * k3


def estimate_m5(
    cases: Sequence[CaseRecord],
    params: HospitalCostParams,
    config: ModelConfig,
    benchmark: Mapping[str, CmgStats],
) -> list[CaseEstimate]:
    k1, k2, k3 = config.k
    clamped = [c.case_id for c in cases if c.sc_hours / 24.0 > c.los_acute]
    if clamped:
        shown = ", ".join(clamped[:10]) + (" ..." if len(clamped) > 10 else "")
        warnings.warn(
            f"M5: special-care hours exceed acute days for {len(clamped)} case(s); "
            f"acute term clamped to 0: {shown}",
            CaseCostWarning,
            stacklevel=2,
        )
    raw = [CaseEstimate(c.case_id, c.cmg, stay_units(c, k1, k2, k3) * params.cpd_total) for c in cases]
    _warn_zero_stay(raw, "M5")
    return _normalized(raw, benchmark)


def estimate(
    model_id: "ModelId | str", dataset: "Dataset", config: Optional[ModelConfig] = None
) -> list[CaseEstimate]:
    """Per-case estimates of one model over a whole dataset, in case order."""
    model_id = ModelId.parse(model_id)
    config = config or ModelConfig(model_id)
    cases, params = dataset.cases, dataset.params
    if model_id is ModelId.M1:
        return [estimate_m1(c, params) for c in cases]
    if model_id is ModelId.M2:
        weights = compute_pac_mod(dataset.groups)
        return [estimate_m2(c, weights, params) for c in cases]
    if model_id is ModelId.M3:
        return estimate_m3(cases, compute_pac_mod(dataset.groups), params, dataset.benchmark)
    if model_id is ModelId.M4:
        return estimate_m4(cases, params, dataset.benchmark)
    if model_id is ModelId.M5:
        return estimate_m5(cases, params, config, dataset.benchmark)
    raise ValueError(
        "HYBRID combines per-CMG statistics, not per-case estimates; "
        "use aggregation.model_stats (CLI: report --hybrid)"
    )
