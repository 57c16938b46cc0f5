"""Domain types shared by the case-cost pipeline.

All types are frozen dataclasses. ``CaseRecord`` performs no checks on
construction so that bad input rows can still be represented and reported
by :func:`validate_case`; the aggregate types (``HospitalCostParams``,
``CmgStats``, ``ModelConfig``) reject invariant violations with
``ValueError``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple


class CaseCostWarning(UserWarning):
    """Non-fatal data condition (clamped stay units, repaired hybrid stats, ...)."""


class ModelId(str, enum.Enum):
    M1 = "m1"
    M2 = "m2"
    M3 = "m3"
    M4 = "m4"
    M5 = "m5"
    HYBRID = "hybrid"

    @classmethod
    def parse(cls, value: "str | ModelId") -> "ModelId":
        if isinstance(value, ModelId):
            return value
        try:
            return cls(value.strip().lower())
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown model {value!r} (expected one of: {choices})") from None

    @property
    def label(self) -> str:
        return self.value.upper()


Bucket = Tuple[float, float]

DEFAULT_BUCKETS: Tuple[Bucket, ...] = (
    (0.0, 5.0),
    (5.0, 10.0),
    (10.0, 15.0),
    (15.0, 20.0),
    (20.0, 30.0),
    (30.0, 50.0),
    (50.0, math.inf),
)

DEFAULT_K = (1.3, 0.5, 2.85)


def bucket_label(bucket: Bucket) -> str:
    a, b = bucket
    hi = "inf" if math.isinf(b) else f"{b:g}"
    return f"{a:g}-{hi}"


def check_buckets(buckets: Sequence[Bucket]) -> Tuple[Bucket, ...]:
    """Return ``buckets`` as a tuple after checking they are contiguous and ascending."""
    out = tuple((float(a), float(b)) for a, b in buckets)
    if not out:
        raise ValueError("at least one bucket is required")
    if out[0][0] != 0.0:
        raise ValueError("first bucket must start at 0")
    for i, (a, b) in enumerate(out):
        if not b > a:
            raise ValueError(f"bucket {i} is empty or reversed: ({a}, {b})")
        if math.isinf(b) and i != len(out) - 1:
            raise ValueError("only the last bucket may be unbounded")
        if i and out[i - 1][1] != a:
            raise ValueError(f"buckets {i - 1} and {i} are not contiguous")
    return out


@dataclass(frozen=True)
class CaseRecord:
    case_id: str
    cmg: str
    pac_riw: float
    riw: float
    los_total: int
    los_acute: int
    los_alc: int
    sc_hours: float


@dataclass(frozen=True)
class Violation:
    severity: str  # "error" | "warning"
    field: str
    message: str
    case_id: Optional[str] = None

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def __str__(self) -> str:
        where = f"case {self.case_id}: " if self.case_id is not None else ""
        return f"{self.severity}: {where}{self.field}: {self.message}"


def validate_case(record: CaseRecord) -> list[Violation]:
    """Check a case against the record invariants.

    Negative weights, stay lengths or hours are error-severity. A length of
    stay that does not split into acute plus ALC days, and special-care hours
    exceeding the acute days (which the per-diem stay model clamps), are
    warnings.
    """
    out: list[Violation] = []
    cid = record.case_id

    def err(name: str, msg: str) -> None:
        out.append(Violation("error", name, msg, cid))

    def warn(name: str, msg: str) -> None:
        out.append(Violation("warning", name, msg, cid))

    for name in ("pac_riw", "riw"):
        v = getattr(record, name)
        if not math.isfinite(v):
            err(name, f"non-finite weight {v}")
        elif v < 0:
            err(name, f"negative weight {v}")
    for name in ("los_total", "los_acute", "los_alc"):
        if getattr(record, name) < 0:
            err(name, f"negative length of stay {getattr(record, name)}")
    if not math.isfinite(record.sc_hours):
        err("sc_hours", f"non-finite hours {record.sc_hours}")
    elif record.sc_hours < 0:
        err("sc_hours", f"negative special-care hours {record.sc_hours}")

    if any(v.is_error for v in out):
        return out

    if record.los_acute + record.los_alc != record.los_total:
        warn(
            "los_total",
            f"LOS sum mismatch: acute {record.los_acute} + alc {record.los_alc} "
            f"!= total {record.los_total}",
        )
    if record.sc_hours / 24.0 > record.los_acute:
        warn(
            "sc_hours",
            f"special-care days {record.sc_hours / 24.0:g} exceed acute days "
            f"{record.los_acute}; acute stay term clamps to 0",
        )
    return out


@dataclass(frozen=True)
class HospitalCostParams:
    cpwc: float
    cpd_total: float
    cpd_direct: Optional[float] = None
    cpd_overhead: Optional[float] = None
    acute_expenses: Optional[float] = None
    total_patient_days: Optional[int] = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.cpwc) and self.cpwc > 0):
            raise ValueError(f"cpwc must be positive, got {self.cpwc}")
        if not (math.isfinite(self.cpd_total) and self.cpd_total > 0):
            raise ValueError(f"cpd_total must be positive, got {self.cpd_total}")
        for name in ("cpd_direct", "cpd_overhead", "acute_expenses", "total_patient_days"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive when given, got {v}")
        if self.cpd_direct is not None and self.cpd_overhead is not None:
            if abs(self.cpd_direct + self.cpd_overhead - self.cpd_total) > 0.01 + 1e-9:
                raise ValueError(
                    f"cpd_direct + cpd_overhead = {self.cpd_direct + self.cpd_overhead} "
                    f"does not match cpd_total = {self.cpd_total}"
                )


# Relative slack for float round-off in the ordering invariant.
_ORDER_RTOL = 1e-9


@dataclass(frozen=True)
class CmgStats:
    """Per-CMG summary; used both for benchmark (actual) and estimated costs."""

    cmg: str
    case_count: int
    total: float
    average: float
    stdev: float
    min: float
    max: float

    def __post_init__(self) -> None:
        if self.case_count < 1:
            raise ValueError(f"CMG {self.cmg}: case_count must be >= 1")
        slack = _ORDER_RTOL * max(abs(self.min), abs(self.max), 1.0)
        if not (self.min - slack <= self.average <= self.max + slack):
            raise ValueError(
                f"CMG {self.cmg}: expected min <= average <= max, got "
                f"{self.min} / {self.average} / {self.max}"
            )
        if self.stdev < 0:
            raise ValueError(f"CMG {self.cmg}: negative stdev {self.stdev}")
        if abs(self.total - self.average * self.case_count) > 0.01 * self.case_count + 1e-9 * abs(self.total):
            raise ValueError(
                f"CMG {self.cmg}: total {self.total} inconsistent with "
                f"average {self.average} x {self.case_count} cases"
            )
        if self.case_count == 1 and (self.stdev != 0 or self.min != self.max):
            raise ValueError(f"CMG {self.cmg}: single-case group needs stdev 0 and min == max")


@dataclass(frozen=True)
class ErrorRecord:
    """Signed estimate-minus-actual differences for one CMG."""

    cmg: str
    e_total: float
    e_avg: float
    e_stdev: float
    e_min: float
    e_max: float
    rel_total: float


@dataclass(frozen=True)
class ModelConfig:
    model_id: ModelId = ModelId.M1
    k1: float = DEFAULT_K[0]
    k2: float = DEFAULT_K[1]
    k3: float = DEFAULT_K[2]
    buckets: Tuple[Bucket, ...] = DEFAULT_BUCKETS

    def __post_init__(self) -> None:
        object.__setattr__(self, "model_id", ModelId.parse(self.model_id))
        for name in ("k1", "k2", "k3"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v}")
        object.__setattr__(self, "buckets", check_buckets(self.buckets))

    @property
    def k(self) -> Tuple[float, float, float]:
        return (self.k1, self.k2, self.k3)


@dataclass(frozen=True)
class PerformanceTable:
    """Bucketed relative total-cost errors plus mean absolute stat errors."""

    model_id: str
    buckets: Tuple[Bucket, ...]
    counts: Tuple[int, ...]
    p_ab: Tuple[float, ...]
    mean_abs_e_avg: float
    mean_abs_e_min: float
    mean_abs_e_max: float
    n_groups: int
    # Not part of the default table layout; reported only on request.
    mean_abs_e_stdev: float = field(default=0.0)
    # Mean |relative total error|, used to break ties between equal bucket profiles.
    mean_abs_rel_total: float = field(default=0.0)

    def __post_init__(self) -> None:
        if self.n_groups < 1:
            raise ValueError("n_groups must be positive")
        if len(self.p_ab) != len(self.buckets) or len(self.counts) != len(self.buckets):
            raise ValueError("one percentage and count per bucket required")
        if abs(sum(self.p_ab) - 100.0) > 0.1:
            raise ValueError(f"bucket percentages sum to {sum(self.p_ab)}, not 100")
