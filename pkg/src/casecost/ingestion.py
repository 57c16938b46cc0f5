"""Loading, writing and synthesizing case-cost datasets.

A dataset is three tables: patient-level cases, the hospital's annual cost
parameters, and the per-CMG benchmark ("actual") cost statistics. On disk
they are ``cases.csv``, ``params.csv`` and ``benchmark.csv``::

    cases.csv      case_id,cmg,pac_riw,riw,los_total,los_acute,los_alc,sc_hours
    params.csv     cpwc,cpd_total,cpd_direct,cpd_overhead,acute_expenses,total_patient_days
    benchmark.csv  cmg,case_count,total,average,stdev,min,max

The synthetic generator draws from numpy's PCG64 bit generator so that a
seed reproduces the same data on any platform.
"""

from __future__ import annotations

import csv
import enum
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence, TextIO, Union

import numpy as np

from ._format import money, number
from .aggregation import summarize
from .domain import DEFAULT_K, CaseRecord, CmgStats, HospitalCostParams, Violation, validate_case

PathLike = Union[str, os.PathLike]
Source = Union[PathLike, TextIO]

CASE_COLUMNS = ("case_id", "cmg", "pac_riw", "riw", "los_total", "los_acute", "los_alc", "sc_hours")
PARAM_COLUMNS = ("cpwc", "cpd_total", "cpd_direct", "cpd_overhead", "acute_expenses", "total_patient_days")
BENCHMARK_COLUMNS = ("cmg", "case_count", "total", "average", "stdev", "min", "max")


class DataError(ValueError):
    """Input data cannot be turned into a valid dataset."""


class ParseError(DataError):
    pass


class CrossTableError(DataError):
    pass


class InvalidDataError(DataError):
    """Error-severity invariant violations in otherwise parseable data."""

    def __init__(self, violations: Sequence[Violation]):
        self.violations = tuple(violations)
        shown = "; ".join(str(v) for v in self.violations[:5])
        more = f" (+{len(self.violations) - 5} more)" if len(self.violations) > 5 else ""
        super().__init__(f"{len(self.violations)} invalid record(s): {shown}{more}")


@dataclass(frozen=True)
class CaseArrays:
    """Column view of a dataset's cases, in case order."""

    cmgs: tuple[str, ...]  # sorted distinct codes
    group: np.ndarray  # index into ``cmgs`` per case
    pac_riw: np.ndarray
    riw: np.ndarray
    los_total: np.ndarray
    los_acute: np.ndarray
    los_alc: np.ndarray
    sc_hours: np.ndarray


@dataclass(frozen=True, eq=False)
class Dataset:
    cases: tuple[CaseRecord, ...]
    params: HospitalCostParams
    benchmark: Mapping[str, CmgStats]
    warnings: tuple[Violation, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "cases", tuple(self.cases))
        object.__setattr__(self, "benchmark", dict(sorted(self.benchmark.items())))
        if not self.cases:
            raise DataError("dataset has no cases")
        ids = set()
        for c in self.cases:
            if c.case_id in ids:
                raise DataError(f"duplicate case_id {c.case_id!r}")
            ids.add(c.case_id)
        check_coverage(self.groups, self.benchmark)

    @cached_property
    def groups(self) -> dict[str, tuple[CaseRecord, ...]]:
        by_cmg: dict[str, list[CaseRecord]] = {}
        for c in self.cases:
            by_cmg.setdefault(c.cmg, []).append(c)
        return {k: tuple(by_cmg[k]) for k in sorted(by_cmg)}

    @property
    def cmgs(self) -> tuple[str, ...]:
        return tuple(self.groups)

    @cached_property
    def arrays(self) -> CaseArrays:
        cmgs = self.cmgs
        index = {code: i for i, code in enumerate(cmgs)}
        cs = self.cases
        return CaseArrays(
            cmgs=cmgs,
            group=np.fromiter((index[c.cmg] for c in cs), dtype=np.intp, count=len(cs)),
            pac_riw=np.array([c.pac_riw for c in cs], dtype=float),
            riw=np.array([c.riw for c in cs], dtype=float),
            los_total=np.array([c.los_total for c in cs], dtype=float),
            los_acute=np.array([c.los_acute for c in cs], dtype=float),
            los_alc=np.array([c.los_alc for c in cs], dtype=float),
            sc_hours=np.array([c.sc_hours for c in cs], dtype=float),
        )

    @property
    def los_consistent(self) -> bool:
        """True when every case's total stay equals acute plus ALC days."""
        return all(c.los_acute + c.los_alc == c.los_total for c in self.cases)

    def with_params(self, params: HospitalCostParams) -> "Dataset":
        return Dataset(self.cases, params, self.benchmark, self.warnings)

    def with_benchmark(self, benchmark: Mapping[str, CmgStats]) -> "Dataset":
        return Dataset(self.cases, self.params, benchmark, self.warnings)


def check_coverage(groups: Mapping[str, Sequence[CaseRecord]], benchmark: Mapping[str, CmgStats]) -> None:
    missing_bench = sorted(set(groups) - set(benchmark))
    missing_cases = sorted(set(benchmark) - set(groups))
    if missing_bench:
        raise CrossTableError(f"CMG(s) in cases but not in benchmark: {', '.join(missing_bench)}")
    if missing_cases:
        raise CrossTableError(f"CMG(s) in benchmark but not in cases: {', '.join(missing_cases)}")
    for code, cases in groups.items():
        if benchmark[code].cmg != code:
            raise CrossTableError(f"benchmark entry keyed {code!r} describes CMG {benchmark[code].cmg!r}")
        if benchmark[code].case_count != len(cases):
            raise CrossTableError(
                f"CMG {code}: benchmark case_count {benchmark[code].case_count} "
                f"!= {len(cases)} case records"
            )


# ---------------------------------------------------------------------------
# CSV reading


def _open(source: Source):
    if hasattr(source, "read"):
        return _NoClose(source)
    return open(source, newline="", encoding="utf-8")


class _NoClose:
    def __init__(self, fh):
        self.fh = fh

    def __enter__(self):
        return self.fh

    def __exit__(self, *exc):
        return False


def _read_table(source: Source, columns: Sequence[str], name: str, warnings: list[Violation]):
    with _open(source) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{name}: empty file, header row required") from None
        header = [h.strip() for h in header]
        missing = [c for c in columns if c not in header]
        if missing:
            raise ParseError(f"{name}: missing column(s) {', '.join(missing)}")
        extra = [h for h in header if h not in columns]
        if extra:
            warnings.append(Violation("warning", name, f"ignoring unknown column(s): {', '.join(extra)}"))
        pos = [header.index(c) for c in columns]
        rows = []
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"{name} row {line}: expected {len(header)} columns, got {len(row)}")
            rows.append((line, {c: row[p].strip() for c, p in zip(columns, pos)}))
    return rows


def _field(conv: Callable, name: str, table: str, line: int, value: str, optional: bool = False):
    if value == "":
        if optional:
            return None
        raise ParseError(f"{table} row {line}: {name} is blank")
    try:
        out = conv(value)
    except ValueError:
        raise ParseError(f"{table} row {line}: cannot parse {name}={value!r}") from None
    if isinstance(out, float) and not math.isfinite(out):
        raise ParseError(f"{table} row {line}: {name}={value!r} is not finite")
    return out


def _int(value: str) -> int:
    # Accept "5" and "5.0" but not "5.5".
    try:
        return int(value)
    except ValueError:
        f = float(value)
        if not f.is_integer():
            raise
        return int(f)


def read_cases(source: Source, warnings: Optional[list[Violation]] = None) -> list[CaseRecord]:
    warnings = [] if warnings is None else warnings
    out = []
    for line, r in _read_table(source, CASE_COLUMNS, "cases.csv", warnings):
        f = lambda conv, name: _field(conv, name, "cases.csv", line, r[name])  # noqa: E731
        if not r["case_id"]:
            raise ParseError(f"cases.csv row {line}: case_id is blank")
        if not r["cmg"]:
            raise ParseError(f"cases.csv row {line}: cmg is blank")
        out.append(
            CaseRecord(
                case_id=r["case_id"],
                cmg=r["cmg"],
                pac_riw=f(float, "pac_riw"),
                riw=f(float, "riw"),
                los_total=f(_int, "los_total"),
                los_acute=f(_int, "los_acute"),
                los_alc=f(_int, "los_alc"),
                sc_hours=f(float, "sc_hours"),
            )
        )
    return out


def read_params(source: Source, warnings: Optional[list[Violation]] = None) -> HospitalCostParams:
    warnings = [] if warnings is None else warnings
    rows = _read_table(source, PARAM_COLUMNS, "params.csv", warnings)
    if len(rows) != 1:
        raise ParseError(f"params.csv: expected exactly one data row, got {len(rows)}")
    line, r = rows[0]
    try:
        return HospitalCostParams(
            cpwc=_field(float, "cpwc", "params.csv", line, r["cpwc"]),
            cpd_total=_field(float, "cpd_total", "params.csv", line, r["cpd_total"]),
            cpd_direct=_field(float, "cpd_direct", "params.csv", line, r["cpd_direct"], True),
            cpd_overhead=_field(float, "cpd_overhead", "params.csv", line, r["cpd_overhead"], True),
            acute_expenses=_field(float, "acute_expenses", "params.csv", line, r["acute_expenses"], True),
            total_patient_days=_field(
                _int, "total_patient_days", "params.csv", line, r["total_patient_days"], True
            ),
        )
    except ValueError as exc:
        if isinstance(exc, DataError):
            raise
        raise InvalidDataError([Violation("error", "params.csv", str(exc))]) from None


def read_benchmark(source: Source, warnings: Optional[list[Violation]] = None) -> dict[str, CmgStats]:
    warnings = [] if warnings is None else warnings
    out: dict[str, CmgStats] = {}
    for line, r in _read_table(source, BENCHMARK_COLUMNS, "benchmark.csv", warnings):
        f = lambda conv, name: _field(conv, name, "benchmark.csv", line, r[name])  # noqa: E731
        code = r["cmg"]
        if not code:
            raise ParseError(f"benchmark.csv row {line}: cmg is blank")
        if code in out:
            raise ParseError(f"benchmark.csv row {line}: duplicate CMG {code!r}")
        try:
            out[code] = CmgStats(
                cmg=code,
                case_count=f(_int, "case_count"),
                total=f(float, "total"),
                average=f(float, "average"),
                stdev=f(float, "stdev"),
                min=f(float, "min"),
                max=f(float, "max"),
            )
        except ValueError as exc:
            if isinstance(exc, DataError):
                raise
            raise InvalidDataError([Violation("error", f"benchmark.csv row {line}", str(exc))]) from None
    return out


def load_dataset(cases_source: Source, params_source: Source, benchmark_source: Source) -> Dataset:
    """Read and cross-validate the three input tables.

    Raises:
        ParseError: malformed file or field.
        CrossTableError: CMG sets or case counts disagree between tables.
        InvalidDataError: a case breaks an error-severity invariant.
    """
    warnings: list[Violation] = []
    cases = read_cases(cases_source, warnings)
    params = read_params(params_source, warnings)
    benchmark = read_benchmark(benchmark_source, warnings)

    problems = [v for c in cases for v in validate_case(c)]
    errors = [v for v in problems if v.is_error]
    if errors:
        raise InvalidDataError(errors)
    warnings.extend(problems)
    return Dataset(tuple(cases), params, benchmark, tuple(warnings))


def load_dir(directory: PathLike) -> Dataset:
    d = Path(directory)
    return load_dataset(d / "cases.csv", d / "params.csv", d / "benchmark.csv")


# ---------------------------------------------------------------------------
# CSV writing


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def stats_row(s: CmgStats) -> list[str]:
    return [str(s.case_count), money(s.total), money(s.average), money(s.stdev), money(s.min), money(s.max)]


def write_dataset(dataset: Dataset, directory: PathLike) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    _write_rows(
        d / "cases.csv",
        CASE_COLUMNS,
        (
            [c.case_id, c.cmg, number(c.pac_riw), number(c.riw), str(c.los_total),
             str(c.los_acute), str(c.los_alc), number(c.sc_hours)]
            for c in dataset.cases
        ),
    )
    p = dataset.params
    opt = lambda v: "" if v is None else money(v)  # noqa: E731
    _write_rows(
        d / "params.csv",
        PARAM_COLUMNS,
        [[money(p.cpwc), money(p.cpd_total), opt(p.cpd_direct), opt(p.cpd_overhead),
          opt(p.acute_expenses), "" if p.total_patient_days is None else str(p.total_patient_days)]],
    )
    _write_rows(
        d / "benchmark.csv",
        BENCHMARK_COLUMNS,
        ([s.cmg, *stats_row(s)] for s in dataset.benchmark.values()),
    )


def write_ground_truth(truth: Mapping[str, float], path: PathLike) -> None:
    _write_rows(Path(path), ("case_id", "cost"), ([cid, money(v)] for cid, v in truth.items()))


# ---------------------------------------------------------------------------
# Synthetic data


class CostProcess(str, enum.Enum):
    """How ground-truth case costs are generated.

    ``PROPORTIONAL_TO_RIW`` reproduces the relative-intensity models exactly
    (cost = repaired weight x CPWC), ``PROPORTIONAL_TO_LOS`` the plain
    per-diem model (cost = days x CpD), ``STAY_TYPE`` the stay-type per-diem
    model at ``SyntheticSpec.stay_k``. ``MIXED`` averages the RIW and
    stay-type costs, so no model is exact.
    """

    PROPORTIONAL_TO_RIW = "riw"
    PROPORTIONAL_TO_LOS = "los"
    STAY_TYPE = "stay"
    MIXED = "mixed"


@dataclass(frozen=True)
class SyntheticSpec:
    n_cmgs: int = 163
    cases_per_cmg_range: tuple[int, int] = (1, 94)
    cost_process: CostProcess = CostProcess.MIXED
    degenerate_pac_fraction: float = 0.025
    degenerate_both_fraction: float = 0.043
    seed: int = 0
    cpwc: float = 6000.0
    cpd_total: float = 1600.0
    stay_k: tuple[float, float, float] = DEFAULT_K
    noise: float = 0.0  # sigma of multiplicative log-normal noise on true costs

    def __post_init__(self) -> None:
        object.__setattr__(self, "cost_process", CostProcess(self.cost_process))
        lo, hi = self.cases_per_cmg_range
        if self.n_cmgs < 1:
            raise ValueError(f"n_cmgs must be >= 1, got {self.n_cmgs}")
        if lo < 1 or hi < lo:
            raise ValueError(f"invalid cases_per_cmg_range {self.cases_per_cmg_range}")
        for name in ("degenerate_pac_fraction", "degenerate_both_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.n_degenerate_pac + self.n_degenerate_both > self.n_cmgs:
            raise ValueError("degenerate fractions sum to more than all CMGs")
        if self.n_degenerate_pac and hi < 2:
            raise ValueError("PAC-only degeneracy needs CMGs with at least 2 cases")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")
        if self.cpwc <= 0 or self.cpd_total <= 0 or min(self.stay_k) <= 0:
            raise ValueError("cost parameters and stay coefficients must be positive")

    @property
    def n_degenerate_pac(self) -> int:
        return int(round(self.degenerate_pac_fraction * self.n_cmgs))

    @property
    def n_degenerate_both(self) -> int:
        return int(round(self.degenerate_both_fraction * self.n_cmgs))


def _weights(x: np.ndarray) -> np.ndarray:
    # Weights carry 4 decimals.
    return np.maximum(np.round(x, 4), 0.0001)


def _distinct(w: np.ndarray) -> np.ndarray:
    """Nudge 4-decimal weights upward until no two are equal."""
    out = w.copy()
    order = np.argsort(out, kind="stable")
    for a, b in zip(order[:-1], order[1:]):
        if out[b] <= out[a]:
            out[b] = round(out[a] + 0.0001, 4)
    return out


def generate_synthetic(spec: SyntheticSpec) -> tuple[Dataset, dict[str, float]]:
    """Draw a dataset whose benchmark is the exact aggregation of known per-case costs.

    Returns the dataset and the ground-truth cost of every case. Each CMG
    gets its own base intensity, typical length of stay and propensities
    for ALC days and special-care hours, so stay-type mixes differ between
    groups. ``n_degenerate_pac`` CMGs share one PAC weight across their
    cases while keeping distinct RIW values; ``n_degenerate_both`` CMGs
    have both weights single-valued.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    lo, hi = spec.cases_per_cmg_range
    k1, k2, k3 = spec.stay_k
    cpwc, cpd = spec.cpwc, spec.cpd_total

    top = max(999, 2 * spec.n_cmgs)
    width = len(str(top))
    codes = sorted(f"{c:0{width}d}" for c in rng.choice(top, size=spec.n_cmgs, replace=False) + 1)
    kinds = np.zeros(spec.n_cmgs, dtype=int)  # 0 normal, 1 PAC-degenerate, 2 both
    perm = rng.permutation(spec.n_cmgs)
    kinds[perm[: spec.n_degenerate_pac]] = 1
    kinds[perm[spec.n_degenerate_pac : spec.n_degenerate_pac + spec.n_degenerate_both]] = 2

    cases: list[CaseRecord] = []
    truth: dict[str, float] = {}
    benchmark: dict[str, CmgStats] = {}
    seq = 0
    for code, kind in zip(codes, kinds):
        n = int(rng.integers(max(lo, 2) if kind == 1 else lo, hi + 1))
        base = rng.lognormal(0.0, 0.6)
        mean_los = rng.lognormal(np.log(5.0), 0.6)
        alc_share = rng.uniform(0.2, 0.8) if rng.random() < 0.3 else 0.0
        sc_prone = rng.random() < 0.35

        los = np.minimum(rng.geometric(1.0 / max(mean_los, 1.0), size=n), 365)
        alc = np.where(rng.random(n) < 0.5, rng.binomial(los, alc_share), 0)
        acute = los - alc
        sc = np.where(
            sc_prone & (rng.random(n) < 0.6),
            np.round(rng.uniform(0.0, 1.0, size=n) * acute * 24.0, 1),
            0.0,
        )
        sc_days = sc / 24.0
        stay_units = np.maximum(acute - sc_days, 0.0) * k1 + alc * k2 + sc_days * k3
        case_mult = rng.lognormal(0.0, 0.35, size=n)
        pac_jitter = rng.lognormal(0.0, 0.05, size=n)
        cost_noise = rng.lognormal(0.0, spec.noise, size=n) if spec.noise > 0 else np.ones(n)

        process = spec.cost_process
        if process is CostProcess.PROPORTIONAL_TO_RIW:
            intensity = base * case_mult * np.sqrt(los / mean_los)
        elif process is CostProcess.PROPORTIONAL_TO_LOS:
            intensity = cpd * los / cpwc
        elif process is CostProcess.STAY_TYPE:
            intensity = cpd * stay_units / cpwc
        else:
            intensity = 0.5 * base * case_mult * np.sqrt(los / mean_los) + 0.5 * cpd * stay_units / cpwc

        riw = _weights(intensity)
        if kind == 0:
            pac = _weights(intensity * pac_jitter)
        elif kind == 1:
            riw = _distinct(riw)
            pac = np.full(n, _weights(np.array([riw.mean()]))[0])
        else:
            flat = _weights(np.array([intensity.mean()]))[0]
            riw = np.full(n, flat)
            pac = np.full(n, flat)

        # Repaired weight, computed here independently of the estimation code.
        if pac.min() == pac.max() and riw.min() != riw.max():
            pac_mod = riw * (pac.sum() / riw.sum())
        else:
            pac_mod = pac

        if process is CostProcess.PROPORTIONAL_TO_RIW:
            cost = pac_mod * cpwc
        elif process is CostProcess.PROPORTIONAL_TO_LOS:
            cost = los * cpd
        elif process is CostProcess.STAY_TYPE:
            cost = stay_units * cpd
        else:
            cost = 0.5 * pac_mod * cpwc + 0.5 * stay_units * cpd
        cost = cost * cost_noise

        costs = []
        for i in range(n):
            seq += 1
            cid = f"C{seq:06d}"
            cases.append(
                CaseRecord(
                    case_id=cid,
                    cmg=code,
                    pac_riw=float(pac[i]),
                    riw=float(riw[i]),
                    los_total=int(los[i]),
                    los_acute=int(acute[i]),
                    los_alc=int(alc[i]),
                    sc_hours=float(sc[i]),
                )
            )
            truth[cid] = float(cost[i])
            costs.append(float(cost[i]))
        benchmark[code] = summarize(code, costs)

    total_days = sum(c.los_total for c in cases)
    params = HospitalCostParams(
        cpwc=cpwc,
        cpd_total=cpd,
        acute_expenses=sum(truth.values()),
        total_patient_days=total_days if total_days > 0 else None,
    )
    return Dataset(tuple(cases), params, benchmark), truth
