import io
import math

import numpy as np
import pytest

from casecost import CostProcess, SyntheticSpec, compute_pac_mod, generate_synthetic, load_dataset, load_dir, write_dataset
from casecost.ingestion import CrossTableError, InvalidDataError, ParseError, write_ground_truth
import oracles

CASES = """case_id,cmg,pac_riw,riw,los_total,los_acute,los_alc,sc_hours
a,232,0.9002,0.8,3,3,0,0
b,232,0.9002,1.0,5,5,0,12
c,232,0.9002,1.2,8,6,2,0
"""
PARAMS = "cpwc,cpd_total,cpd_direct,cpd_overhead,acute_expenses,total_patient_days\n6000,1600,,,,\n"
BENCH = "cmg,case_count,total,average,stdev,min,max\n232,3,15000,5000,2000,3000,7000\n"


def _load(cases=CASES, params=PARAMS, bench=BENCH):
    return load_dataset(io.StringIO(cases), io.StringIO(params), io.StringIO(bench))


def test_minimal_consistent_dataset():
    ds = _load()
    assert list(ds.groups) == ["232"]
    assert len(ds.groups["232"]) == 3
    assert ds.params.cpwc == 6000
    assert ds.params.cpd_direct is None


def test_benchmark_cmg_missing_from_cases():
    bench = BENCH + "999,1,10,10,0,10,10\n"
    with pytest.raises(CrossTableError, match="999"):
        _load(bench=bench)


def test_case_count_mismatch():
    with pytest.raises(CrossTableError, match="case_count"):
        _load(bench=BENCH.replace("232,3,15000", "232,4,20000"))


def test_malformed_field_cites_row():
    bad = CASES.replace("b,232,0.9002,1.0,5", "b,232,0.9002,1.0,abc")
    with pytest.raises(ParseError, match="row 3.*los_total"):
        _load(cases=bad)


def test_wrong_column_count():
    with pytest.raises(ParseError, match="row 2"):
        _load(cases=CASES.replace("a,232,0.9002,0.8,3,3,0,0", "a,232,0.9002,0.8,3,3,0"))


def test_missing_header_column():
    with pytest.raises(ParseError, match="riw"):
        _load(cases=CASES.replace(",riw,", ",weight,"))


def test_negative_value_is_fatal():
    with pytest.raises(InvalidDataError):
        _load(cases=CASES.replace("a,232,0.9002,0.8", "a,232,0.9002,-0.8"))


def test_extra_column_and_los_mismatch_are_warnings():
    cases = CASES.replace("sc_hours\n", "sc_hours,diag\n")
    cases = "\n".join(line + ",x" if line and not line.startswith("case_id") else line for line in cases.split("\n"))
    cases = cases.replace("c,232,0.9002,1.2,8,6,2", "c,232,0.9002,1.2,9,6,2")
    ds = _load(cases=cases)
    fields = sorted(v.field for v in ds.warnings)
    assert fields == ["cases.csv", "los_total"]


def test_round_trip(tmp_path):
    ds, truth = generate_synthetic(SyntheticSpec(n_cmgs=12, seed=3, noise=0.2))
    write_dataset(ds, tmp_path / "a")
    again = load_dir(tmp_path / "a")
    assert again.cases == ds.cases
    for cmg, s in ds.benchmark.items():
        t = again.benchmark[cmg]
        assert t.case_count == s.case_count
        for f in ("total", "average", "stdev", "min", "max"):
            assert abs(getattr(t, f) - getattr(s, f)) <= 0.005 + 1e-9
    write_dataset(again, tmp_path / "b")
    for name in ("cases.csv", "params.csv", "benchmark.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    write_ground_truth(truth, tmp_path / "gt.csv")
    assert len((tmp_path / "gt.csv").read_text().splitlines()) == len(ds.cases) + 1


# --- synthetic generator -------------------------------------------------


def test_flat_pac_pattern():
    spec = SyntheticSpec(n_cmgs=1, cases_per_cmg_range=(9, 9), degenerate_pac_fraction=1.0,
                         degenerate_both_fraction=0.0, seed=7)
    ds, _ = generate_synthetic(spec)
    pac = {c.pac_riw for c in ds.cases}
    riw = [c.riw for c in ds.cases]
    assert len(ds.cases) == 9
    assert len(pac) == 1
    assert len(set(riw)) == 9


def test_determinism():
    spec = SyntheticSpec(n_cmgs=20, seed=99, noise=0.3)
    a, ta = generate_synthetic(spec)
    b, tb = generate_synthetic(spec)
    assert a.cases == b.cases and ta == tb and a.benchmark == b.benchmark
    c, _ = generate_synthetic(SyntheticSpec(n_cmgs=20, seed=100, noise=0.3))
    assert c.cases != a.cases


def test_los_process_cost_per_day_constant():
    ds, truth = generate_synthetic(SyntheticSpec(n_cmgs=15, cost_process=CostProcess.PROPORTIONAL_TO_LOS, seed=5))
    for cmg, cases in ds.groups.items():
        ratios = {truth[c.case_id] / c.los_total for c in cases}
        assert max(ratios) - min(ratios) <= 1e-9 * max(ratios)


def test_degeneracy_fractions_realized():
    spec = SyntheticSpec(n_cmgs=100, degenerate_pac_fraction=0.1, degenerate_both_fraction=0.05, seed=1)
    ds, _ = generate_synthetic(spec)
    pac_only = both = 0
    for cases in ds.groups.values():
        if len(cases) < 2:
            continue
        pac_flat = len({c.pac_riw for c in cases}) == 1
        riw_flat = len({c.riw for c in cases}) == 1
        pac_only += pac_flat and not riw_flat
        both += pac_flat and riw_flat
    assert pac_only == 10
    # Flat by chance is possible for tiny groups, so only a lower bound for "both".
    assert both >= 5


def test_benchmark_equals_brute_force_aggregation(mixed_dataset):
    ds, truth = mixed_dataset
    for cmg, cases in ds.groups.items():
        total, avg, sd, mn, mx = oracles.stats([truth[c.case_id] for c in cases])
        s = ds.benchmark[cmg]
        for got, want in ((s.total, total), (s.average, avg), (s.stdev, sd), (s.min, mn), (s.max, mx)):
            assert math.isclose(got, want, rel_tol=1e-9, abs_tol=1e-9)


def test_riw_process_matches_repaired_weights():
    ds, truth = generate_synthetic(SyntheticSpec(n_cmgs=30, cost_process="riw", seed=8,
                                                 degenerate_pac_fraction=0.2))
    w = oracles.pac_mod(ds.cases)
    for c in ds.cases:
        assert math.isclose(truth[c.case_id], float(w[c.case_id] * 6000), rel_tol=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [dict(n_cmgs=0), dict(cases_per_cmg_range=(0, 3)), dict(degenerate_pac_fraction=1.5),
     dict(degenerate_pac_fraction=0.6, degenerate_both_fraction=0.6),
     dict(cases_per_cmg_range=(1, 1), degenerate_pac_fraction=0.5)],
)
def test_infeasible_specs(kwargs):
    with pytest.raises(ValueError):
        SyntheticSpec(**kwargs)


def test_generated_data_is_los_consistent(mixed_dataset):
    ds, _ = mixed_dataset
    assert ds.los_consistent
    arr = ds.arrays
    assert np.all(arr.sc_hours / 24 <= arr.los_acute)
