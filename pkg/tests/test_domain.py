import math

import pytest
from hypothesis import given, strategies as st

from casecost import CmgStats, HospitalCostParams, ModelConfig, ModelId, validate_case
from casecost.domain import DEFAULT_BUCKETS, check_buckets
from casecost.evaluation import compute_errors
from helpers import make_case, stats


def test_valid_case_has_no_violations():
    c = make_case("a", pac=0.9002, riw=0.9002, los=(5, 5, 0), sc=0.0)
    assert validate_case(c) == []


def test_negative_weight_is_error():
    v = validate_case(make_case("a", pac=-1.0))
    assert len(v) == 1
    assert v[0].is_error and v[0].field == "pac_riw"


def test_los_mismatch_is_warning():
    v = validate_case(make_case("a", los=(10, 5, 3)))
    assert [(x.severity, x.field) for x in v] == [("warning", "los_total")]


def test_special_care_over_acute_is_warning():
    v = validate_case(make_case("a", los=(2, 2, 0), sc=240.0))
    assert [(x.severity, x.field) for x in v] == [("warning", "sc_hours")]


@pytest.mark.parametrize("field", ["los_total", "los_acute", "los_alc"])
def test_negative_los_is_error(field):
    kwargs = dict(case_id="a", cmg="1", pac_riw=1.0, riw=1.0, los_total=1, los_acute=1, los_alc=0, sc_hours=0.0)
    kwargs[field] = -1
    from casecost import CaseRecord

    v = validate_case(CaseRecord(**kwargs))
    assert any(x.is_error and x.field == field for x in v)


def test_params_diem_parts_must_add_up():
    HospitalCostParams(6000, 1600, cpd_direct=1000, cpd_overhead=600.005)
    with pytest.raises(ValueError):
        HospitalCostParams(6000, 1600, cpd_direct=1000, cpd_overhead=650)
    with pytest.raises(ValueError):
        HospitalCostParams(0, 1600)


def test_cmg_stats_invariants():
    with pytest.raises(ValueError):
        CmgStats("1", 2, 10.0, 5.0, 0.0, 6.0, 9.0)  # average below min
    with pytest.raises(ValueError):
        CmgStats("1", 2, 30.0, 5.0, 0.0, 4.0, 6.0)  # total != average * count
    with pytest.raises(ValueError):
        CmgStats("1", 1, 5.0, 5.0, 1.0, 5.0, 5.0)  # singleton with spread


def test_model_config_defaults_and_validation():
    cfg = ModelConfig()
    assert cfg.k == (1.3, 0.5, 2.85)
    assert cfg.buckets == DEFAULT_BUCKETS
    assert ModelConfig("M5").model_id is ModelId.M5
    with pytest.raises(ValueError):
        ModelConfig(ModelId.M5, k2=0.0)


def test_bucket_checks():
    with pytest.raises(ValueError):
        check_buckets([(0, 5), (6, 10)])
    with pytest.raises(ValueError):
        check_buckets([(0, math.inf), (5, 10)])
    assert check_buckets([(0, 5), (5, math.inf)]) == ((0.0, 5.0), (5.0, math.inf))


money = st.floats(min_value=1.0, max_value=1e6, allow_nan=False)


@given(a=money, b=money, c=money, d=money)
def test_error_antisymmetry(a, b, c, d):
    x = {"1": stats("1", 2, (a + b) / 2, min(a, b), max(a, b))}
    y = {"1": stats("1", 2, (c + d) / 2, min(c, d), max(c, d))}
    e1 = compute_errors(x, y)[0]
    e2 = compute_errors(y, x)[0]
    for f in ("e_total", "e_avg", "e_stdev", "e_min", "e_max"):
        assert getattr(e1, f) == -getattr(e2, f)
