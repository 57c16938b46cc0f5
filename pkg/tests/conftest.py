import warnings

import pytest

from casecost import HospitalCostParams, SyntheticSpec, generate_synthetic
from casecost.domain import CaseCostWarning

_ACCEPTANCE: dict[str, str] = {}


def record_criterion(name: str, passed: bool) -> None:
    # A criterion checked by several tests passes only if all of them pass.
    if _ACCEPTANCE.get(name) != "FAIL":
        _ACCEPTANCE[name] = "PASS" if passed else "FAIL"


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker and call.when == "call":
        record_criterion(marker.args[0], call.excinfo is None)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[0].lstrip("AC"))):
        terminalreporter.write_line(f"[{_ACCEPTANCE[name]}] {name}")


@pytest.fixture(autouse=True)
def _quiet_case_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CaseCostWarning)
        yield


@pytest.fixture
def params():
    return HospitalCostParams(cpwc=6000.0, cpd_total=1600.0)


@pytest.fixture(scope="session")
def mixed_dataset():
    ds, truth = generate_synthetic(SyntheticSpec(n_cmgs=40, cases_per_cmg_range=(1, 30), seed=11, noise=0.1))
    return ds, truth


@pytest.fixture(scope="session")
def large_dataset():
    ds, truth = generate_synthetic(
        SyntheticSpec(n_cmgs=163, cases_per_cmg_range=(30, 95), seed=2024, noise=0.15)
    )
    return ds, truth
