import dataclasses

import pytest

from psband import regulatory as reg
from psband.geo import BoundingBox, GeoPoint
from psband.rf import Environment
from psband.scenario import Scenario, load_scenario

_criteria: dict[str, tuple[int, str]] = {}
_outcomes: dict[int, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m:
            _criteria[item.nodeid] = (m.args[0], m.args[1])


def pytest_runtest_logreport(report):
    if report.nodeid in _criteria and (report.when == "call" or report.outcome != "passed"):
        _outcomes.setdefault(_criteria[report.nodeid][0], []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    titles = {n: t for n, t in _criteria.values()}
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        ok = all(o == "passed" for o in _outcomes[n])
        terminalreporter.write_line(f"AC{n:<2} {'PASS' if ok else 'FAIL'}  {titles[n]}")


@pytest.fixture(scope="session")
def savannah_60m() -> Scenario:
    return load_scenario("savannah_i16_60m.scn")


@pytest.fixture(scope="session")
def savannah_2m() -> Scenario:
    return load_scenario("savannah_i16_2m.scn")


def small_scenario(**changes) -> Scenario:
    """Isotropic free-space scenario on a 6 km box, cheap enough for property tests."""
    tx = GeoPoint(32.0, -81.0, 2.0)
    base = Scenario(
        tx_location=tx,
        tx_power_w=0.001,
        channel=reg.validate_aggregation(reg.standard_band_plan(), [12, 13]),
        tx_antenna="isotropic",
        rx_sensitivity_dbm=-110.0,
        environment=Environment(),
        bbox=BoundingBox.centered(tx, 6000.0),
        resolution_m=200.0,
    )
    return dataclasses.replace(base, **changes)
