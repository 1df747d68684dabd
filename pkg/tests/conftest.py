import pytest

from amcost.scenario import bundled_path, load_scenario, read_fixture
from amcost.surrogates import blower_part, reference_basket

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def scenario():
    return load_scenario(bundled_path("blower.scenario"))


@pytest.fixture(scope="session")
def published():
    return read_fixture(bundled_path("blower_sweep.csv"))


@pytest.fixture(scope="session")
def mixed_rows(published):
    return [r for r in published if r.mode == "mixed"]


@pytest.fixture(scope="session")
def single_rows(published):
    return [r for r in published if r.mode == "single"]


@pytest.fixture(scope="session")
def blower():
    return blower_part()


@pytest.fixture(scope="session")
def basket():
    return reference_basket()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
