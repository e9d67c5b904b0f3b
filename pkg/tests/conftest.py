import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fishery_enforcement import MarketParams, PenaltySchedule
from fishery_enforcement.model import FirmCostParams
from fishery_enforcement.scenarios import default_scenario, preset


@pytest.fixture(scope="session")
def scn():
    return default_scenario()


@pytest.fixture(scope="session")
def hetero():
    return preset("heterogeneous")


@pytest.fixture
def toy():
    """The single-firm parameterisation used in the worked examples (p=10, c=5, F_max=20, a=1)."""
    return MarketParams.constant(10.0), FirmCostParams(5.0), PenaltySchedule(20.0, 1.0)


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Collects (number, title, passed, seconds, detail) rows for the end-of-run summary."""
    return request.config.stash.setdefault(ACCEPTANCE, [])


def pytest_terminal_summary(terminalreporter, config):
    rows = config.stash.get(ACCEPTANCE, [])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, seconds, detail in sorted(rows):
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number} {verdict} ({seconds:.1f}s) {title}: {detail}")
