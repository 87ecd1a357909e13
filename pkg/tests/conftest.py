import time

import pytest

from poisonsim.experiment import run_replication
from poisonsim.simulation import Scenario

ACCEPTANCE_LINES: list[str] = []
REPLICATION_SEEDS = range(10)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def default_runs():
    """Ten seeded replications of the default scenario, all three modes."""
    sc = Scenario()
    t0 = time.perf_counter()
    results = [run_replication(sc, seed, ("baseline", "poison", "jam")) for seed in REPLICATION_SEEDS]
    return sc, results, time.perf_counter() - t0
