import numpy as np
import pytest

from affinema.convex.domains import Disk
from affinema.solver.config import SolverConfig
from affinema.solver.problems import solve_cheng_yau

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def unit_disk():
    return Disk((0.0, 0.0), 1.0)


@pytest.fixture(scope="session")
def disk_w32(unit_disk):
    w, rep = solve_cheng_yau(unit_disk, 4.0, SolverConfig(h=1 / 32))
    return w


@pytest.fixture(scope="session")
def disk_w16(unit_disk):
    w, rep = solve_cheng_yau(unit_disk, 4.0, SolverConfig(h=1 / 16))
    return w


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
