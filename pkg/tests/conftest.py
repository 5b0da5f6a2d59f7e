import numpy as np
import pytest

from mildlab.grid_space import Grid, GridFunction
from mildlab.noise import DiffusionSpec, sample_path
from mildlab.scalar_monotone import TEST_DRIFTS
from mildlab.semigroup import HeatSemigroup

ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, description: str) -> None:
    """Called by an acceptance test once its assertions have all held."""
    line = f"[criterion {number:02d}] PASS - {description}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])


@pytest.fixture(scope="session")
def grid():
    return Grid(63)


@pytest.fixture(scope="session")
def sg(grid):
    return HeatSemigroup(grid, 1.0)


@pytest.fixture(scope="session")
def drifts():
    return TEST_DRIFTS()


@pytest.fixture(scope="session")
def smooth_path(sg):
    return sample_path(sg, DiffusionSpec(c=1.0, gamma=2.0), 0.5, 2.0**-9, seed=4242)


@pytest.fixture
def rng():
    return np.random.default_rng(171)


@pytest.fixture
def sine_u0(grid):
    return GridFunction(grid, 0.5 * np.sin(np.pi * grid.nodes))
