import numpy as np
import pytest

from bactcfd.grid import Grid2D

GRID_SHAPES = [(8, 8), (16, 16), (17, 9)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=GRID_SHAPES, ids=lambda s: f"{s[0]}x{s[1]}")
def grid(request):
    return Grid2D(*request.param)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
