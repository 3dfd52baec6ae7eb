import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rlpci.model import Dataset, standardize  # noqa: E402


def make_design(n, p, seed=0, beta=None, noise=1.0):
    g = np.random.default_rng(seed)
    X = g.standard_normal((n, p))
    if beta is None:
        beta = np.zeros(p)
        beta[: min(3, p)] = [2.0, -1.0, 0.5][: min(3, p)]
    y = X @ beta + noise * g.standard_normal(n)
    return standardize(Dataset(X, y))


@pytest.fixture
def small_design():
    return make_design(60, 8, seed=11)


@pytest.fixture
def wide_design():
    return make_design(40, 80, seed=5)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
