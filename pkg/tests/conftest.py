from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"

# filled by test_acceptance; echoed in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def two_blobs(n_per=20, gap=20.0, seed=0):
    r = np.random.default_rng(seed)
    a = r.normal(0.0, 0.5, size=(n_per, 2))
    b = r.normal(0.0, 0.5, size=(n_per, 2)) + [gap, 0.0]
    return np.vstack([a, b]), np.repeat([0, 1], n_per)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
