import numpy as np
import pytest

from nsmhall.spectral import BoxSpec


@pytest.fixture
def box2():
    return BoxSpec(2, 32)


@pytest.fixture
def box3():
    return BoxSpec(3, 16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
