import numpy as np
import pytest

from agm.inequalities import random_psd_tuple


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def psd_pair(rng):
    t = random_psd_tuple(rng, 2, 3)
    return t[0], t[1]


def random_psd(rng, d, rank=None):
    z = rng.standard_normal((d, rank or d))
    return z @ z.T


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
