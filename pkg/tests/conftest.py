import numpy as np
import pytest

from qrtherm.dme import BathSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def baths(t_r, t_q, alpha=0.001, omega_c=10.0):
    return BathSpec("R", alpha, omega_c, t_r), BathSpec("Q", alpha, omega_c, t_q)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
