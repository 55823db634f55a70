import numpy as np
import pytest

from lgks_response import BathSpec, build_liouvillian
from lgks_response.models import SIGMA_X, SIGMA_Z

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def qubit_decay(omega=1.0, T=0.0, gamma=1.0):
    """Single qubit H = (omega/2) sz coupled through sx to one bath."""
    from lgks_response import flat_rate
    H = 0.5 * omega * SIGMA_Z
    return H, build_liouvillian(H, [BathSpec("a", SIGMA_X, T, flat_rate(gamma))])


@pytest.fixture
def decay():
    return qubit_decay


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
