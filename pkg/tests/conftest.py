import numpy as np
import pytest

from ris_capacity.channel import CorrelationMatrix
from ris_capacity.scenarios import reference_config

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def reference_k1():
    """Reference scenario: N_t = 8, N_r = 4, 10 dB, one 20x20 RIS, 5 deg
    spread, 30/70 deg, no direct link."""
    return reference_config(1, np.deg2rad(5.0))


@pytest.fixture(scope="session")
def reference_pair(reference_k1):
    ris = reference_k1.ris[0]
    return ris.s_t(), ris.s_r()


def random_psd(rng, n, rank=None, trace=None):
    rank = n if rank is None else rank
    a = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    m = a @ a.conj().T
    target = n if trace is None else trace
    return CorrelationMatrix.normalized(m, target)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
