import numpy as np
import pytest

from xrelay.model import make_config

# (num_tx, num_rx, relay antennas) of the acceptance matrix
ACCEPTANCE_CONFIGS = [
    (2, 2, [1]),
    (2, 3, [2]),
    (3, 2, [2]),
    (3, 3, [2]),
    (3, 3, [1, 1, 1, 1]),
    (4, 2, [1, 2]),
]
MODES = ["varying", "constant"]

_criteria = []


def cfg_of(m, n, antennas, mode="varying", seed=0, constellation="gaussian"):
    return make_config(m, n, len(antennas), antennas, mode, seed, constellation)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion():
    """Record one acceptance line; printed in the terminal summary."""
    def record(number, name, ok, detail=""):
        _criteria.append((number, name, ok, detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(_criteria, key=lambda c: c[0]):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {name}  {detail}")
