import math

import numpy as np
import pytest

from phasegate.model import ModeSpec

KHZ = 2 * math.pi * 1e3
CHAIN_KHZ = (59.77, 40.26, 11.06, -20.07, -59.77)

# filled by test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def chain_modes():
    return [ModeSpec(k + 1, KHZ * d, 2 * math.pi * 3e6, 0.0, (0.05, 0.05))
            for k, d in enumerate(CHAIN_KHZ)]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
