import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from coulomb_limits import CoulombSpec, Piecewise, RegularizedFamily, square_well  # noqa: E402

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def well_family():
    """Resonant square well (theta = -1) with q- = q+ = 1 and kappa(t) = t."""
    return RegularizedFamily(CoulombSpec(1.0, 1.0), kappa=Piecewise.polynomial((0.0, 1.0)),
                             U=square_well(-math.pi**2 / 4), name="well")


@pytest.fixture
def delta_family():
    def make(beta):
        return RegularizedFamily(CoulombSpec(0.0, 0.0), V=Piecewise.constant(beta / 2.0), name=f"delta{beta:g}")
    return make


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
