import numpy as np
import pytest
from hypothesis import settings

from framehydro.cli_io.initial import make_initial
from framehydro.grid import Grid2D
from framehydro.integrator import Coefficients, SimState

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

# acceptance criterion results, filled by tests/test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture
def grid32():
    return Grid2D(32, 32)


@pytest.fixture
def grid64():
    return Grid2D(64, 64)


@pytest.fixture
def default_coeffs():
    return Coefficients.default()


@pytest.fixture
def twist_flow_state(grid32):
    p, v = make_initial({"preset": "twist", "amplitude": 0.8, "mode": 1,
                         "velocity_amplitude": 1.0}, grid32)
    return SimState(0.0, p, v)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
