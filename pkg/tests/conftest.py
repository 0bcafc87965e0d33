import math

import pytest
from hypothesis import assume
from hypothesis import strategies as st

from plasma_riemann.core import RiemannData

EXAMPLE_1 = RiemannData(1.0, 0.0, 0.0, -1.0)
EXAMPLE_2 = RiemannData(1.0, 0.5, 1.0, 0.9)


@pytest.fixture
def example1():
    return EXAMPLE_1


@pytest.fixture
def example2():
    return EXAMPLE_2


_component = st.floats(-2.0, 2.0, allow_nan=False, allow_infinity=False)


@st.composite
def riemann_data(draw, min_jump=1e-3):
    """Admissible data ([E]0 <= 0) with jumps bounded away from zero."""
    v_minus = draw(_component)
    e_minus = draw(_component)
    dv = draw(st.floats(-2.0, 2.0).filter(lambda d: abs(d) >= min_jump))
    de = draw(st.floats(-2.0, -min_jump))
    return RiemannData(v_minus, v_minus + dv, e_minus, e_minus + de)


def wrap_angle(a):
    return math.remainder(a, 2 * math.pi)


@st.composite
def simple_wave_data(draw, min_gap=0.05):
    """Rarefaction data on a circle whose arc does not cross E = 0."""
    c = draw(st.floats(0.2, 2.0))
    if draw(st.booleans()):
        # upper half plane: right angle beyond the mirror of the left one
        phi_m = draw(st.floats(-1.5, 1.4))
        lo, hi = abs(phi_m) + min_gap, math.pi / 2
    else:
        # lower half plane, traversed with decreasing angle
        phi_m = draw(st.floats(math.pi / 2 + 0.1, 1.5 * math.pi))
        lo = max(math.pi / 2, 2 * math.pi - phi_m + min_gap) if phi_m > math.pi else math.pi / 2
        hi = phi_m - min_gap
    assume(lo < hi)
    phi_p = draw(st.floats(lo, hi))
    data = RiemannData(c * math.sin(phi_m), c * math.sin(phi_p), c * math.cos(phi_m), c * math.cos(phi_p))
    assume(data.jump_v > 1e-3 and data.jump_e < -1e-3)
    return data


# one line per acceptance criterion, echoed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[key])
