import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import simple_wave_data
from plasma_riemann.core import RiemannData, fan_width, jumps, side_state
from plasma_riemann.errors import (
    AmplitudeExceeded,
    BadSeedPoint,
    FoldedFan,
    NonMonotone,
    NotSimpleWave,
    OutOfRange,
    OutsidePhase,
)
from plasma_riemann.rarefaction import (
    energy_gap,
    hybrid_construct,
    invert_profile,
    linear_energy_minimum,
    linear_eval,
    linear_fan,
    local_energy,
    simple_wave_energy_closed_form,
    simple_wave_eval,
    simple_wave_fan,
    simple_wave_position,
    total_energy,
)

UPPER = RiemannData(math.sin(-0.3), math.sin(0.9), math.cos(-0.3), math.cos(0.9))
LOWER = RiemannData(math.sin(4.0), math.sin(3.3), math.cos(4.0), math.cos(3.3))
ANTIPODAL = RiemannData(-0.6, 0.6, 0.8, -0.8)


def pde_residuals(profile, t, xs, h):
    def field(tt, xx):
        v, e, _ = profile.evaluate(tt, xx)
        return np.asarray(v), np.asarray(e)

    v, e = field(t, xs)
    vp, ep = field(t + h, xs)
    vm, em = field(t - h, xs)
    vr, er = field(t, xs + h)
    vl, el = field(t, xs - h)
    r1 = (vp - vm) / (2 * h) + v * (vr - vl) / (2 * h) + e
    r2 = (ep - em) / (2 * h) + v * (er - el) / (2 * h) - v
    return max(np.max(np.abs(r1)), np.max(np.abs(r2)))


def interior(profile, t, n=9, margin=0.05):
    xm, xp = profile.support(t)
    w = xp - xm
    return np.linspace(xm + margin * w, xp - margin * w, n)


# ------------------------------------------------------------------- linear fan


def test_linear_coefficients_example():
    fan = linear_fan(RiemannData(0, 1, 0, -1))
    a, b, c, d = fan.coefficients(math.pi / 2)
    assert (a, b, c, d) == pytest.approx((0.5, 0.0, 0.5, 0.0), abs=1e-15)
    v, e, n = linear_eval(fan, math.pi / 2, 1.0)
    assert (v, e, n) == pytest.approx((0.5, 0.5, 0.5))


def test_pure_velocity_jump():
    fan = linear_fan(RiemannData(0, 1, 0, 0))
    t = 0.7
    xs = interior(fan, t)
    v, e, n = fan.evaluate(t, xs)
    assert np.allclose(v, xs / math.tan(t), atol=1e-14)
    assert np.allclose(e, xs, atol=1e-14)
    assert np.allclose(n, 0.0, atol=1e-14)
    assert pde_residuals(fan, t, xs, 1e-4) < 1e-7


def test_alternative_sign_breaks_continuity():
    data = RiemannData(0.3, 1.1, 0.2, -0.5)
    fan = linear_fan(data)
    t = 1.1
    left, right = side_state(data, "-", t), side_state(data, "+", t)
    a, b, _, _ = fan.coefficients(t)
    assert a * left.x + b == pytest.approx(left.v, abs=1e-14)
    assert a * right.x + b == pytest.approx(right.v, abs=1e-14)
    # slope with the denominator x- - x+ misses the right state
    dv, _ = jumps(data, t)
    a_alt = dv / (left.x - right.x)
    assert abs(a_alt * (right.x - left.x) + left.v - right.v) > 0.1


def test_linear_fan_shrinks_to_jump():
    data = RiemannData(0, 1, 0, -1)
    fan = linear_fan(data)
    xm, xp = fan.support(1e-8)
    assert xp - xm < 1e-7
    assert fan.evaluate(1e-8, -1.0)[0] == pytest.approx(0.0, abs=1e-7)
    assert fan.evaluate(1e-8, 1.0)[0] == pytest.approx(1.0, abs=1e-7)


def test_linear_outside_phase():
    fan = linear_fan(RiemannData(0, 1, 0, -1))
    for t in (0.0, -0.1, fan.t_star, 5.0):
        with pytest.raises(OutsidePhase):
            fan.evaluate(t, 0.0)


@given(st.floats(-2, 2), st.floats(0.05, 2), st.floats(-2, 2), st.floats(-2, -0.05), st.floats(0.05, 0.95))
@settings(max_examples=60, deadline=None)
def test_linear_fan_properties(vm, dv, em, de, frac):
    data = RiemannData(vm, vm + dv, em, em + de)
    fan = linear_fan(data)
    t = frac * fan.t_star
    left, right = side_state(data, "-", t), side_state(data, "+", t)
    a, b, c, d = fan.coefficients(t)
    assert a * left.x + b == pytest.approx(left.v, abs=1e-9)
    assert c * right.x + d == pytest.approx(right.e, abs=1e-9)
    # fan density carries the initial mass deficit
    assert 1 - c == pytest.approx(-de / float(fan_width(data, t)), rel=1e-9)
    assert 1 - c >= 0


def test_linear_fan_second_order_residual():
    fan = linear_fan(UPPER)
    t = 1.2
    xs = interior(fan, t)
    r_h = pde_residuals(fan, t, xs, 1e-3)
    r_h2 = pde_residuals(fan, t, xs, 5e-4)
    assert 3.5 <= r_h / r_h2 <= 4.5


# ----------------------------------------------------------------- simple wave


def test_position_examples():
    assert simple_wave_position(1.3, 1, 0.0, 0.4) == pytest.approx(0.0, abs=1e-15)
    assert simple_wave_position(1.3, 2, 0.0, -0.9) == pytest.approx(0.0, abs=1e-15)
    assert simple_wave_position(1.3, 1, math.pi / 2, 0.0) == pytest.approx(1.3)
    for t, v in [(0.3, 0.2), (1.7, -0.8), (2.9, 1.1)]:
        assert simple_wave_position(1.3, 2, t, v) == pytest.approx(-simple_wave_position(1.3, 1, t, -v), abs=1e-14)


def test_position_amplitude_exceeded():
    with pytest.raises(AmplitudeExceeded):
        simple_wave_position(1.0, 1, 0.5, 1.01)


def test_invert_round_trip():
    fan = simple_wave_fan(UPPER)
    rng = np.random.default_rng(7)
    c = fan.amplitude
    for _ in range(100):
        t = rng.uniform(0.05, 2 * math.pi - 0.05)
        branch = int(rng.integers(1, 3))
        crit = math.pi / 2 - t / 2 if branch == 1 else t / 2 - math.pi / 2
        q = rng.uniform(-math.pi / 2, math.pi / 2)
        bounds = (-math.pi / 2, crit) if q < crit else (crit, math.pi / 2)
        v = c * math.sin(q)
        x = fan.parent.x0 + simple_wave_position(c, branch, t, v)
        assert invert_profile(fan, branch, t, x, bounds) == pytest.approx(v, abs=1e-10)


def test_invert_examples():
    fan = simple_wave_fan(UPPER)
    c = fan.amplitude
    bounds = (-math.pi / 2, math.pi / 4)
    assert invert_profile(fan, 1, math.pi / 2, c, bounds) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(OutOfRange):
        invert_profile(fan, 1, math.pi / 2, 1.5 * c, bounds)
    with pytest.raises(NonMonotone):
        invert_profile(fan, 1, math.pi / 2, 0.5, (-math.pi / 2, math.pi / 2))


def test_invert_inside_fan_matches_eval():
    fan = simple_wave_fan(UPPER)
    t = 0.8
    xs = interior(fan, t)
    v, _, _ = fan.evaluate(t, xs)
    assert np.allclose(invert_profile(fan, 1, t, xs), v, atol=1e-12)


@pytest.mark.parametrize("data", [UPPER, LOWER], ids=["upper", "lower"])
def test_simple_wave_properties(data):
    fan = simple_wave_fan(data)
    assert 0 < fan.t_fold < fan.t_star
    c2 = fan.amplitude**2
    for t in np.linspace(0.02, fan.t_fold - 0.02, 50):
        xm, xp = fan.support(t)
        xs = np.linspace(xm, xp, 41)[1:-1]
        v, e, _ = simple_wave_eval(fan, t, xs)
        assert np.max(np.abs(v * v + e * e - c2)) <= 1e-10
        left, right = side_state(data, "-", t), side_state(data, "+", t)
        eps = 1e-9 * max(1.0, xp - xm)
        vl, el, _ = fan.evaluate(t, xm + eps)
        vr, er, _ = fan.evaluate(t, xp - eps)
        assert (vl, el) == pytest.approx((left.v, left.e), abs=1e-7)
        assert (vr, er) == pytest.approx((right.v, right.e), abs=1e-7)


def test_switch_times_order():
    up = simple_wave_fan(UPPER)
    t1, t0, t2 = up.switch_times
    assert t1 < t0 < t2
    assert t0 == pytest.approx(0.5 * up.t_star)
    assert side_state(UPPER, "-", t1).e == pytest.approx(0.0, abs=1e-12)
    assert side_state(UPPER, "+", t2).e == pytest.approx(0.0, abs=1e-12)
    low = simple_wave_fan(LOWER)
    t1, t0, t2 = low.switch_times
    assert t2 < t0 < t1


def test_left_edge_on_second_branch_after_t1():
    fan = simple_wave_fan(UPPER)
    t1, t0, _ = fan.switch_times
    for t in np.linspace(t1 + 1e-3, min(t0, fan.t_fold) - 1e-3, 10):
        left = side_state(UPPER, "-", t)
        assert left.e < 0
        assert fan.pieces(t)[0].branch == 2
        assert left.x == pytest.approx(simple_wave_position(fan.amplitude, 2, t, left.v), abs=1e-12)


def test_antipodal_arc_folds_immediately():
    fan = simple_wave_fan(ANTIPODAL)
    assert fan.t_fold == 0.0
    with pytest.raises(FoldedFan):
        fan.evaluate(0.1, 0.0)
    assert energy_gap(ANTIPODAL) == pytest.approx(1.6 / 12 * (2.56 + 1.44), abs=1e-14)


def test_not_simple_wave():
    with pytest.raises(NotSimpleWave):
        simple_wave_fan(RiemannData(0, 1, 0, -1))
    with pytest.raises(NotSimpleWave):
        energy_gap(RiemannData(0, 1, 0, -1))
    assert energy_gap(RiemannData(-0.6, 0.6, 0.8, 0.8)) == 0.0


def test_simple_wave_second_order_residual():
    fan = simple_wave_fan(UPPER)
    for t in (0.6, 1.6):
        xs = interior(fan, t)
        r_h = pde_residuals(fan, t, xs, 1e-3)
        r_h2 = pde_residuals(fan, t, xs, 5e-4)
        assert 3.5 <= r_h / r_h2 <= 4.5


# ----------------------------------------------------------------------- energy


@given(simple_wave_data(), st.floats(0.1, 0.9))
@settings(max_examples=40, deadline=None)
def test_energy_identities(data, frac):
    fan = simple_wave_fan(data)
    lin = linear_fan(data)
    t = frac * fan.t_fold
    xm, xp = fan.support(t)
    window = (xm - 0.5, xp + 0.5)
    e2 = total_energy(fan, t, window)
    e1 = total_energy(lin, t, window)
    outside = 0.5 * (data.amplitude_minus**2 * 0.5 + data.amplitude_plus**2 * 0.5)
    assert e2 - outside == pytest.approx(simple_wave_energy_closed_form(fan, t), abs=1e-8)
    assert e2 - e1 == pytest.approx(energy_gap(data), abs=1e-8)
    assert e1 <= e2 + 1e-12


def test_energy_zero_window_and_bad_window():
    fan = simple_wave_fan(UPPER)
    assert total_energy(fan, 0.5, (0.3, 0.3)) == 0.0
    with pytest.raises(OutOfRange):
        total_energy(fan, 0.5, (0.0, 0.01))


def test_local_energy():
    fan = simple_wave_fan(UPPER)
    lin = linear_fan(UPPER)
    t = 1.0
    xs = interior(fan, t, n=21)
    c2 = fan.amplitude**2
    assert np.allclose(local_energy(fan, t, xs), c2, atol=1e-12)
    assert np.all(local_energy(lin, t, xs) <= c2 + 1e-12)
    xm, xp = lin.support(t)
    assert local_energy(lin, t, xm) == pytest.approx(c2)
    assert local_energy(lin, t, xp) == pytest.approx(c2)
    x_min, e_min = linear_energy_minimum(lin, t)
    assert xm < x_min < xp and e_min < c2
    grid = np.linspace(xm, xp, 2001)
    assert e_min <= np.min(local_energy(lin, t, grid)) + 1e-12


# ----------------------------------------------------------------------- hybrid


def _seed(fan, t1, frac):
    xm, xp = fan.support(t1)
    return xm + frac * (xp - xm)


def test_hybrid_bad_seed():
    fan = simple_wave_fan(UPPER)
    xm, xp = fan.support(0.5)
    with pytest.raises(BadSeedPoint):
        hybrid_construct(fan, 0.5, xm)
    with pytest.raises(BadSeedPoint):
        hybrid_construct(fan, fan.t_fold + 0.1, 0.0)


def test_hybrid_continuity_and_energy():
    fan = simple_wave_fan(UPPER)
    lin = linear_fan(UPPER)
    hyb = hybrid_construct(fan, 0.5, _seed(fan, 0.5, 0.75))
    assert hyb.t_valid > fan.t_fold
    for t in np.linspace(0.55, hyb.t_valid - 0.05, 20):
        xr = hyb.right_endpoint(t)
        assert xr == pytest.approx(hyb.right_endpoint_exact(t), abs=1e-7)
        lo = np.array(hyb.evaluate(t, xr - 1e-10)[:2])
        hi = np.array(hyb.evaluate(t, xr + 1e-10)[:2])
        assert np.max(np.abs(lo - hi)) < 1e-6
    t = 1.5
    xm, xp = fan.support(t)
    window = (xm - 0.1, xp + 0.1)
    e_lin, e_hyb, e_sw = (total_energy(p, t, window) for p in (lin, hyb, fan))
    assert abs(e_hyb - e_lin) > 1e-6 and abs(e_hyb - e_sw) > 1e-6
    assert e_lin < min(e_hyb, e_sw)


def test_hybrid_degenerate_seed_matches_simple_wave():
    fan = simple_wave_fan(UPPER)
    hyb = hybrid_construct(fan, 0.5, _seed(fan, 0.5, 1e-9))
    t = 1.0
    xs = interior(fan, t)
    assert np.allclose(hyb.evaluate(t, xs)[0], fan.evaluate(t, xs)[0], atol=1e-6)
    assert hyb.evaluate(0.3, 0.0) == fan.evaluate(0.3, 0.0)


def test_fold_time_tolerates_rounded_axis_state():
    # right state one rounding error below E = 0 still ends an upper arc
    data = RiemannData(6.123233995736766e-17, 1.0, 1.0, -6.123233995736766e-17)
    fan = simple_wave_fan(data)
    assert fan.sigma == 1
    assert fan.t_fold == pytest.approx(math.pi, abs=1e-12)
