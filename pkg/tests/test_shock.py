import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad as sp_quad
from scipy.integrate import solve_ivp

from conftest import EXAMPLE_1, EXAMPLE_2, riemann_data
from plasma_riemann.core import RiemannData, critical_times, side_state
from plasma_riemann.errors import AmplitudeVanished, EntropyViolation, OutOfRange, WindowTooSmall, ZeroSpeed
from plasma_riemann.numerics import ToleranceConfig
from plasma_riemann.shock import (
    Q_rhs,
    amplitude,
    balance_report,
    classical_rh_position,
    classical_rh_speed,
    integrate_shock,
    jump_v3,
    q_rhs,
    rh_residuals,
    sample_derivative,
    windowed_fluxes,
)

T0_EXAMPLE_2 = 0.69174927


def _direct_v3(data, t):
    return side_state(data, "+", t).v ** 3 - side_state(data, "-", t).v ** 3


def _oracle_q_curve(data, t_to, rtol=1e-12):
    """Independent squared-speed integration with scipy (side states cubed directly)."""
    times = critical_times(data)
    u = times.u_star
    k = times.k_const

    def rhs(t, y):
        left, right = side_state(data, "-", t), side_state(data, "+", t)
        e = -(data.jump_v * math.sin(t) + data.jump_e * math.cos(t))
        e_dot = -(right.v - left.v)
        v3 = right.v**3 - left.v**3
        return [(-v3 + math.copysign(1.0, u) * k * math.sqrt(max(y[0], 0.0)) - e_dot * y[0]) / e]

    def hit(t, y):
        return y[0]

    hit.terminal = True
    return solve_ivp(rhs, (times.t_star_half, t_to), [u * u], method="DOP853", rtol=rtol, atol=1e-14, events=hit)


# ------------------------------------------------------------------ amplitude


def test_amplitude_examples():
    assert amplitude(EXAMPLE_1, 0.0) == 1.0
    assert amplitude(EXAMPLE_2, 0.0) == pytest.approx(0.1, abs=1e-12)
    assert amplitude(EXAMPLE_1, math.pi / 4) == pytest.approx(math.sqrt(2), abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(riemann_data(), st.floats(0.0, 2 * math.pi))
def test_amplitude_is_minus_e_jump(data, t):
    e_jump = side_state(data, "+", t).e - side_state(data, "-", t).e
    assert amplitude(data, t) == pytest.approx(-e_jump, abs=1e-12)


# ------------------------------------------------------------------ [V^3]


def test_jump_v3_matches_direct_cubes():
    rng = np.random.default_rng(7)
    for _ in range(200):
        vm, em = rng.uniform(-2, 2, 2)
        data = RiemannData(vm, vm + rng.uniform(-2, 2), em, em - rng.uniform(0.01, 2))
        t = rng.uniform(0, 2 * math.pi)
        assert jump_v3(data, t) == pytest.approx(_direct_v3(data, t), abs=1e-12)


def test_jump_v3_at_start():
    assert jump_v3(EXAMPLE_2, 0.0) == pytest.approx(0.5**3 - 1.0, abs=1e-15)


@pytest.mark.parametrize("data", [EXAMPLE_1, EXAMPLE_2])
def test_jump_v3_vanishes_only_at_t_star(data):
    times = critical_times(data)
    assert jump_v3(data, times.t_star_half) == pytest.approx(0.0, abs=1e-14)
    ts = np.linspace(0, times.t_star_total, 4001)[1:-1]
    vals = jump_v3(data, ts)
    sign_changes = ts[1:][np.sign(vals[1:]) != np.sign(vals[:-1])]
    assert sign_changes.size == 1
    assert abs(sign_changes[0] - times.t_star_half) < 2 * (ts[1] - ts[0])


def test_jump_v3_differs_from_swapped_coefficients():
    # the coefficients of cos t and cos^2 t sin t use [E^2 V] and [E V^2], not the reverse
    data = EXAMPLE_2
    vm, vp, em, ep = data.as_tuple()
    e2v = ep * ep * vp - em * em * vm
    ev2 = ep * vp * vp - em * vm * vm
    de, dv = data.jump_e, data.jump_v
    t = 0.4
    c, s = math.cos(t), math.sin(t)
    swapped = (de**3 - 3 * ev2) * c * c * s + (dv**3 - 3 * e2v) * c**3 + 3 * ev2 * c - de**3 * s
    assert abs(swapped - _direct_v3(data, t)) > 1e-3
    assert jump_v3(data, t) == pytest.approx(_direct_v3(data, t), abs=1e-14)


# ------------------------------------------------------------------ speed ODEs


def test_chain_rule_consistency():
    rng = np.random.default_rng(3)
    done = 0
    while done < 100:
        vm, em = rng.uniform(-2, 2, 2)
        data = RiemannData(vm, vm - rng.uniform(0.01, 2), em, em - rng.uniform(0.01, 2))
        t = rng.uniform(0, critical_times(data).t_star_total)
        if amplitude(data, t) <= 1e-3:
            continue
        q = rng.uniform(-2, 2)
        lhs = 2 * q * q_rhs(data, t, q)
        assert lhs == pytest.approx(Q_rhs(data, t, q * q, math.copysign(1.0, q)), rel=1e-10, abs=1e-10)
        done += 1


def test_q_rhs_at_t_star_example2():
    times = critical_times(EXAMPLE_2)
    t, u = times.t_star_half, times.u_star
    e = amplitude(EXAMPLE_2, t)
    e_dot = -(side_state(EXAMPLE_2, "+", t).v - side_state(EXAMPLE_2, "-", t).v)
    expected = (times.k_const * u - e_dot * u * u) / (2 * e * u)
    assert q_rhs(EXAMPLE_2, t, u) == pytest.approx(expected, rel=1e-12)


def test_zero_speed_slope():
    t = 0.3
    slope = Q_rhs(EXAMPLE_2, t, 0.0, 1.0)
    assert slope == pytest.approx(-_direct_v3(EXAMPLE_2, t) / amplitude(EXAMPLE_2, t), rel=1e-12)
    assert slope != 0.0
    with pytest.raises(ZeroSpeed):
        q_rhs(EXAMPLE_2, t, 0.0)


def test_general_density_reduces_to_unit_background():
    t, q = 1.0, -0.3
    assert q_rhs(EXAMPLE_2, t, q, n_hat=(1.0, 1.0)) == pytest.approx(q_rhs(EXAMPLE_2, t, q), rel=1e-13)


def test_vanishing_amplitude_rejected():
    with pytest.raises(AmplitudeVanished):
        integrate_shock(RiemannData(0.0, -1.0, 0.0, 0.0))


# ------------------------------------------------------------------ classical comparator


@pytest.mark.parametrize("data", [EXAMPLE_1, EXAMPLE_2])
def test_classical_position_hits_meeting_point(data):
    big_t = critical_times(data).t_star_total
    assert classical_rh_position(data, big_t) == pytest.approx(side_state(data, "-", big_t).x, abs=1e-14)


def test_classical_position_is_integral_of_speed():
    for t in (0.3, 1.1, 2.5):
        value, _ = sp_quad(lambda s: classical_rh_speed(EXAMPLE_2, s), 0.0, t, epsabs=1e-13)
        assert classical_rh_position(EXAMPLE_2, t) == pytest.approx(EXAMPLE_2.x0 + value, abs=1e-12)


def test_classical_speed_values():
    assert classical_rh_speed(EXAMPLE_1, math.pi / 4) == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    assert classical_rh_speed(EXAMPLE_2, 0.0) == pytest.approx(0.75)


# ------------------------------------------------------------------ integration


@pytest.fixture(scope="module")
def curve1():
    return integrate_shock(EXAMPLE_1)


@pytest.fixture(scope="module")
def curve2():
    return integrate_shock(EXAMPLE_2)


def test_example1_curve_complete(curve1):
    assert curve1.complete and curve1.t_zero is None and curve1.anchor == "start"
    assert curve1.phi[0] == EXAMPLE_1.x0
    assert np.all(curve1.e > 0) and np.all(curve1.Q >= 0)
    assert curve1.speed(math.pi / 4) == pytest.approx(critical_times(EXAMPLE_1).u_star, abs=1e-12)


def test_example1_position_close_to_classical(curve1):
    gap = np.max(np.abs(curve1.phi - classical_rh_position(EXAMPLE_1, curve1.t)))
    assert gap <= 0.02
    assert abs(curve1.endpoint_residual) <= 0.02


@pytest.mark.xfail(strict=True, reason="singular speed departs from the classical one by about 0.058")
def test_example1_speed_close_to_classical(curve1):
    gap = np.max(np.abs(curve1.q - classical_rh_speed(EXAMPLE_1, curve1.t)))
    assert gap <= 0.02


def test_example1_matches_scipy_oracle(curve1):
    sol = _oracle_q_curve(EXAMPLE_1, 0.0)
    q_oracle = np.sqrt(sol.y[0, -1])
    assert curve1.q[0] == pytest.approx(q_oracle, abs=1e-8)


def test_example2_zero_time(curve2):
    assert curve2.t_zero == pytest.approx(T0_EXAMPLE_2, abs=1e-4)
    sol = _oracle_q_curve(EXAMPLE_2, 0.0)
    assert curve2.t_zero == pytest.approx(sol.t_events[0][0], abs=1e-9)


def test_example2_zero_time_self_converges():
    values = [integrate_shock(EXAMPLE_2, ToleranceConfig().with_ode(r)).t_zero for r in (1e-6, 1e-8, 1e-10, 1e-12)]
    diffs = [abs(v - values[-1]) for v in values[:-1]]
    assert diffs[0] >= diffs[1] >= diffs[2]
    assert diffs[2] < 1e-9


def test_example2_stops_at_zero(curve2):
    big_t = critical_times(EXAMPLE_2).t_star_total
    assert curve2.covered == (pytest.approx(curve2.t_zero), big_t)
    assert curve2.far_side == "stopped" and curve2.anchor == "end" and not curve2.complete
    assert curve2.endpoint_residual is None
    assert curve2.phi[-1] == pytest.approx(side_state(EXAMPLE_2, "-", big_t).x, abs=1e-14)
    assert curve2.restart_slope == pytest.approx(-_direct_v3(EXAMPLE_2, curve2.t_zero) / amplitude(EXAMPLE_2, curve2.t_zero))
    with pytest.raises(OutOfRange):
        curve2.state(0.5 * curve2.t_zero)


def test_example2_entropy_on_covered_side(curve2):
    assert np.min(curve2.entropy_margin()) >= -1e-7
    assert np.all(curve2.e > 0)


def test_example2_reflect_branch_violates_entropy():
    curve = integrate_shock(EXAMPLE_2, far_side="reflect")
    assert curve.covered == (0.0, critical_times(EXAMPLE_2).t_star_total)
    assert curve.far_side == "reflected"
    assert np.min(curve.entropy_margin()) < -1e-3
    with pytest.raises(EntropyViolation):
        integrate_shock(EXAMPLE_2, far_side="reflect", strict_entropy=True)


def test_bad_far_side_policy():
    with pytest.raises(ValueError):
        integrate_shock(EXAMPLE_2, far_side="bounce")


def test_square_root_behaviour_on_covered_side(curve2):
    t0 = curve2.t_zero
    ts = t0 + np.linspace(1e-4, 1e-2, 40)
    ratio = np.array([abs(curve2.speed(t)) / math.sqrt(t - t0) for t in ts])
    c = math.sqrt(abs(curve2.restart_slope))
    assert np.all((ratio > 0.1 * c) & (ratio < 10 * c))
    assert ratio[0] == pytest.approx(c, rel=0.1)


def test_degenerate_start_flagged():
    # U = 0: t* = pi/4 and V-(t*) = (V-0 - E-0) / sqrt(2) = 0
    data = RiemannData(1.0, 0.0, 1.0, 0.0)
    assert critical_times(data).u_star == pytest.approx(0.0, abs=1e-15)
    curve = integrate_shock(data)
    assert curve.degenerate_start


@settings(max_examples=15, deadline=None)
@given(riemann_data(min_jump=0.05))
def test_random_shock_invariants(data):
    if data.jump_v > 0:
        data = RiemannData(data.v_plus, data.v_minus, data.e_minus, data.e_plus)
    curve = integrate_shock(data)
    assert np.all(curve.e > 0) and np.all(curve.Q >= 0)
    assert curve.covers(critical_times(data).t_star_half)
    if curve.crossings:
        # a speed zero ends the curve; the cone need not contain 0 there
        assert curve.far_side == "stopped" and not curve.complete
        assert min(abs(curve.q[0]), abs(curve.q[-1])) < 1e-6
    else:
        assert curve.complete
        assert np.min(curve.entropy_margin()) >= -1e-7


# ------------------------------------------------------------------ residuals and balance


def test_sample_derivative_polynomial():
    t = np.sort(np.random.default_rng(1).uniform(0, 1, 30))
    f = t**4 - 2 * t
    assert np.allclose(sample_derivative(t, f), 4 * t**3 - 2, atol=1e-10)


@pytest.mark.parametrize("data", [EXAMPLE_1, EXAMPLE_2])
def test_rh_residuals(data):
    res = rh_residuals(integrate_shock(data))
    assert res.r1_max <= 1e-10
    assert res.r2_max_away <= 1e-6


def test_rh_residuals_grow_with_loose_tolerance():
    res = rh_residuals(integrate_shock(EXAMPLE_1, ToleranceConfig().with_ode(1e-3, 1e-3), samples_per_phase=8))
    assert res.r2_max_away > 1e-6


def test_balance_example1(curve1):
    report = balance_report(curve1, (-3, 3), np.linspace(0, math.pi / 2, 40))
    assert report.max_mass_residual <= 1e-8
    assert report.max_energy_residual <= 1e-8
    assert np.allclose(report.m, amplitude(EXAMPLE_1, report.t))


def test_balance_example2(curve2):
    lo, hi = curve2.covered
    report = balance_report(curve2, (-4, 4), np.linspace(lo, hi, 200))
    assert report.max_mass_residual <= 1e-8
    assert report.max_energy_residual <= 1e-5


def test_balance_window_errors(curve1):
    with pytest.raises(WindowTooSmall):
        balance_report(curve1, (2.0, 3.0), [0.1])
    with pytest.raises(WindowTooSmall):
        balance_report(curve1, (1.0, 1.0), [0.1])


def test_windowed_fluxes_against_scipy():
    fm, fe = windowed_fluxes(EXAMPLE_2, 0.2, 1.7)
    vm = lambda s: side_state(EXAMPLE_2, "-", s).v
    vp = lambda s: side_state(EXAMPLE_2, "+", s).v
    assert fm == pytest.approx(sp_quad(lambda s: vm(s) - vp(s), 0.2, 1.7)[0], abs=1e-12)
    assert fe == pytest.approx(sp_quad(lambda s: 0.5 * (vm(s) ** 3 - vp(s) ** 3), 0.2, 1.7)[0], abs=1e-12)
