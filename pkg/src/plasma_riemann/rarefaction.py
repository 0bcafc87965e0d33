"""Rarefaction fans: linear profile, simple wave and hybrid members.

All three are families of characteristics leaving the jump point. Along a
characteristic (V, E) rotates rigidly, and x moves by the closed forms of
:mod:`plasma_riemann.core`, so each fan is an exact solution wherever it is
single valued.

Linear fan
    V = a x + b, E = c x + d between x-(t) and x+(t); n = 1 - c = -[E]0/dx >= 0.
Simple wave
    initial states on an arc of the circle V^2 + E^2 = C^2 joining the two side
    states. Writing V0 = C sin(phi), E0 = C cos(phi), the characteristic with
    label phi sits at x0 + C (cos(phi - t) - cos(phi)) with current angle
    psi = phi - t. With q = arcsin(V/C) this is X1(t, V) = C(cos q - cos(q+t))
    where E > 0 and X2(t, V) = C(cos(q-t) - cos q) where E < 0. The family stays
    ordered only until ``t_fold``; past it characteristics cross and the fan is
    not single valued.
Hybrid
    a simple wave in which the sub-arc between the left state and the
    characteristic through a seed point (t1, x1) is replaced by a linear segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import RiemannData, critical_times, fan_width, jumps, side_state, t_star_total
from .errors import (
    AmplitudeExceeded,
    BadSeedPoint,
    FoldedFan,
    NonMonotone,
    NotSimpleWave,
    OutOfRange,
    OutsidePhase,
)
from .numerics import OdeSolution, ToleranceConfig, find_root, integrate, quad

HALF_PI = 0.5 * math.pi


def _as_array(x):
    return np.asarray(x, dtype=float), np.ndim(x) == 0


def _unwrap(values, scalar):
    if scalar:
        return tuple(float(np.asarray(v).reshape(-1)[0]) for v in values)
    return values


def _check_phase_time(t: float, t_end: float):
    if not (0.0 < t < t_end):
        raise OutsidePhase(f"t = {t!r} is outside the open phase interval (0, {t_end!r})")


def _outside(data: RiemannData, t: float, x: np.ndarray):
    """Side-state fields (n = 1) and the fan edges at time t."""
    left, right = side_state(data, "-", t), side_state(data, "+", t)
    v = np.where(x <= left.x, left.v, right.v)
    e = np.where(x <= left.x, left.e, right.e)
    return v, e, np.ones_like(x), left, right


# --------------------------------------------------------------------------- linear


@dataclass(frozen=True)
class LinearFan:
    """Profile linear in x between the side characteristics."""

    parent: RiemannData
    t_star: float

    @property
    def t_valid(self) -> float:
        return self.t_star

    def coefficients(self, t: float) -> tuple[float, float, float, float]:
        """(a, b, c, d) with V = a x + b and E = c x + d inside the fan (absolute x)."""
        _check_phase_time(t, self.t_star)
        left = side_state(self.parent, "-", t)
        dv, de = jumps(self.parent, t)
        width = float(fan_width(self.parent, t))
        a = float(dv) / width
        c = float(de) / width
        return a, left.v - a * left.x, c, left.e - c * left.x

    def support(self, t: float) -> tuple[float, float]:
        return side_state(self.parent, "-", t).x, side_state(self.parent, "+", t).x

    def breakpoints(self, t: float) -> tuple[float, ...]:
        return self.support(t)

    def evaluate(self, t: float, x):
        """(V, E, n_hat) at time t; side states with n_hat = 1 outside the fan."""
        xs, scalar = _as_array(x)
        a, b, c, d = self.coefficients(t)
        v, e, n, left, right = _outside(self.parent, t, xs)
        inside = (xs > left.x) & (xs < right.x)
        v = np.where(inside, a * xs + b, v)
        e = np.where(inside, c * xs + d, e)
        n = np.where(inside, 1.0 - c, n)
        return _unwrap((v, e, n), scalar)


def linear_fan(data: RiemannData) -> LinearFan:
    return LinearFan(parent=data, t_star=critical_times(data).t_star_total)


def linear_eval(fan: LinearFan, t: float, x):
    return fan.evaluate(t, x)


def linear_energy_minimum(fan: LinearFan, t: float) -> tuple[float, float]:
    """Minimiser and minimum of V^2 + E^2 for the affine profile at time t.

    The returned point may lie outside the fan; callers compare it with the
    support themselves.
    """
    a, b, c, d = fan.coefficients(t)
    x_min = -(a * b + c * d) / (a * a + c * c)
    return x_min, (a * x_min + b) ** 2 + (c * x_min + d) ** 2


# --------------------------------------------------------------------- simple wave


def simple_wave_position(amplitude: float, branch: int, t, v):
    """X1 (branch 1, E > 0) or X2 (branch 2, E < 0): offset of the characteristic
    carrying velocity ``v`` at time ``t`` from the jump point."""
    q = _q_of_v(amplitude, v)
    return _x_of_q(amplitude, branch, t, q)


def _q_of_v(amplitude, v):
    ratio = np.asarray(v, dtype=float) / amplitude
    if np.any(np.abs(ratio) > 1.0 + 1e-12):
        raise AmplitudeExceeded(f"|V| exceeds the amplitude {amplitude!r}")
    return np.arcsin(np.clip(ratio, -1.0, 1.0))


def _x_of_q(c, branch, t, q):
    if branch == 1:
        return c * (np.cos(q) - np.cos(q + t))
    if branch == 2:
        return c * (np.cos(q - t) - np.cos(q))
    raise ValueError(f"branch must be 1 or 2, got {branch!r}")


def _dx_dq(c, branch, t, q):
    if branch == 1:
        return c * (np.sin(q + t) - np.sin(q))
    return c * (np.sin(q) - np.sin(q - t))


def _e_x(branch, t, q):
    """dE/dx at the point with parameter q (implicit differentiation)."""
    if branch == 1:
        return -np.sin(q) / (np.sin(q + t) - np.sin(q))
    return np.sin(q) / (np.sin(q) - np.sin(q - t))


def _monotone(branch: int, t: float, qa: float, qb: float) -> bool:
    # dX/dq = 2C sin(t/2) cos(q +- t/2) has a single zero on [-pi/2, pi/2]
    crit = HALF_PI - 0.5 * t if branch == 1 else 0.5 * t - HALF_PI
    lo, hi = min(qa, qb), max(qa, qb)
    return not (lo < crit < hi)


def _invert_q(c, branch, t, xrel, qa, qb, max_iter=100):
    """Vectorised bracketing Newton for X_branch(t, q) = xrel on [qa, qb]."""
    xa = _x_of_q(c, branch, t, qa)
    xb = _x_of_q(c, branch, t, qb)
    rising = xb >= xa
    lo = np.full_like(xrel, qa)
    hi = np.full_like(xrel, qb)
    span = hi - lo
    q = lo + span * np.clip((xrel - xa) / (xb - xa) if xb != xa else 0.5, 0.0, 1.0)
    scale = 1e-15 * max(1.0, c)
    for _ in range(max_iter):
        f = _x_of_q(c, branch, t, q) - xrel
        if np.all(np.abs(f) <= scale):
            break
        # move the bracket end that has the same sign as f
        above = (f > 0) == rising
        hi = np.where(above, q, hi)
        lo = np.where(above, lo, q)
        d = _dx_dq(c, branch, t, q)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = q - f / d
        inside = np.isfinite(newton) & ((newton - lo) * (newton - hi) < 0)
        q = np.where(inside, newton, 0.5 * (lo + hi))
        if np.all(np.abs(hi - lo) <= 4e-16 * np.maximum(1.0, np.abs(q))):
            break
    return q


@dataclass(frozen=True)
class _Piece:
    branch: int
    q_a: float
    q_b: float
    x_a: float
    x_b: float


@dataclass(frozen=True)
class SimpleWaveFan:
    """Simple-wave fan for data with both sides on the circle V^2 + E^2 = C^2.

    ``phi_minus``/``phi_plus`` are the initial polar angles (V = C sin, E = C cos)
    of the arc traversed left to right. ``sigma`` is +1 when the arc lies in the
    half plane E >= 0 and -1 when it lies in E <= 0. ``t_fold`` is the time at
    which neighbouring characteristics first cross; it is 0 when no monotone arc
    joins the two states.
    """

    parent: RiemannData
    amplitude: float
    sigma: int
    phi_minus: float
    phi_plus: float
    t_star: float
    t_fold: float
    switch_times: tuple[Optional[float], float, Optional[float]] = field(default=(None, 0.0, None))

    @property
    def q_minus(self) -> float:
        return math.asin(max(-1.0, min(1.0, self.parent.v_minus / self.amplitude)))

    @property
    def q_plus(self) -> float:
        return math.asin(max(-1.0, min(1.0, self.parent.v_plus / self.amplitude)))

    @property
    def t_valid(self) -> float:
        return self.t_fold

    def position(self, phi, t):
        """Absolute position of the characteristic with initial angle ``phi``."""
        c = self.amplitude
        return self.parent.x0 + c * (np.cos(phi - t) - np.cos(phi))

    def support(self, t: float) -> tuple[float, float]:
        return side_state(self.parent, "-", t).x, side_state(self.parent, "+", t).x

    def breakpoints(self, t: float) -> tuple[float, ...]:
        pieces = self.pieces(t)
        inner = tuple(self.parent.x0 + p.x_b for p in pieces[:-1])
        return (*self.support(t), *inner)

    def pieces(self, t: float) -> tuple[_Piece, ...]:
        """Branch pieces of the fan at time t, ordered left to right.

        The fan splits where E changes sign inside it (current angle psi at
        pi/2 + k pi).
        """
        psi_a, psi_b = self.phi_minus - t, self.phi_plus - t
        lo, hi = min(psi_a, psi_b), max(psi_a, psi_b)
        p = HALF_PI + math.pi * math.ceil((lo - HALF_PI) / math.pi)
        cuts = [psi_a, psi_b]
        if lo < p < hi:
            cuts = [psi_a, p, psi_b]
        out = []
        c = self.amplitude
        for pa, pb in zip(cuts[:-1], cuts[1:]):
            branch = 1 if math.cos(0.5 * (pa + pb)) >= 0 else 2
            qa, qb = self._q_of_psi(branch, pa), self._q_of_psi(branch, pb)
            out.append(_Piece(branch, qa, qb, float(_x_of_q(c, branch, t, qa)), float(_x_of_q(c, branch, t, qb))))
        return tuple(out)

    @staticmethod
    def _q_of_psi(branch: int, psi: float) -> float:
        q = math.remainder(psi if branch == 1 else math.pi - psi, 2 * math.pi)
        return max(-HALF_PI, min(HALF_PI, q))

    def _check_time(self, t: float):
        _check_phase_time(t, self.t_star)
        if t >= self.t_fold:
            raise FoldedFan(
                f"simple-wave characteristics have crossed by t = {t!r} (fold at {self.t_fold!r})"
            )

    def evaluate(self, t: float, x):
        """(V, E, n_hat); side states with n_hat = 1 outside the fan."""
        self._check_time(t)
        xs, scalar = _as_array(x)
        v, e, n, left, right = _outside(self.parent, t, xs)
        inside = (xs > left.x) & (xs < right.x)
        if np.any(inside):
            xrel = xs - self.parent.x0
            todo = inside.copy()
            c = self.amplitude
            pieces = self.pieces(t)
            for k, piece in enumerate(pieces):
                # partition by the right end of each piece so rounding leaves no gaps
                mask = todo.copy() if k == len(pieces) - 1 else todo & (xrel <= max(piece.x_a, piece.x_b))
                if not np.any(mask):
                    continue
                todo &= ~mask
                q = _invert_q(c, piece.branch, t, xrel[mask], piece.q_a, piece.q_b)
                sign = 1.0 if piece.branch == 1 else -1.0
                v[mask] = c * np.sin(q)
                e[mask] = sign * c * np.cos(q)
                n[mask] = 1.0 - _e_x(piece.branch, t, q)
        return _unwrap((v, e, n), scalar)


def _arc_fold_time(lo: float, hi: float, t_star: float) -> float:
    """Fold time of the characteristics with labels in [lo, hi].

    Their order is kept while cos(phi - t/2) has one sign on the arc, so the fan
    is ordered at 0+ iff no pi/2 + k pi lies in [lo, hi), and it folds when
    lo - t/2 reaches the next such point below lo.
    """
    eps = 1e-12
    k_first = math.ceil((lo - HALF_PI - eps) / math.pi)
    p = HALF_PI + math.pi * k_first
    # an end within rounding of the E = 0 axis does not put the axis inside the arc
    if p < hi - eps or abs(p - lo) <= eps:
        return 0.0
    p_below = p - math.pi
    return min(t_star, 2.0 * (lo - p_below))


def _zero_e_time(v0: float, e0: float, t_star: float) -> Optional[float]:
    """First root of E(t) = v0 sin t + e0 cos t in (0, t_star), cross-checked."""
    if v0 == 0.0 and e0 == 0.0:
        return None
    base = math.atan2(-e0, v0) % math.pi
    if base == 0.0:
        base = math.pi
    if base >= t_star:
        return None
    root = find_root(
        lambda t: v0 * math.sin(t) + e0 * math.cos(t),
        (base - HALF_PI, base + HALF_PI),
        tol=0.0,
    )
    if abs(root - base) > 1e-8:
        raise NonMonotone(f"E-zero time mismatch: {base!r} vs {root!r}")
    return base


def _arc_angles(c: float, data: RiemannData, upper: bool) -> tuple[float, float]:
    phi_m = math.atan2(data.v_minus, data.e_minus)
    phi_p = math.atan2(data.v_plus, data.e_plus)
    if not upper:
        phi_m %= 2 * math.pi
        phi_p %= 2 * math.pi
        # lower arc lives in [pi/2, 3 pi/2]
        phi_m = phi_m if phi_m >= HALF_PI - 1e-15 else phi_m + 2 * math.pi
        phi_p = phi_p if phi_p >= HALF_PI - 1e-15 else phi_p + 2 * math.pi
    return phi_m, phi_p


def _build_simple(data: RiemannData, c: float, phi_m: float, phi_p: float, sigma: int, t_star: float):
    lo, hi = min(phi_m, phi_p), max(phi_m, phi_p)
    t_fold = _arc_fold_time(lo, hi, t_star)
    switch = (
        _zero_e_time(data.v_minus, data.e_minus, t_star),
        0.5 * t_star,
        _zero_e_time(data.v_plus, data.e_plus, t_star),
    )
    return SimpleWaveFan(
        parent=data,
        amplitude=c,
        sigma=sigma,
        phi_minus=phi_m,
        phi_plus=phi_p,
        t_star=t_star,
        t_fold=t_fold,
        switch_times=switch,
    )


def simple_wave_fan(data: RiemannData, atol: float = 1e-10) -> SimpleWaveFan:
    """Simple-wave fan for rarefaction data with equal side amplitudes.

    The arc is taken in the half plane of E containing both side states; when
    the states lie on opposite sides of E = 0 the fan has ``t_fold = 0``.
    """
    c_minus, c_plus = data.amplitude_minus, data.amplitude_plus
    if abs(c_minus - c_plus) > atol:
        raise NotSimpleWave(f"side amplitudes differ: {c_minus!r} vs {c_plus!r}")
    c = 0.5 * (c_minus + c_plus)
    if c == 0.0:
        raise NotSimpleWave("zero amplitude")
    t_star = t_star_total(data)
    candidates = []
    # states within rounding of E = 0 belong to both half planes
    e_tol = atol * c
    if data.e_minus >= -e_tol and data.e_plus >= -e_tol:
        candidates.append((1, *_arc_angles(c, data, upper=True)))
    if data.e_minus <= e_tol and data.e_plus <= e_tol:
        candidates.append((-1, *_arc_angles(c, data, upper=False)))
    if not candidates:
        # no monotone arc: pick the arc through V = +-C along the E-sign of the left state
        sigma = 1 if data.e_minus >= 0 else -1
        candidates.append((sigma, *_arc_angles(c, data, upper=sigma > 0)))
    fans = [_build_simple(data, c, pm, pp, sigma, t_star) for sigma, pm, pp in candidates]
    return max(fans, key=lambda f: f.t_fold)


def invert_profile(fan: SimpleWaveFan, branch: int, t: float, x, q_bounds: Optional[tuple[float, float]] = None):
    """Velocity V with X_branch(t, V) = x - x0 on a monotone q interval.

    ``q_bounds`` defaults to the interval occupied by ``branch`` inside the fan
    at time t.
    """
    xs, scalar = _as_array(x)
    c = fan.amplitude
    if q_bounds is None:
        pieces = [p for p in fan.pieces(t) if p.branch == branch]
        if not pieces:
            raise OutOfRange(f"branch {branch} is not present in the fan at t = {t!r}")
        qa, qb = pieces[0].q_a, pieces[0].q_b
    else:
        qa, qb = (float(q) for q in q_bounds)
    if not _monotone(branch, t, qa, qb):
        raise NonMonotone(f"X{branch}(t, .) is not monotone on [{qa}, {qb}] at t = {t!r}")
    xrel = xs - fan.parent.x0
    xa, xb = float(_x_of_q(c, branch, t, qa)), float(_x_of_q(c, branch, t, qb))
    slack = 1e-12 * max(1.0, c)
    if np.any(xrel < min(xa, xb) - slack) or np.any(xrel > max(xa, xb) + slack):
        raise OutOfRange(f"x outside the image [{min(xa, xb)}, {max(xa, xb)}] of X{branch}")
    q = _invert_q(c, branch, t, np.atleast_1d(xrel).astype(float), qa, qb)
    v = c * np.sin(q)
    return float(v[0]) if scalar else v.reshape(xs.shape)


def simple_wave_eval(fan: SimpleWaveFan, t: float, x):
    return fan.evaluate(t, x)


# -------------------------------------------------------------------------- hybrid


@dataclass(frozen=True)
class HybridFan:
    """Simple wave whose left sub-arc is replaced by a linear segment from ``t1``.

    ``path`` is the segment's right end, integrated from ``(t1, x1)`` along
    dx/dt = V of the simple wave; it is the characteristic with label ``phi1``.
    """

    base: SimpleWaveFan
    t1: float
    x1: float
    phi1: float
    remainder: SimpleWaveFan
    path: OdeSolution
    t_valid: float

    @property
    def parent(self) -> RiemannData:
        return self.base.parent

    @property
    def t_star(self) -> float:
        return self.base.t_star

    def right_endpoint(self, t: float) -> float:
        if t < self.t1:
            raise OutOfRange(f"segment not yet formed at t = {t!r}")
        return float(self.path(t)[0])

    def right_endpoint_exact(self, t: float) -> float:
        return float(self.base.position(self.phi1, t))

    def support(self, t: float) -> tuple[float, float]:
        return self.base.support(t)

    def breakpoints(self, t: float) -> tuple[float, ...]:
        if t < self.t1:
            return self.base.breakpoints(t)
        left = side_state(self.parent, "-", t).x
        return (left, self.right_endpoint(t), *self.remainder.breakpoints(t))

    def evaluate(self, t: float, x):
        if t < self.t1:
            return self.base.evaluate(t, x)
        _check_phase_time(t, self.t_star)
        if t > self.path.t_max:
            raise FoldedFan(f"hybrid fan is valid only up to t = {self.path.t_max!r}")
        xs, scalar = _as_array(x)
        xr = self.right_endpoint(t)
        left = side_state(self.parent, "-", t)
        v, e, n = (np.asarray(a, dtype=float).copy() for a in self.remainder.evaluate(t, xs))
        v = np.where(xs <= left.x, left.v, v)
        e = np.where(xs <= left.x, left.e, e)
        n = np.where(xs <= left.x, 1.0, n)
        seg = (xs > left.x) & (xs < xr)
        if np.any(seg):
            vr, er, _ = self.remainder.evaluate(t, xr)
            width = xr - left.x
            a = (vr - left.v) / width
            c = (er - left.e) / width
            v = np.where(seg, left.v + a * (xs - left.x), v)
            e = np.where(seg, left.e + c * (xs - left.x), e)
            n = np.where(seg, 1.0 - c, n)
        return _unwrap((v, e, n), scalar)


def hybrid_construct(fan: SimpleWaveFan, t1: float, x1: float, tol: Optional[ToleranceConfig] = None) -> HybridFan:
    """Replace the simple wave on (x-(t1), x1) by a linear segment for t >= t1."""
    tol = tol or ToleranceConfig()
    if not (0.0 < t1 < fan.t_fold):
        raise BadSeedPoint(f"t1 = {t1!r} must lie in (0, {fan.t_fold!r})")
    xm, xp = fan.support(t1)
    if not (xm < x1 < xp):
        raise BadSeedPoint(f"x1 = {x1!r} is not inside the fan ({xm!r}, {xp!r})")

    # label of the characteristic through the seed point
    phi1 = find_root(
        lambda phi: float(fan.position(phi, t1)) - x1,
        (min(fan.phi_minus, fan.phi_plus), max(fan.phi_minus, fan.phi_plus)),
        tol=0.0,
        fprime=lambda phi: fan.amplitude * (math.sin(phi) - math.sin(phi - t1)),
    )
    c = fan.amplitude
    data = fan.parent
    sub = RiemannData(c * math.sin(phi1), data.v_plus, c * math.cos(phi1), data.e_plus, x0=data.x0, t0=data.t0)
    remainder = _build_simple(sub, c, phi1, fan.phi_plus, fan.sigma, t_star_total(sub))
    chord = RiemannData(data.v_minus, c * math.sin(phi1), data.e_minus, c * math.cos(phi1), x0=data.x0)
    t_valid = min(fan.t_star, remainder.t_fold, t_star_total(chord))
    t_end = t1 + (t_valid - t1) * (1 - 1e-6)

    def rhs(t, y):
        return [remainder.evaluate(t, y[0])[0]]

    path = integrate(rhs, (t1, t_end), [x1], tol=tol, first_step=(t_end - t1) / 1000)
    return HybridFan(
        base=fan, t1=t1, x1=x1, phi1=phi1, remainder=remainder, path=path, t_valid=t_valid
    )


# -------------------------------------------------------------------------- energy


def total_energy(profile, t: float, window: Sequence[float], tol: float = 1e-10) -> float:
    """1/2 * integral of (n_hat V^2 + E^2) over the window."""
    xl, xr = float(window[0]), float(window[1])
    if xr < xl:
        raise OutOfRange(f"window ({xl}, {xr}) is reversed")
    if xr == xl:
        return 0.0
    support = profile.support(t)
    if xl > min(support) + 1e-14 or xr < max(support) - 1e-14:
        raise OutOfRange(f"window ({xl}, {xr}) does not contain the fan {support}")

    def density(x):
        v, e, n = profile.evaluate(t, x)
        return 0.5 * (n * v * v + e * e)

    return quad(density, xl, xr, tol=tol, breakpoints=profile.breakpoints(t), vectorized=True)


def simple_wave_energy_closed_form(fan: SimpleWaveFan, t: float) -> float:
    """Energy inside the simple-wave fan: 1/2 (C^2 dx - C^2 [E] + [E^3]/3)."""
    left, right = side_state(fan.parent, "-", t), side_state(fan.parent, "+", t)
    c2 = fan.amplitude**2
    return 0.5 * (c2 * (right.x - left.x) - c2 * (right.e - left.e) + (right.e**3 - left.e**3) / 3.0)


def energy_gap(data: RiemannData, atol: float = 1e-10) -> float:
    """Energy of the simple wave minus that of the linear fan (time independent)."""
    if abs(data.amplitude_minus - data.amplitude_plus) > atol:
        raise NotSimpleWave(
            f"side amplitudes differ: {data.amplitude_minus!r} vs {data.amplitude_plus!r}"
        )
    de, dv = data.jump_e, data.jump_v
    return -de * (de * de + dv * dv) / 12.0


def local_energy(profile, t: float, x):
    v, e, _ = profile.evaluate(t, x)
    return v * v + e * e
