"""Shared numerical kernels.

* :func:`integrate` -- Runge-Kutta-Fehlberg 4(5) with adaptive steps, cubic
  Hermite dense output and event location; runs forward or backward in time.
* :func:`find_root` -- bracketing bisection with Newton (or secant) polish.
* :func:`quad` -- adaptive Simpson quadrature with explicit breakpoints.

Everything here is stateless; all results are returned as new objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    MaxStepsExceeded,
    NoBracket,
    OutOfRange,
    QuadratureFailure,
    StepFailure,
)


@dataclass(frozen=True)
class ToleranceConfig:
    """Tolerances shared by the integrator, root finder and quadrature."""

    ode_rel: float = 1e-10
    ode_abs: float = 1e-12
    root_tol: float = 1e-12
    quad_tol: float = 1e-10
    max_steps: int = 200_000

    def __post_init__(self):
        for name in ("ode_rel", "ode_abs", "root_tol", "quad_tol"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if int(self.max_steps) < 1:
            raise ValueError("max_steps must be >= 1")

    def with_ode(self, rel: float, abs_: Optional[float] = None) -> "ToleranceConfig":
        """Copy with a different ODE tolerance (absolute defaults to rel/100)."""
        return ToleranceConfig(
            ode_rel=rel,
            ode_abs=rel / 100 if abs_ is None else abs_,
            root_tol=self.root_tol,
            quad_tol=self.quad_tol,
            max_steps=self.max_steps,
        )


# Fehlberg's 4(5) tableau.
_C = (0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2)
_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_B4 = np.array([25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0])
_B5 = np.array([16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55])
_BERR = _B5 - _B4


def _rkf_stages(rhs, t, y, f0, h):
    k = np.empty((6, y.size))
    k[0] = f0
    for i in range(1, 6):
        yi = y + h * (np.asarray(_A[i]) @ k[:i])
        k[i] = rhs(t + _C[i] * h, yi)
    return k


def rkf45_step(rhs, t: float, y: np.ndarray, h: float, f0: Optional[np.ndarray] = None):
    """One Fehlberg step. Returns ``(y5, err)`` with ``err = y5 - y4``."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if f0 is None:
        f0 = np.atleast_1d(np.asarray(rhs(t, y), dtype=float))
    k = _rkf_stages(rhs, t, y, f0, h)
    return y + h * (_B5 @ k), h * (_BERR @ k)


def rkf45_fixed(rhs, t_span: tuple[float, float], y0, n_steps: int, order: int = 5) -> np.ndarray:
    """Integrate with ``n_steps`` equal steps and no error control (order studies).

    ``order`` selects which embedded solution is propagated (4 or 5).
    """
    if order not in (4, 5):
        raise ValueError("order must be 4 or 5")
    t0, t1 = t_span
    h = (t1 - t0) / n_steps
    y = np.atleast_1d(np.asarray(y0, dtype=float))
    wrapped = _wrap(rhs)
    for i in range(n_steps):
        y5, err = rkf45_step(wrapped, t0 + i * h, y, h)
        y = y5 if order == 5 else y5 - err
    return y


@dataclass(frozen=True)
class Event:
    """Scalar event function ``g(t, y)`` watched for sign changes.

    ``direction`` is relative to the direction of integration: ``-1`` fires only
    when ``g`` goes from positive to negative as the integration proceeds.
    """

    func: Callable[[float, np.ndarray], float]
    terminal: bool = True
    direction: int = 0


@dataclass(frozen=True)
class EventHit:
    index: int
    t: float
    y: np.ndarray


@dataclass(frozen=True)
class OdeSolution:
    """Accepted nodes of an integration plus a cubic Hermite dense output.

    ``t`` is strictly monotone (decreasing for backward runs); ``error`` holds the
    scaled local error estimate of the step that produced each node (0 for the
    initial node).
    """

    t: np.ndarray
    y: np.ndarray
    f: np.ndarray
    error: np.ndarray
    events: tuple[EventHit, ...] = ()
    status: str = "completed"
    n_rhs: int = 0

    @property
    def t_min(self) -> float:
        return float(min(self.t[0], self.t[-1]))

    @property
    def t_max(self) -> float:
        return float(max(self.t[0], self.t[-1]))

    def __call__(self, t):
        """Dense output at ``t`` (scalar or array); shape ``(m,)`` or ``(len(t), m)``."""
        scalar = np.ndim(t) == 0
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        lo, hi = self.t_min, self.t_max
        span = hi - lo
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        if np.any(tt < lo - slack) or np.any(tt > hi + slack):
            raise OutOfRange(f"dense output requested outside [{lo}, {hi}]")
        if self.t.size == 1 or span == 0.0:
            out = np.repeat(self.y[:1], tt.size, axis=0)
            return out[0] if scalar else out
        if self.t[0] > self.t[-1]:
            ts, ys, fs = self.t[::-1], self.y[::-1], self.f[::-1]
        else:
            ts, ys, fs = self.t, self.y, self.f
        idx = np.clip(np.searchsorted(ts, tt, side="right") - 1, 0, ts.size - 2)
        out = _hermite(ts[idx], ts[idx + 1], ys[idx], ys[idx + 1], fs[idx], fs[idx + 1], tt)
        return out[0] if scalar else out


def _hermite(t0, t1, y0, y1, f0, f1, t):
    h = (t1 - t0)[:, None]
    s = ((t - t0) / (t1 - t0))[:, None]
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def _hermite_scalar(t0, t1, y0, y1, f0, f1, t):
    h = t1 - t0
    s = (t - t0) / h
    return (
        (1 + 2 * s) * (1 - s) ** 2 * y0
        + s * (1 - s) ** 2 * h * f0
        + s * s * (3 - 2 * s) * y1
        + s * s * (s - 1) * h * f1
    )


def _wrap(rhs):
    def wrapped(t, y):
        return np.atleast_1d(np.asarray(rhs(t, y), dtype=float))

    return wrapped


def integrate(
    rhs: Callable[[float, np.ndarray], Sequence[float]],
    t_span: tuple[float, float],
    y0,
    tol: Optional[ToleranceConfig] = None,
    events: Sequence[Event] = (),
    first_step: Optional[float] = None,
    max_step: float = math.inf,
    step_cap: Optional[Callable[[float, np.ndarray, np.ndarray], float]] = None,
) -> OdeSolution:
    """Adaptive RKF45 integration of ``y' = rhs(t, y)`` over ``t_span``.

    ``t_span`` may be decreasing. Steps are accepted when the max-norm of the
    embedded error, scaled by ``ode_abs + ode_rel * |y|``, is at most one. The
    5th-order solution is propagated (local extrapolation), so the estimate is
    conservative. ``step_cap(t, y, f)`` may return an upper
    bound on the next step size (used near square-root singularities).
    """
    tol = tol or ToleranceConfig()
    rhs = _wrap(rhs)
    t0, t1 = float(t_span[0]), float(t_span[1])
    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    f = rhs(t0, y)
    n_rhs = 1
    direction = 1.0 if t1 >= t0 else -1.0
    length = abs(t1 - t0)
    if length == 0.0:
        return OdeSolution(np.array([t0]), y[None, :], f[None, :], np.zeros(1), n_rhs=n_rhs)

    h = abs(first_step) if first_step else length / 1000
    ts, ys, fs, errs = [t0], [y], [f], [0.0]
    g_prev = [ev.func(t0, y) for ev in events]
    hits: list[EventHit] = []
    status = "completed"
    t = t0
    n_steps = 0
    while direction * (t1 - t) > 0:
        if n_steps >= tol.max_steps:
            raise MaxStepsExceeded(f"more than {tol.max_steps} steps between {t0} and {t1}")
        n_steps += 1
        remaining = abs(t1 - t)
        h = min(h, max_step)
        if step_cap is not None:
            h = min(h, step_cap(t, y, f))
        # absorb a sliver left by rounding instead of taking a tiny final step
        last = h >= remaining - 1e-10 * length
        h_min = 1e-14 * max(1.0, abs(t))
        if h < h_min and not last:
            raise StepFailure(f"step size underflow at t={t!r}")
        hs = direction * (remaining if last else h)
        k = _rkf_stages(rhs, t, y, f, hs)
        n_rhs += 5
        y_new = y + hs * (_B5 @ k)
        err_vec = hs * (_BERR @ k)
        scale = tol.ode_abs + tol.ode_rel * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.max(np.abs(err_vec) / scale)) if np.all(np.isfinite(y_new)) else math.inf
        if err > 1.0:
            h *= 0.25 if not math.isfinite(err) else max(0.1, 0.9 * err ** -0.25)
            continue
        t_new = t1 if last else t + hs
        f_new = rhs(t_new, y_new)
        n_rhs += 1

        fired = None
        for i, ev in enumerate(events):
            g_new = ev.func(t_new, y_new)
            crossed = (g_prev[i] > 0 >= g_new) or (g_prev[i] < 0 <= g_new)
            if crossed and ev.direction:
                rising = g_new > g_prev[i]
                crossed = (ev.direction > 0) == rising
            if crossed:
                t_ev, y_ev = _locate_event(ev, rhs, t, t_new, y, f, tol.root_tol)
                hits.append(EventHit(i, t_ev, y_ev))
                if ev.terminal and (fired is None or direction * (t_ev - fired[1]) < 0):
                    fired = (i, t_ev, y_ev)
            g_prev[i] = g_new

        if fired is not None:
            _, t_ev, y_ev = fired
            hits = [hit for hit in hits if direction * (hit.t - t_ev) <= 0]
            if t_ev != t:
                ts.append(t_ev)
                ys.append(y_ev)
                fs.append(rhs(t_ev, y_ev))
                errs.append(err)
                n_rhs += 1
            status = "event"
            break

        ts.append(t_new)
        ys.append(y_new)
        fs.append(f_new)
        errs.append(err)
        t, y, f = t_new, y_new, f_new
        h = abs(hs) * (5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2)))

    return OdeSolution(
        t=np.asarray(ts),
        y=np.vstack(ys),
        f=np.vstack(fs),
        error=np.asarray(errs),
        events=tuple(hits),
        status=status,
        n_rhs=n_rhs,
    )


def _locate_event(ev, rhs, ta, tb, ya, fa, root_tol):
    """Event time and state, using full RKF steps from the last accepted node."""

    def state(s):
        return ya if s == ta else rkf45_step(rhs, ta, ya, s - ta, fa)[0]

    lo, hi = (ta, tb) if ta < tb else (tb, ta)
    t_ev = find_root(lambda s: ev.func(s, state(s)), (lo, hi), tol=0.0,
                     xtol=max(root_tol, 1e-15 * max(1.0, abs(ta))))
    return t_ev, state(t_ev)


def find_root(
    f: Callable[[float], float],
    bracket: tuple[float, float],
    tol: float = 1e-12,
    fprime: Optional[Callable[[float], float]] = None,
    xtol: float = 0.0,
    maxiter: int = 300,
) -> float:
    """Root of ``f`` inside a sign-changing ``bracket``.

    Bisection keeps the bracket; each iterate is polished by a Newton step (when
    ``fprime`` is given) or a secant step, accepted only if it stays strictly
    inside the bracket. Stops when ``|f(x)| <= tol``, when the bracket is shorter
    than ``xtol``, or when it cannot shrink further in floating point.
    """
    a, b = float(bracket[0]), float(bracket[1])
    if a > b:
        a, b = b, a
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if not (math.isfinite(fa) and math.isfinite(fb)) or (fa > 0) == (fb > 0):
        raise NoBracket(f"f({a})={fa!r} and f({b})={fb!r} do not bracket a root")

    best_x, best_f = (a, fa) if abs(fa) < abs(fb) else (b, fb)
    x = 0.5 * (a + b)
    prev_width = b - a
    for _ in range(maxiter):
        fx = f(x)
        if abs(fx) < abs(best_f):
            best_x, best_f = x, fx
        if fx == 0.0 or abs(fx) <= tol:
            return x
        if (fx > 0) == (fa > 0):
            a, fa = x, fx
        else:
            b, fb = x, fx
        width = b - a
        if width <= max(xtol, 4 * np.finfo(float).eps * max(1.0, abs(a), abs(b))):
            return best_x
        candidate = math.nan
        if fprime is not None:
            d = fprime(x)
            if d != 0.0 and math.isfinite(d):
                candidate = x - fx / d
        elif fb != fa:
            candidate = b - fb * (b - a) / (fb - fa)
        mid = 0.5 * (a + b)
        # bisect whenever the last step failed to halve the bracket
        stalled = width > 0.5 * prev_width
        prev_width = width
        if not stalled and math.isfinite(candidate) and a < candidate < b:
            x = candidate
        else:
            x = mid
    return best_x


def quad(
    f: Callable,
    a: float,
    b: float,
    tol: float = 1e-10,
    breakpoints: Sequence[float] = (),
    max_depth: int = 48,
    min_panels: int = 4,
    vectorized: bool = False,
) -> float:
    """Adaptive Simpson quadrature of ``f`` over ``[a, b]``.

    The interval is first split at every breakpoint strictly inside it (kinks or
    jumps of the integrand; each piece is integrated with its one-sided end
    values), then into ``min_panels`` equal panels per piece. Panels are
    refined breadth-first until each Richardson error estimate meets its share of
    ``tol``. With ``vectorized=True`` ``f`` receives a 1-D array of abscissae.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -1.0

    if vectorized:
        def fv(x):
            return np.asarray(f(x), dtype=float).reshape(x.shape)
    else:
        def fv(x):
            return np.array([f(float(xi)) for xi in x], dtype=float)

    cuts = sorted({a, b, *(float(p) for p in breakpoints if a < p < b)})
    los, his, lo_evals, hi_evals = [], [], [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        edges = np.linspace(lo, hi, min_panels + 1)
        los.append(edges[:-1])
        his.append(edges[1:])
        # one-sided values at the piece ends: the integrand may jump there
        lo_eval, hi_eval = edges[:-1].copy(), edges[1:].copy()
        lo_eval[0] = np.nextafter(lo, hi)
        hi_eval[-1] = np.nextafter(hi, lo)
        lo_evals.append(lo_eval)
        hi_evals.append(hi_eval)
    lo = np.concatenate(los)
    hi = np.concatenate(his)
    mid = 0.5 * (lo + hi)
    values = fv(np.concatenate([np.concatenate(lo_evals), mid, np.concatenate(hi_evals)]))
    n = lo.size
    flo, fmid, fhi = values[:n], values[n : 2 * n], values[2 * n :]
    whole = (hi - lo) * (flo + 4 * fmid + fhi) / 6
    eps = tol * (hi - lo) / (b - a)

    total = 0.0
    for depth in range(max_depth + 1):
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        values = fv(np.concatenate([lm, rm]))
        flm, frm = values[: lo.size], values[lo.size :]
        left = (mid - lo) * (flo + 4 * flm + fmid) / 6
        right = (hi - mid) * (fmid + 4 * frm + fhi) / 6
        delta = left + right - whole
        done = (np.abs(delta) <= 15 * eps) | ((hi - lo) <= 1e-15 * np.maximum(1.0, np.abs(lo)))
        if not np.all(np.isfinite(delta)):
            raise QuadratureFailure(f"non-finite integrand on [{a}, {b}]")
        total += float(np.sum((left + right + delta / 15)[done]))
        todo = ~done
        if not np.any(todo):
            return sign * total
        if depth == max_depth:
            break
        lo, mid, hi = lo[todo], mid[todo], hi[todo]
        flo, fmid, fhi = flo[todo], fmid[todo], fhi[todo]
        flm, frm = flm[todo], frm[todo]
        left, right, eps = left[todo], right[todo], eps[todo]
        lo, mid, hi = np.concatenate([lo, mid]), np.concatenate([lm[todo], rm[todo]]), np.concatenate([mid, hi])
        flo, fmid, fhi = np.concatenate([flo, fmid]), np.concatenate([flm, frm]), np.concatenate([fmid, fhi])
        whole = np.concatenate([left, right])
        eps = np.concatenate([0.5 * eps, 0.5 * eps])
    raise QuadratureFailure(f"tolerance {tol} not met on [{a}, {b}] after {max_depth} bisections")
