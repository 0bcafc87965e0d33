"""Riemann data, closed-form side states, critical times and the phase plan.

Away from the jump the solution is constant in x and rotates in time; in the
local clock of a phase (t = 0 at the phase start)

    V(t) = -E0 sin t + V0 cos t,   E(t) = V0 sin t + E0 cos t,
    x(t) = x0 + V0 sin t + E0 (cos t - 1).

The two side characteristics from the jump meet again at T* with

    x+(T) - x-(T) = 2 sin(T/2) ([V]0 cos(T/2) - [E]0 sin(T/2)),

so tan(T*/2) = [V]0/[E]0. At T* the jumps become (-[V]0, [E]0): a rarefaction
is followed by a shock and vice versa, and the two durations add up to 2 pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence, Union

import numpy as np

from .errors import DegenerateData, InternalInconsistency, OutsidePhase, PositivityViolation
from .numerics import find_root

TWO_PI = 2.0 * math.pi
_CROSS_CHECK_TOL = 1e-8


class PhaseKind(str, Enum):
    RAREFACTION = "rarefaction"
    SHOCK = "shock"


@dataclass(frozen=True)
class RiemannData:
    """Piecewise-constant data: (v_minus, e_minus) left of x0, (v_plus, e_plus) right.

    ``t0`` is the absolute time at which this data is posed; all operations on
    the data use the local clock ``t - t0``.
    """

    v_minus: float
    v_plus: float
    e_minus: float
    e_plus: float
    x0: float = 0.0
    t0: float = 0.0

    def __post_init__(self):
        for name in ("v_minus", "v_plus", "e_minus", "e_plus", "x0", "t0"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def from_sequence(cls, values: Sequence[float], x0: float = 0.0, t0: float = 0.0) -> "RiemannData":
        """Build from ``(v_minus, v_plus, e_minus, e_plus)``."""
        if len(values) != 4:
            raise DegenerateData(f"expected 4 values (v-, v+, e-, e+), got {len(values)}")
        return cls(*values, x0=x0, t0=t0)

    @classmethod
    def parse(cls, text: str) -> "RiemannData":
        """Parse ``"v-,v+,e-,e+"`` (commas or whitespace)."""
        parts = text.replace(",", " ").split()
        try:
            values = [float(p) for p in parts]
        except ValueError as exc:
            raise DegenerateData(f"cannot parse Riemann data {text!r}") from exc
        return cls.from_sequence(values)

    @property
    def jump_v(self) -> float:
        return self.v_plus - self.v_minus

    @property
    def jump_e(self) -> float:
        return self.e_plus - self.e_minus

    @property
    def amplitude_minus(self) -> float:
        return math.hypot(self.v_minus, self.e_minus)

    @property
    def amplitude_plus(self) -> float:
        return math.hypot(self.v_plus, self.e_plus)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.v_minus, self.v_plus, self.e_minus, self.e_plus)


def validate(data: RiemannData, slack: float = 0.0) -> RiemannData:
    """Check finiteness, [E]0 <= slack and that some jump is nonzero."""
    values = (*data.as_tuple(), data.x0, data.t0)
    if not all(math.isfinite(v) for v in values):
        raise DegenerateData(f"non-finite Riemann data {values}")
    if data.jump_e > slack:
        raise PositivityViolation(
            f"[E]0 = {data.jump_e!r} > 0 gives a negative initial density 1 - [E]0 delta(x)"
        )
    if data.jump_v == 0.0 and data.jump_e == 0.0:
        raise DegenerateData("both jumps vanish; there is no Riemann problem")
    return data


@dataclass(frozen=True)
class SideState:
    t: Union[float, np.ndarray]
    v: Union[float, np.ndarray]
    e: Union[float, np.ndarray]
    x: Union[float, np.ndarray]


def _rotate(v0, e0, x0, t):
    s, c = np.sin(t), np.cos(t)
    return -e0 * s + v0 * c, v0 * s + e0 * c, x0 + v0 * s + e0 * (c - 1.0)


def side_state(data: RiemannData, side: str, t) -> SideState:
    """State carried by the left (``"-"``) or right (``"+"``) characteristic at local time t."""
    if side in ("-", "left", "minus"):
        v0, e0 = data.v_minus, data.e_minus
    elif side in ("+", "right", "plus"):
        v0, e0 = data.v_plus, data.e_plus
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    v, e, x = _rotate(v0, e0, data.x0, t)
    if np.ndim(t) == 0:
        v, e, x = float(v), float(e), float(x)
    return SideState(t=t, v=v, e=e, x=x)


def jumps(data: RiemannData, t):
    """([V](t), [E](t)) in local time."""
    s, c = np.sin(t), np.cos(t)
    return -data.jump_e * s + data.jump_v * c, data.jump_v * s + data.jump_e * c


def fan_width(data: RiemannData, t):
    """x+(t) - x-(t) = [V]0 sin t + [E]0 (cos t - 1)."""
    return data.jump_v * np.sin(t) + data.jump_e * (np.cos(t) - 1.0)


@dataclass(frozen=True)
class CriticalTimes:
    """Phase duration T*, equal-velocity time t* = T*/2, common speed U, K = [V^2 + E^2].

    ``u_star`` is the common velocity V-(t*) = V+(t*). For data with [V]0 <= 0 it
    coincides with :attr:`u_formula`; for rarefaction data the quotient differs
    in sign.
    """

    t_star_total: float
    t_star_half: float
    u_star: float
    k_const: float
    u_formula: float


def t_star_total(data: RiemannData) -> float:
    """T* = 2 (arctan([V]0/[E]0) mod pi), taken in (0, 2 pi]."""
    half = math.atan2(data.jump_v, data.jump_e) % math.pi
    if half == 0.0:
        half = math.pi
    return 2.0 * half


def critical_times(data: RiemannData) -> CriticalTimes:
    """Critical times and constants, cross-checked against a bracketing root."""
    dv, de = data.jump_v, data.jump_e
    big_t = t_star_total(data)
    if dv != 0.0:
        # reduced closing function: x+ - x- = 2 sin(t/2) g(t)
        def g(t):
            return dv * math.cos(0.5 * t) - de * math.sin(0.5 * t)

        root = find_root(g, (0.0, TWO_PI), tol=0.0)
        if abs(root - big_t) > _CROSS_CHECK_TOL:
            raise InternalInconsistency(f"closed-form T* = {big_t!r} but bracketed root = {root!r}")
    half = 0.5 * big_t
    u = float(_rotate(data.v_minus, data.e_minus, 0.0, half)[0])
    k = (data.v_plus**2 + data.e_plus**2) - (data.v_minus**2 + data.e_minus**2)
    norm = math.hypot(dv, de)
    u_formula = (data.e_minus * data.v_plus - data.e_plus * data.v_minus) / norm
    return CriticalTimes(t_star_total=big_t, t_star_half=half, u_star=u, k_const=k, u_formula=u_formula)


def classify_first_phase(data: RiemannData) -> PhaseKind:
    """Rarefaction iff [V]0 > 0, or [V]0 = 0 with [E]0 < 0; otherwise shock."""
    if data.jump_v > 0.0 or (data.jump_v == 0.0 and data.jump_e < 0.0):
        return PhaseKind.RAREFACTION
    return PhaseKind.SHOCK


def next_phase_data(data: RiemannData, times: CriticalTimes | None = None) -> RiemannData:
    """Side states at T*, posed at the merged point with the clock advanced by T*."""
    times = times or critical_times(data)
    big_t = times.t_star_total
    vm, em, xm = _rotate(data.v_minus, data.e_minus, data.x0, big_t)
    vp, ep, xp = _rotate(data.v_plus, data.e_plus, data.x0, big_t)
    scale = max(1.0, data.amplitude_minus, data.amplitude_plus)
    if abs(xp - xm) > 1e-9 * scale:
        raise InternalInconsistency(f"characteristics do not meet at T*: x+ - x- = {xp - xm!r}")
    new = RiemannData(
        v_minus=vm,
        v_plus=vp,
        e_minus=em,
        e_plus=ep,
        x0=0.5 * (xm + xp),
        t0=data.t0 + big_t,
    )
    return validate(new, slack=1e-12 * scale)


@dataclass(frozen=True)
class Phase:
    kind: PhaseKind
    t_start: float
    t_end: float
    data: RiemannData

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class PhasePlan:
    """Alternating phases covering one period ``[t_start, t_start + 2 pi]``."""

    phases: tuple[Phase, ...]
    period: float = TWO_PI

    @property
    def t_start(self) -> float:
        return self.phases[0].t_start

    def reduce(self, t: float) -> float:
        """Map absolute time into ``[t_start, t_start + period)``."""
        return self.t_start + (t - self.t_start) % self.period

    def locate(self, t: float) -> tuple[int, float]:
        """(phase index, local phase time) for absolute time ``t``."""
        if not math.isfinite(t):
            raise OutsidePhase(f"time {t!r} is not finite")
        tau = self.reduce(t)
        for i, ph in enumerate(self.phases):
            if tau < ph.t_end or i == len(self.phases) - 1:
                return i, tau - ph.t_start
        raise OutsidePhase(f"time {t!r} not covered")  # pragma: no cover


def assemble_period(data: RiemannData) -> PhasePlan:
    """Phase schedule for one period starting at ``data.t0``."""
    times = critical_times(data)
    first_kind = classify_first_phase(data)
    t0 = data.t0
    if times.t_star_total >= TWO_PI:
        return PhasePlan((Phase(first_kind, t0, t0 + TWO_PI, data),))
    second = next_phase_data(data, times)
    second_times = critical_times(second)
    total = times.t_star_total + second_times.t_star_total
    if abs(total - TWO_PI) > 1e-10:
        raise InternalInconsistency(f"phase durations add up to {total!r}, not 2 pi")
    second_kind = classify_first_phase(second)
    if second_kind == first_kind:
        raise InternalInconsistency("consecutive phases have the same kind")
    t_mid = t0 + times.t_star_total
    return PhasePlan(
        (
            Phase(first_kind, t0, t_mid, data),
            Phase(second_kind, t_mid, t0 + TWO_PI, replace(second, t0=t_mid)),
        )
    )
