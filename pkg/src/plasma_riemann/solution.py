"""Full-period assembly, pointwise sampling and the verification audits.

A period consists of one rarefaction phase and one shock phase (or a single
phase of length 2 pi when [V]0 = 0). Each phase is evaluated in its own local
clock; :class:`PeriodSolution` maps absolute times onto phases.

The audits are deliberately independent of the constructions: PDE residuals
come from finite differences of sampled fields, entropy from comparing the
integrated speed with closed-form side velocities, and conservation from
quadrature of densities against analytic boundary fluxes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .core import PhaseKind, PhasePlan, RiemannData, assemble_period, side_state, validate
from .errors import FoldedFan, NoAdmissibleContinuation, OutOfRange, WindowTooSmall
from .numerics import ToleranceConfig, quad
from .rarefaction import LinearFan, SimpleWaveFan, linear_fan, simple_wave_fan, total_energy
from .shock import BalanceReport, ShockCurve, amplitude, balance_report, integrate_shock, windowed_fluxes

VARIANTS = ("linear", "simple", "auto")
ENTROPY_THRESHOLD = -1e-7

Fan = Union[LinearFan, SimpleWaveFan]


@dataclass(frozen=True)
class Delta:
    position: float
    amplitude: float


@dataclass(frozen=True)
class SolutionSample:
    """Fields at one point; ``deltas`` lists the singular part of the density."""

    t: float
    x: float
    v: float
    e: float
    n_hat: float
    deltas: tuple[Delta, ...] = ()


@dataclass(frozen=True)
class PeriodSolution:
    """Phase plan with one payload per phase: a fan or a :class:`ShockCurve`."""

    data: RiemannData
    plan: PhasePlan
    payloads: tuple[Union[LinearFan, SimpleWaveFan, ShockCurve], ...]
    variant: str
    far_side: str = "stop"

    def locate(self, t: float):
        """(phase index, local time, phase, payload) for absolute time t."""
        idx, local = self.plan.locate(t)
        return idx, local, self.plan.phases[idx], self.payloads[idx]

    @property
    def shock_curves(self) -> tuple[ShockCurve, ...]:
        return tuple(p for p in self.payloads if isinstance(p, ShockCurve))

    @property
    def fans(self) -> tuple[Fan, ...]:
        return tuple(p for p in self.payloads if not isinstance(p, ShockCurve))

    def default_window(self, margin: float = 1.0) -> tuple[float, float]:
        """A window containing every fan and shock of the period."""
        reach = max(abs(self.data.v_minus) + 2 * abs(self.data.e_minus), abs(self.data.v_plus) + 2 * abs(self.data.e_plus))
        return self.data.x0 - reach - margin, self.data.x0 + reach + margin


def solve_period(
    data: RiemannData,
    variant: str = "auto",
    constrain_simple_wave: bool = False,
    tol: Optional[ToleranceConfig] = None,
    far_side: str = "stop",
    samples_per_phase: Optional[int] = None,
) -> PeriodSolution:
    """Assemble one oscillation period.

    ``auto`` picks the linear fan, which has the least energy among the
    rarefaction candidates, unless ``constrain_simple_wave`` demands a solution
    on the circle V^2 + E^2 = C^2. ``samples_per_phase`` caps the shock
    integrator's step at T*/samples_per_phase.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    validate(data)
    tol = tol or ToleranceConfig()
    chosen = variant
    if variant == "auto":
        chosen = "simple" if constrain_simple_wave else "linear"
    plan = assemble_period(data)
    payloads = []
    for phase in plan.phases:
        local = _local_data(phase.data)
        if phase.kind is PhaseKind.SHOCK:
            payloads.append(integrate_shock(local, tol=tol, far_side=far_side, samples_per_phase=samples_per_phase))
        elif chosen == "linear":
            payloads.append(linear_fan(local))
        else:
            payloads.append(simple_wave_fan(local))
    return PeriodSolution(data=data, plan=plan, payloads=tuple(payloads), variant=chosen, far_side=far_side)


def _local_data(data: RiemannData) -> RiemannData:
    # constructions use the phase clock starting at zero
    return RiemannData(*data.as_tuple(), x0=data.x0, t0=0.0)


# -------------------------------------------------------------------- sampling


def sample_fields(sol: PeriodSolution, t: float, xs):
    """Vectorised fields ``(v, e, n_hat, deltas)`` at absolute time t.

    Raises :class:`NoAdmissibleContinuation` on the part of a shock phase that
    the shock curve does not cover, and :class:`FoldedFan` past a simple-wave
    fold.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    _, local, phase, payload = sol.locate(t)
    data = payload.parent
    left, right = side_state(data, "-", local), side_state(data, "+", local)
    if local == 0.0:
        v = np.where(xs < data.x0, left.v, right.v)
        e = np.where(xs < data.x0, left.e, right.e)
        amp = -data.jump_e
        deltas = (Delta(data.x0, amp),) if amp > 0 else ()
        return v, e, np.ones_like(xs), deltas
    if isinstance(payload, ShockCurve):
        if not payload.covers(local):
            raise NoAdmissibleContinuation(
                f"no admissible shock at t = {t!r}: the curve covers local times {payload.covered}"
            )
        phi = payload.position(local)
        v = np.where(xs < phi, left.v, right.v)
        e = np.where(xs < phi, left.e, right.e)
        return v, e, np.ones_like(xs), (Delta(phi, float(amplitude(data, local))),)
    v, e, n = payload.evaluate(local, xs)
    return np.asarray(v, dtype=float), np.asarray(e, dtype=float), np.asarray(n, dtype=float), ()


def sample(sol: PeriodSolution, t: float, xs: Sequence[float]) -> list[SolutionSample]:
    """Pointwise samples at absolute time t."""
    v, e, n, deltas = sample_fields(sol, t, xs)
    return [
        SolutionSample(t=float(t), x=float(x), v=float(vi), e=float(ei), n_hat=float(ni), deltas=deltas)
        for x, vi, ei, ni in zip(np.atleast_1d(xs), v, e, n)
    ]


def kinks(sol: PeriodSolution, t: float) -> tuple[float, ...]:
    """Positions where the fields are not smooth at absolute time t."""
    _, local, _, payload = sol.locate(t)
    data = payload.parent
    if local == 0.0:
        return (data.x0,)
    if isinstance(payload, ShockCurve):
        if not payload.covers(local):
            raise NoAdmissibleContinuation(f"no admissible shock at t = {t!r}")
        return (payload.position(local),)
    return tuple(payload.support(local))


# -------------------------------------------------------------------- PDE audit


@dataclass(frozen=True)
class RegionResidual:
    n_points: int
    max_h: float
    max_half_h: float
    density_max: float

    @property
    def ratio(self) -> float:
        return self.max_h / self.max_half_h if self.max_half_h > 0 else math.inf


@dataclass(frozen=True)
class PdeAudit:
    """Central-difference residuals of V_t + V V_x + E and E_t + V E_x - V.

    ``regions`` maps "side" and "fan" to residuals at steps h and h/2 and to the
    largest deviation of n_hat from 1 - E_x. ``invariant`` is the largest
    |V^2 + E^2 - C^2| inside simple-wave fans (``None`` for other variants).
    """

    h: float
    regions: dict
    invariant: Optional[float]
    skipped: int

    def max_residual(self, region: str) -> float:
        r = self.regions.get(region)
        return r.max_h if r else 0.0


def _residuals(sol: PeriodSolution, t: float, x: np.ndarray, h: float):
    def fields(tt, xx):
        v, e, _, _ = sample_fields(sol, tt, xx)
        return v, e

    v, e = fields(t, x)
    v_tp, e_tp = fields(t + h, x)
    v_tm, e_tm = fields(t - h, x)
    v_xp, e_xp = fields(t, x + h)
    v_xm, e_xm = fields(t, x - h)
    v_t, e_t = (v_tp - v_tm) / (2 * h), (e_tp - e_tm) / (2 * h)
    v_x, e_x = (v_xp - v_xm) / (2 * h), (e_xp - e_xm) / (2 * h)
    r1 = v_t + v * v_x + e
    r2 = e_t + v * e_x - v
    return np.maximum(np.abs(r1), np.abs(r2)), e_x


def pde_residual_audit(
    sol: PeriodSolution,
    t_grid: Sequence[float],
    x_grid: Sequence[float],
    h: float = 1e-3,
) -> PdeAudit:
    """PDE residuals on smooth points of the grid, at steps h and h/2.

    A point is used when its finite-difference stencils stay at least 2h from
    every kink at the three stencil times and inside one phase.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    buckets: dict[str, list] = {"side": [], "fan": []}
    circle: list[float] = []
    skipped = 0
    for t in t_grid:
        idx, local, phase, payload = sol.locate(t)
        t_end = local_end = phase.duration
        if isinstance(payload, SimpleWaveFan):
            local_end = min(t_end, payload.t_fold)
        if isinstance(payload, ShockCurve):
            lo, hi = payload.covered
        else:
            lo, hi = 0.0, local_end
        if not (local - 2 * h > lo and local + 2 * h < hi):
            skipped += x_grid.size
            continue
        walls = [np.asarray(kinks(sol, t + s)) for s in (-2 * h, 0.0, 2 * h)]
        dist = np.min(np.abs(x_grid[:, None] - np.concatenate(walls)[None, :]), axis=1)
        ok = dist > 2.5 * h
        skipped += int(np.sum(~ok))
        if not np.any(ok):
            continue
        x = x_grid[ok]
        res_h, e_x = _residuals(sol, t, x, h)
        res_h2, _ = _residuals(sol, t, x, 0.5 * h)
        _, _, n_hat, _ = sample_fields(sol, t, x)
        density = np.abs(n_hat - (1.0 - e_x))
        if isinstance(payload, ShockCurve):
            inside = np.zeros(x.size, dtype=bool)
        else:
            xl, xr = payload.support(local)
            inside = (x > xl) & (x < xr)
        for region, mask in (("side", ~inside), ("fan", inside)):
            if np.any(mask):
                buckets[region].append((res_h[mask], res_h2[mask], density[mask]))
        if isinstance(payload, SimpleWaveFan) and np.any(inside):
            v, e, _, _ = sample_fields(sol, t, x[inside])
            circle.append(float(np.max(np.abs(v * v + e * e - payload.amplitude**2))))
    regions = {}
    for region, rows in buckets.items():
        if rows:
            a, b, d = (np.concatenate(col) for col in zip(*rows))
            # the density check uses a second-order stencil too; report it at step h
            regions[region] = RegionResidual(a.size, float(a.max()), float(b.max()), float(d.max()))
    return PdeAudit(h=h, regions=regions, invariant=max(circle) if circle else None, skipped=skipped)


# ---------------------------------------------------------------- entropy audit


@dataclass(frozen=True)
class EntropyAudit:
    """Margin of the shock speed inside the characteristic cone.

    ``passed`` requires the margin to be at least the threshold and the curve
    to span its whole phase; a curve stopped at a speed zero leaves part of the
    phase without an admissible shock.
    """

    margin: float
    t_at_margin: float
    amplitude_min: float
    complete: bool
    covered: tuple[float, float]
    threshold: float = ENTROPY_THRESHOLD

    @property
    def margin_ok(self) -> bool:
        return self.margin >= self.threshold and self.amplitude_min > 0.0

    @property
    def passed(self) -> bool:
        return self.margin_ok and self.complete


def entropy_audit(curve: ShockCurve, threshold: float = ENTROPY_THRESHOLD) -> EntropyAudit:
    margin = curve.entropy_margin()
    i = int(np.argmin(margin))
    return EntropyAudit(
        margin=float(margin[i]),
        t_at_margin=float(curve.t[i]),
        amplitude_min=float(np.min(curve.e)),
        complete=curve.complete,
        covered=curve.covered,
        threshold=threshold,
    )


# ------------------------------------------------------------ conservation audit


@dataclass(frozen=True)
class PhaseBalance:
    """Balance of one phase; rarefaction phases carry m = w = 0."""

    kind: PhaseKind
    report: Optional[BalanceReport]
    uncovered: Optional[tuple[tuple[float, float], ...]] = None

    @property
    def max_mass_residual(self) -> float:
        return self.report.max_mass_residual if self.report else math.inf

    @property
    def max_energy_residual(self) -> float:
        return self.report.max_energy_residual if self.report else math.inf


@dataclass(frozen=True)
class ConservationAudit:
    """Per-phase windowed balance plus the totals' jumps at phase handoffs.

    ``handoffs`` lists (absolute time, mass jump, energy jump) between the
    limits of consecutive phases; the energy jump is the kinetic energy of the
    delta versus that of the collapsed fan and is reported, not gated.
    ``uncovered`` lists absolute time intervals with no admissible solution.
    """

    window: tuple[float, float]
    phases: tuple[PhaseBalance, ...]
    handoffs: tuple[tuple[float, float, float], ...]
    uncovered: tuple[tuple[float, float], ...]
    tolerance: float = 1e-6

    @property
    def max_mass_residual(self) -> float:
        return max(p.max_mass_residual for p in self.phases)

    @property
    def max_energy_residual(self) -> float:
        return max(p.max_energy_residual for p in self.phases)

    @property
    def passed(self) -> bool:
        return (
            not self.uncovered
            and self.max_mass_residual <= self.tolerance
            and self.max_energy_residual <= self.tolerance
        )


def _fan_totals(fan: Fan, t: float, window, tol: float):
    mass = quad(lambda x: fan.evaluate(t, x)[2], window[0], window[1], tol=tol, breakpoints=fan.breakpoints(t), vectorized=True)
    return mass, total_energy(fan, t, window, tol=tol)


def _fan_balance(fan: Fan, window, ts: np.ndarray, tol: float) -> BalanceReport:
    data = fan.parent
    rows = [_fan_totals(fan, s, window, tol) for s in ts]
    M = np.array([r[0] for r in rows])
    E = np.array([r[1] for r in rows])
    zeros = np.zeros(ts.size)
    mass_res = np.zeros(ts.size)
    energy_res = np.zeros(ts.size)
    for i in range(1, ts.size):
        fm, fe = windowed_fluxes(data, ts[i - 1], ts[i], tol)
        mass_res[i] = mass_res[i - 1] + M[i] - M[i - 1] - fm
        energy_res[i] = energy_res[i - 1] + E[i] - E[i - 1] - fe
    # kinetic and potential parts are not split for fans; E_p holds the total
    return BalanceReport(tuple(window), ts, M, zeros, zeros, E, zeros, mass_res, energy_res)


def _outer_totals(data: RiemannData, t: float, window, x_split: float):
    """Mass and energy of the side states alone, split at x_split."""
    left, right = side_state(data, "-", t), side_state(data, "+", t)
    wl, wr = x_split - window[0], window[1] - x_split
    mass = wl + wr
    energy = 0.5 * (wl * (left.v**2 + left.e**2) + wr * (right.v**2 + right.e**2))
    return mass, energy


def _handoff(sol: PeriodSolution, idx: int, window) -> tuple[float, float, float]:
    """Jumps of the window totals from the end of phase idx to the start of the next."""
    plan = sol.plan
    n = len(plan.phases)
    ph, nxt = plan.phases[idx], plan.phases[(idx + 1) % n]
    a, b = sol.payloads[idx], sol.payloads[(idx + 1) % n]
    t_abs = ph.t_end
    # end of phase idx: the wave has collapsed to the meeting point
    end_data = a.parent
    t_local = ph.duration
    meet = side_state(end_data, "-", t_local).x
    mass_out, energy_out = _outer_totals(end_data, t_local, window, meet)
    if isinstance(a, ShockCurve):
        _, q, _ = a.state(t_local)
        amp = float(amplitude(end_data, t_local))
        end_mass, end_energy = mass_out + amp, energy_out + 0.5 * amp * q * q
    else:
        # collapsing affine fan: mass -[E], kinetic energy of a uniform mass spread over V- .. V+
        left, right = side_state(end_data, "-", t_local), side_state(end_data, "+", t_local)
        amp = -(right.e - left.e)
        mean_v2 = (left.v**2 + left.v * right.v + right.v**2) / 3.0
        end_mass, end_energy = mass_out + amp, energy_out + 0.5 * amp * mean_v2
    # start of the next phase: limit t -> 0+
    start_data = b.parent
    mass_in, energy_in = _outer_totals(start_data, 0.0, window, start_data.x0)
    amp0 = -start_data.jump_e
    if isinstance(b, ShockCurve):
        if not b.covers(0.0):
            return t_abs, math.nan, math.nan
        _, q0, _ = b.state(0.0)
        start_mass, start_energy = mass_in + amp0, energy_in + 0.5 * amp0 * q0 * q0
    else:
        mean_v2 = (start_data.v_minus**2 + start_data.v_minus * start_data.v_plus + start_data.v_plus**2) / 3.0
        start_mass, start_energy = mass_in + amp0, energy_in + 0.5 * amp0 * mean_v2
    return t_abs, start_mass - end_mass, start_energy - end_energy


def conservation_audit(
    sol: PeriodSolution,
    window: Optional[Sequence[float]] = None,
    t_grid: Optional[Sequence[float]] = None,
    points_per_phase: int = 40,
    tol: float = 1e-12,
    tolerance: float = 1e-6,
) -> ConservationAudit:
    """Windowed mass and energy balance on each phase of the period.

    ``t_grid`` holds absolute times; by default ``points_per_phase`` interior
    times per phase are used. Grid times that fall on an uncovered part of a
    shock phase or past a simple-wave fold are dropped and the interval is
    reported in ``uncovered``.
    """
    window = tuple(float(w) for w in (window or sol.default_window()))
    if not window[0] < window[1]:
        raise WindowTooSmall(f"empty window {window}")
    phases = []
    uncovered = []
    for idx, (phase, payload) in enumerate(zip(sol.plan.phases, sol.payloads)):
        dur = phase.duration
        if t_grid is None:
            local = np.linspace(0.0, dur, points_per_phase + 2)[1:-1]
        else:
            ts = np.asarray(sorted(float(s) for s in t_grid))
            local = ts[(ts > phase.t_start) & (ts < phase.t_end)] - phase.t_start
        lo, hi = 0.0, dur
        if isinstance(payload, ShockCurve):
            lo, hi = payload.covered
        elif isinstance(payload, SimpleWaveFan):
            hi = min(dur, payload.t_fold)
        gaps = []
        if lo > 0.0:
            gaps.append((phase.t_start, phase.t_start + lo))
        if hi < dur:
            gaps.append((phase.t_start + hi, phase.t_end))
        uncovered.extend(gaps)
        gap = tuple(gaps) or None
        local = local[(local >= lo) & (local <= hi)]
        if isinstance(payload, SimpleWaveFan):
            local = local[local < hi]
        if local.size == 0:
            phases.append(PhaseBalance(phase.kind, None, gap))
            continue
        if isinstance(payload, ShockCurve):
            report = balance_report(payload, window, local, tol=tol)
        else:
            report = _fan_balance(payload, window, local, tol=max(tol, 1e-12))
        phases.append(PhaseBalance(phase.kind, report, gap))
    handoffs = []
    if len(sol.plan.phases) > 1:
        for idx in range(len(sol.plan.phases)):
            try:
                handoffs.append(_handoff(sol, idx, window))
            except (OutOfRange, FoldedFan):
                handoffs.append((sol.plan.phases[idx].t_end, math.nan, math.nan))
    return ConservationAudit(
        window=window,
        phases=tuple(phases),
        handoffs=tuple(handoffs),
        uncovered=tuple(uncovered),
        tolerance=tolerance,
    )


def window_energy(sol: PeriodSolution, t: float, window: Optional[Sequence[float]] = None, tol: float = 1e-10) -> float:
    """Total energy in the window at absolute time t, delta kinetic energy included."""
    window = tuple(window or sol.default_window())
    _, local, _, payload = sol.locate(t)
    if isinstance(payload, ShockCurve):
        if not payload.covers(local):
            raise NoAdmissibleContinuation(f"no admissible shock at t = {t!r}")
        phi, q, _ = payload.state(local)
        mass, energy = _outer_totals(payload.parent, local, window, phi)
        return energy + 0.5 * float(amplitude(payload.parent, local)) * q * q
    if local == 0.0:
        raise OutOfRange("the fan energy is defined for t inside the phase")
    return total_energy(payload, local, window, tol=tol)


def random_riemann_data(count: int, seed: int = 0) -> list[RiemannData]:
    """Admissible random data: V-, V+, E- uniform on [-2, 2], [E]0 uniform on [-2, 0)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        vm, vp, em = rng.uniform(-2.0, 2.0, 3)
        de = -2.0 + 2.0 * rng.random()
        if de < 0.0 and vp != vm:
            out.append(RiemannData(vm, vp, em, em + de))
    return out
