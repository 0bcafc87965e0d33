"""Command-line front end: ``plasma-riemann solve|check|plot|sweep``.

Exit codes: 0 ok, 1 audit failure, 2 bad input, 3 numerical or IO failure.
Floats are written with 17 significant digits and ``\\n`` line endings so
repeated runs give byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np

from . import svg
from .core import PhaseKind, RiemannData, critical_times, side_state
from .errors import (
    DomainError,
    FoldedFan,
    NoAdmissibleContinuation,
    NotSimpleWave,
    NumericalError,
    OutOfRange,
    ValidationError,
)
from .numerics import ToleranceConfig
from .rarefaction import SimpleWaveFan, energy_gap, linear_fan, simple_wave_fan, total_energy
from .shock import ShockCurve, amplitude, classical_rh_position, classical_rh_speed, rh_residuals
from .solution import (
    PeriodSolution,
    conservation_audit,
    entropy_audit,
    pde_residual_audit,
    random_riemann_data,
    sample_fields,
    solve_period,
)

EXIT_OK, EXIT_AUDIT, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
FORMATS = ("csv", "json", "svg")


class ConfigError(ValidationError):
    pass


# ------------------------------------------------------------------ config


@dataclass(frozen=True)
class Grid:
    """Either explicit ``values`` or ``num`` points from ``start`` to ``stop``."""

    start: float = 0.0
    stop: float = 2 * math.pi
    num: int = 33
    values: Optional[tuple[float, ...]] = None

    @classmethod
    def from_json(cls, obj) -> "Grid":
        if isinstance(obj, Grid):
            return obj
        if isinstance(obj, (list, tuple)):
            return cls(values=tuple(float(v) for v in obj))
        if isinstance(obj, dict):
            unknown = set(obj) - {"start", "stop", "num"}
            if unknown:
                raise ConfigError(f"unknown grid keys {sorted(unknown)}")
            return cls(float(obj.get("start", 0.0)), float(obj.get("stop", 2 * math.pi)), int(obj.get("num", 33)))
        raise ConfigError(f"a grid is a list of numbers or {{start, stop, num}}, got {obj!r}")

    def array(self) -> np.ndarray:
        if self.values is not None:
            arr = np.asarray(self.values, dtype=float)
        else:
            if self.num < 1:
                raise ConfigError("grid needs at least one point")
            arr = np.linspace(self.start, self.stop, self.num)
        if arr.size == 0:
            raise ConfigError("grid is empty")
        if not np.all(np.isfinite(arr)) or np.any(np.diff(arr) <= 0):
            raise ConfigError("grid must be finite and strictly increasing")
        return arr

    def to_json(self):
        if self.values is not None:
            return list(self.values)
        return {"start": self.start, "stop": self.stop, "num": self.num}


@dataclass(frozen=True)
class Thresholds:
    r1: float = 1e-10
    r2: float = 1e-6
    entropy: float = -1e-7
    balance: float = 1e-6
    pde_ratio: tuple[float, float] = (3.5, 4.5)
    invariant: float = 1e-10
    energy_gap: float = 1e-8


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs; mirrors the JSON config file."""

    data: Optional[tuple[float, float, float, float]] = None
    x0: float = 0.0
    variant: str = "auto"
    simple_wave: bool = False
    tol_ode: float = 1e-10
    tol_abs: float = 1e-12
    far_side: str = "stop"
    t_grid: Grid = Grid()
    x_grid: Optional[Grid] = None
    window: Optional[tuple[float, float]] = None
    pde_h: float = 1e-3
    out: str = "out"
    formats: tuple[str, ...] = ("csv", "json")
    seed: int = 0
    count: int = 50
    workers: Optional[int] = None
    thresholds: Thresholds = Thresholds()

    def validated(self) -> "RunConfig":
        if self.variant not in ("linear", "simple", "auto"):
            raise ConfigError(f"variant must be linear, simple or auto, got {self.variant!r}")
        if self.far_side not in ("stop", "reflect"):
            raise ConfigError(f"far_side must be stop or reflect, got {self.far_side!r}")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad or not self.formats:
            raise ConfigError(f"formats must be a nonempty subset of {FORMATS}, got {self.formats}")
        if self.window is not None and not (len(self.window) == 2 and self.window[0] < self.window[1]):
            raise ConfigError(f"window must be (L, R) with L < R, got {self.window}")
        if not (0 < self.tol_ode < 1 and 0 < self.tol_abs < 1):
            raise ConfigError("ODE tolerances must lie in (0, 1)")
        if not self.pde_h > 0:
            raise ConfigError("pde_h must be positive")
        self.t_grid.array()
        if self.x_grid is not None:
            self.x_grid.array()
        return self

    def riemann_data(self) -> RiemannData:
        if self.data is None:
            raise ConfigError("no Riemann data given (use --data or a config file)")
        return RiemannData.from_sequence(self.data, x0=self.x0)

    def tolerances(self) -> ToleranceConfig:
        return ToleranceConfig().with_ode(self.tol_ode, self.tol_abs)


def config_from_dict(raw: dict) -> RunConfig:
    names = {f.name for f in fields(RunConfig)}
    unknown = set(raw) - names
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    kw: dict[str, Any] = dict(raw)
    try:
        if "data" in kw and kw["data"] is not None:
            data = kw["data"]
            kw["data"] = tuple(float(v) for v in (data.replace(",", " ").split() if isinstance(data, str) else data))
            if len(kw["data"]) != 4:
                raise ConfigError("data needs four values v-, v+, e-, e+")
        for key in ("t_grid", "x_grid"):
            if kw.get(key) is not None:
                kw[key] = Grid.from_json(kw[key])
        if kw.get("window") is not None:
            kw["window"] = tuple(float(v) for v in kw["window"])
        if "formats" in kw:
            f = kw["formats"]
            kw["formats"] = tuple(f.split(",") if isinstance(f, str) else f)
        if "thresholds" in kw:
            th = dict(kw["thresholds"])
            if "pde_ratio" in th:
                th["pde_ratio"] = tuple(th["pde_ratio"])
            kw["thresholds"] = Thresholds(**th)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad config value: {exc}") from exc
    return RunConfig(**kw)


def load_config(path: Union[str, Path]) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return config_from_dict(raw)


def _parse_pair(text: str) -> tuple[float, float]:
    parts = text.replace(",", " ").split()
    if len(parts) != 2:
        raise ConfigError(f"expected L,R, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ConfigError(f"expected L,R, got {text!r}") from exc


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    updates: dict[str, Any] = {}
    if args.data is not None:
        updates["data"] = RiemannData.parse(args.data).as_tuple()
    if args.variant is not None:
        updates["variant"] = args.variant
    if args.simple_wave:
        updates["simple_wave"] = True
    if args.tol_ode is not None:
        updates["tol_ode"] = args.tol_ode
    if args.window is not None:
        updates["window"] = _parse_pair(args.window)
    if args.out is not None:
        updates["out"] = args.out
    if args.format is not None:
        updates["formats"] = tuple(p for p in args.format.split(",") if p)
    if args.far_side is not None:
        updates["far_side"] = args.far_side
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.count is not None:
        updates["count"] = args.count
    if args.workers is not None:
        updates["workers"] = args.workers
    return replace(cfg, **updates).validated()


# ------------------------------------------------------------------ output


def fmt(x) -> str:
    """CSV/JSON number text: 17 significant digits, ``nan`` kept literal."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def dumps(obj, indent: int = 0) -> str:
    """Deterministic JSON with 17-digit floats; non-finite floats become null."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format(float(obj), ".17g") if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in obj) + "\n" + pad + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    _write_text(path, "\n".join(lines) + "\n")


# ------------------------------------------------------------------ solve


def _grids(cfg: RunConfig, sol: PeriodSolution):
    window = cfg.window or sol.default_window()
    x_grid = cfg.x_grid.array() if cfg.x_grid else np.linspace(window[0], window[1], 161)
    return cfg.t_grid.array(), x_grid, window


def profile_rows(sol: PeriodSolution, t_grid, x_grid):
    """Rows (t, x, V, E, n_hat, delta_pos, delta_amp); nan fields where no solution exists."""
    rows = []
    for t in t_grid:
        try:
            v, e, n, deltas = sample_fields(sol, float(t), x_grid)
        except (NoAdmissibleContinuation, FoldedFan):
            nan = np.full(x_grid.size, math.nan)
            v, e, n, deltas = nan, nan, nan, ()
        pos = deltas[0].position if deltas else None
        amp = deltas[0].amplitude if deltas else None
        rows.extend((float(t), float(x), vi, ei, ni, pos, amp) for x, vi, ei, ni in zip(x_grid, v, e, n))
    return rows


def shock_rows(sol: PeriodSolution):
    rows = []
    for phase, payload in zip(sol.plan.phases, sol.payloads):
        if not isinstance(payload, ShockCurve):
            continue
        left = side_state(payload.parent, "-", payload.t)
        right = side_state(payload.parent, "+", payload.t)
        margin = payload.entropy_margin()
        for i in range(payload.t.size):
            rows.append(
                (phase.t_start + payload.t[i], payload.phi[i], payload.q[i], payload.e[i], left.v[i], right.v[i], margin[i])
            )
    return rows


def _energies(sol: PeriodSolution, window) -> dict:
    """Fan energies at the middle of the rarefaction phase's single-valued span."""
    out: dict[str, Any] = {"window": list(window)}
    idx = [p.kind for p in sol.plan.phases].index(PhaseKind.RAREFACTION)
    phase = sol.plan.phases[idx]
    data = sol.payloads[idx].parent
    lin = linear_fan(data)
    try:
        simple = simple_wave_fan(data)
        t_span = min(phase.duration, simple.t_fold)
    except NotSimpleWave:
        simple, t_span = None, phase.duration
    if t_span <= 0:
        simple, t_span = None, phase.duration
    t_local = 0.5 * t_span
    out["time"] = phase.t_start + t_local
    out["linear_fan"] = total_energy(lin, t_local, window)
    if simple is not None:
        out["simple_wave"] = total_energy(simple, t_local, window)
        out["gap_quadrature"] = out["simple_wave"] - out["linear_fan"]
        out["gap_closed_form"] = energy_gap(data)
    else:
        out["simple_wave"] = out["gap_quadrature"] = out["gap_closed_form"] = None
    return out


def summarize(cfg: RunConfig, sol: PeriodSolution) -> dict:
    data = sol.data
    times = critical_times(data)
    shock_idx = [p.kind for p in sol.plan.phases].index(PhaseKind.SHOCK)
    shock_phase = sol.plan.phases[shock_idx]
    curve = sol.payloads[shock_idx]
    _, _, window = _grids(cfg, sol)
    conservation = conservation_audit(sol, window=window, tolerance=cfg.thresholds.balance)
    return {
        "data": {"v_minus": data.v_minus, "v_plus": data.v_plus, "e_minus": data.e_minus, "e_plus": data.e_plus, "x0": data.x0},
        "variant": sol.variant,
        "far_side": sol.far_side,
        "T_star": times.t_star_total,
        "t_star": times.t_star_half,
        "U": times.u_star,
        "K": times.k_const,
        "e0": float(amplitude(curve.parent, 0.0)),
        "phases": [{"kind": p.kind.value, "t_start": p.t_start, "t_end": p.t_end} for p in sol.plan.phases],
        "t0": shock_phase.t_start + curve.t_zero if curve.t_zero is not None else None,
        "crossings": [shock_phase.t_start + c for c in curve.crossings],
        "shock_status": curve.far_side,
        "shock_covered": [shock_phase.t_start + curve.covered[0], shock_phase.t_start + curve.covered[1]],
        "endpoint_residual": curve.endpoint_residual,
        "uncovered": [list(g) for g in conservation.uncovered],
        "energies": {**_energies(sol, window), "handoffs": [list(h) for h in conservation.handoffs]},
    }


def run_solve(cfg: RunConfig) -> tuple[PeriodSolution, dict]:
    data = cfg.riemann_data()
    sol = solve_period(
        data, variant=cfg.variant, constrain_simple_wave=cfg.simple_wave, tol=cfg.tolerances(), far_side=cfg.far_side
    )
    return sol, summarize(cfg, sol)


def cmd_solve(cfg: RunConfig) -> int:
    sol, summary = run_solve(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    t_grid, x_grid, _ = _grids(cfg, sol)
    if "csv" in cfg.formats:
        _write_csv(out / "profile.csv", ("t", "x", "V", "E", "n_hat", "delta_pos", "delta_amp"), profile_rows(sol, t_grid, x_grid))
        _write_csv(out / "shock.csv", ("t", "phi", "q", "e", "v_minus", "v_plus", "entropy_margin"), shock_rows(sol))
    if "json" in cfg.formats:
        _write_text(out / "summary.json", dumps(summary) + "\n")
    if "svg" in cfg.formats:
        write_plots(sol, cfg, out)
    return EXIT_OK


# ------------------------------------------------------------------ check


def run_audits(cfg: RunConfig, sol: Optional[PeriodSolution] = None) -> dict:
    """All audits with pass flags; ``failed`` names the failing ones."""
    th = cfg.thresholds
    if sol is None:
        sol, _ = run_solve(cfg)
    t_grid, x_grid, window = _grids(cfg, sol)
    report: dict[str, Any] = {}

    rh = []
    for phase, curve in zip(sol.plan.phases, sol.payloads):
        if isinstance(curve, ShockCurve):
            res = rh_residuals(curve)
            rh.append(
                {
                    "t_start": phase.t_start,
                    "r1_max": res.r1_max,
                    "r2_max_away": res.r2_max_away,
                    "passed": res.r1_max <= th.r1 and res.r2_max_away <= th.r2,
                }
            )
    report["rh_residuals"] = {"curves": rh, "passed": all(r["passed"] for r in rh)}

    ent = [entropy_audit(c, threshold=th.entropy) for c in sol.shock_curves]
    report["entropy"] = {
        "curves": [
            {
                "margin": a.margin,
                "t_at_margin": a.t_at_margin,
                "amplitude_min": a.amplitude_min,
                "complete": a.complete,
                "covered": list(a.covered),
                "passed": a.passed,
            }
            for a in ent
        ],
        "passed": all(a.passed for a in ent),
    }

    cons = conservation_audit(sol, window=window, tolerance=th.balance)
    report["conservation"] = {
        "window": list(cons.window),
        "phases": [
            {"kind": p.kind.value, "max_mass_residual": p.max_mass_residual, "max_energy_residual": p.max_energy_residual}
            for p in cons.phases
        ],
        "max_mass_residual": cons.max_mass_residual,
        "max_energy_residual": cons.max_energy_residual,
        "uncovered": [list(g) for g in cons.uncovered],
        "handoffs": [list(h) for h in cons.handoffs],
        "passed": cons.passed,
    }

    pde = pde_residual_audit(sol, t_grid, x_grid, h=cfg.pde_h)
    lo, hi = th.pde_ratio
    regions = {
        name: {"points": r.n_points, "max_h": r.max_h, "max_half_h": r.max_half_h, "ratio": r.ratio, "density_max": r.density_max}
        for name, r in pde.regions.items()
    }
    ratio_ok = all(lo <= r.ratio <= hi for r in pde.regions.values())
    invariant_ok = pde.invariant is None or pde.invariant <= th.invariant
    report["pde"] = {
        "h": pde.h,
        "regions": regions,
        "invariant": pde.invariant,
        "skipped": pde.skipped,
        "passed": ratio_ok and invariant_ok and bool(pde.regions),
    }

    energies = _energies(sol, window)
    if energies["gap_closed_form"] is not None:
        gap_q, gap_c = energies["gap_quadrature"], energies["gap_closed_form"]
        report["energy_gap"] = {
            "quadrature": gap_q,
            "closed_form": gap_c,
            "passed": gap_q >= -th.energy_gap and abs(gap_q - gap_c) <= th.energy_gap,
        }

    report["failed"] = [k for k, v in report.items() if isinstance(v, dict) and not v["passed"]]
    report["passed"] = not report["failed"]
    return report


def cmd_check(cfg: RunConfig) -> int:
    report = run_audits(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_text(out / "audit.json", dumps(report) + "\n")
    if report["failed"]:
        print(f"audit failed: {', '.join(report['failed'])}", file=sys.stderr)
        return EXIT_AUDIT
    return EXIT_OK


# ------------------------------------------------------------------ plot


def _plot_characteristics(sol: PeriodSolution) -> svg.Chart:
    chart = svg.Chart("Characteristics and waves", "x", "t")
    for phase, payload in zip(sol.plan.phases, sol.payloads):
        tl = np.linspace(0.0, phase.duration, 121)
        data = payload.parent
        xm = side_state(data, "-", tl).x
        xp = side_state(data, "+", tl).x
        ta = phase.t_start + tl
        if isinstance(payload, ShockCurve):
            chart.line(xm, ta, color="#7f7f7f", dash="4 3")
            chart.line(xp, ta, color="#7f7f7f", dash="4 3")
            chart.line(payload.phi, phase.t_start + payload.t, color="#d62728", width=2.5, label="delta shock")
        else:
            label = "simple-wave fan" if isinstance(payload, SimpleWaveFan) else "linear fan"
            chart.fill(np.concatenate([xm, xp[::-1]]), np.concatenate([ta, ta[::-1]]), label=label)
            chart.line(xm, ta, color="#1f77b4")
            chart.line(xp, ta, color="#1f77b4")
    return chart


def _plot_speed(curve: ShockCurve, t_start: float) -> svg.Chart:
    chart = svg.Chart("Shock speed", "t", "speed")
    t = curve.t
    left, right = side_state(curve.parent, "-", t), side_state(curve.parent, "+", t)
    chart.line(t_start + t, left.v, color="#7f7f7f", dash="4 3", label="V-")
    chart.line(t_start + t, right.v, color="#9467bd", dash="4 3", label="V+")
    chart.line(t_start + t, classical_rh_speed(curve.parent, t), color="#2ca02c", label="classical")
    chart.line(t_start + t, curve.q, color="#d62728", width=2.5, label="singular q")
    if curve.crossings:
        chart.markers([t_start + c for c in curve.crossings], [0.0] * len(curve.crossings), color="#000000", label="q = 0")
    return chart


def _plot_position(curve: ShockCurve, t_start: float) -> svg.Chart:
    chart = svg.Chart("Shock position", "t", "x")
    t = curve.t
    chart.line(t_start + t, side_state(curve.parent, "-", t).x, color="#7f7f7f", dash="4 3", label="x-")
    chart.line(t_start + t, side_state(curve.parent, "+", t).x, color="#9467bd", dash="4 3", label="x+")
    chart.line(t_start + t, classical_rh_position(curve.parent, t), color="#2ca02c", label="classical")
    chart.line(t_start + t, curve.phi, color="#d62728", width=2.5, label="singular")
    return chart


def _plot_profiles(sol: PeriodSolution, window) -> str:
    charts = []
    xs = np.linspace(window[0], window[1], 801)
    for phase, payload in zip(sol.plan.phases, sol.payloads):
        if isinstance(payload, ShockCurve):
            lo, hi = payload.covered
            t_local = 0.5 * (lo + hi)
        else:
            hi = phase.duration
            if isinstance(payload, SimpleWaveFan):
                hi = min(hi, payload.t_fold)
            t_local = 0.5 * hi
        if t_local <= 0:
            continue
        t = phase.t_start + t_local
        v, e, n, deltas = sample_fields(sol, t, xs)
        chart = svg.Chart(f"Profiles at t = {t:.4f} ({phase.kind.value})", "x", "value")
        chart.line(xs, v, label="V").line(xs, e, label="E").line(xs, n, label="n_hat")
        for d in deltas:
            # delta glyph: a spike of the amplitude's height at the shock
            chart.line([d.position, d.position], [1.0, 1.0 + d.amplitude], color="#000000", width=2.5, label="delta")
            chart.markers([d.position], [1.0 + d.amplitude])
        charts.append(chart)
    return svg.stack(charts)


def write_plots(sol: PeriodSolution, cfg: RunConfig, out: Path) -> list[Path]:
    _, _, window = _grids(cfg, sol)
    written = []
    path = out / "characteristics.svg"
    svg.write(_plot_characteristics(sol), path)
    written.append(path)
    for phase, curve in zip(sol.plan.phases, sol.payloads):
        if isinstance(curve, ShockCurve):
            for name, chart in (("shock_speed.svg", _plot_speed(curve, phase.t_start)), ("shock_position.svg", _plot_position(curve, phase.t_start))):
                svg.write(chart, out / name)
                written.append(out / name)
    _write_text(out / "profiles.svg", _plot_profiles(sol, window))
    written.append(out / "profiles.svg")
    return written


def cmd_plot(cfg: RunConfig) -> int:
    if cfg.data is None:
        print("error: nothing to plot (give --data, a config, or --input with a prior summary.json)", file=sys.stderr)
        return EXIT_NUMERIC
    sol, _ = run_solve(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_plots(sol, cfg, out)
    return EXIT_OK


# ------------------------------------------------------------------ sweep


def _sweep_one(args: tuple[int, tuple[float, ...], RunConfig]) -> dict:
    index, values, cfg = args
    entry: dict[str, Any] = {"index": index, "data": list(values)}
    try:
        report = run_audits(replace(cfg, data=tuple(values)))
        entry["passed"] = report["passed"]
        entry["failed"] = report["failed"]
        entry["rh_r2_max_away"] = max((c["r2_max_away"] for c in report["rh_residuals"]["curves"]), default=0.0)
        entry["entropy_margin"] = min(c["margin"] for c in report["entropy"]["curves"])
        entry["max_mass_residual"] = report["conservation"]["max_mass_residual"]
        entry["max_energy_residual"] = report["conservation"]["max_energy_residual"]
        entry["uncovered"] = report["conservation"]["uncovered"]
    except (NumericalError, DomainError) as exc:
        entry["passed"] = False
        entry["failed"] = ["error"]
        entry["error"] = f"{type(exc).__name__}: {exc}"
    return entry


def run_sweep(cfg: RunConfig) -> list[dict]:
    datasets = random_riemann_data(cfg.count, seed=cfg.seed)
    jobs = [(i, d.as_tuple(), cfg) for i, d in enumerate(datasets)]
    if cfg.workers == 1:
        results = [_sweep_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_sweep_one, jobs))
    return sorted(results, key=lambda r: r["index"])


def cmd_sweep(cfg: RunConfig) -> int:
    results = run_sweep(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "seed": cfg.seed,
        "count": cfg.count,
        "passed": sum(r["passed"] for r in results),
        "failed": [r["index"] for r in results if not r["passed"]],
        "results": results,
    }
    _write_text(out / "sweep.json", dumps(payload) + "\n")
    header = ("index", "v_minus", "v_plus", "e_minus", "e_plus", "passed", "failed")
    rows = [(r["index"], *r["data"], r["passed"], ";".join(r["failed"])) for r in results]
    lines = [",".join(header)] + [",".join(v if isinstance(v, str) else fmt(v) for v in row) for row in rows]
    _write_text(out / "sweep.csv", "\n".join(lines) + "\n")
    if payload["failed"]:
        print(f"sweep: {len(payload['failed'])} of {cfg.count} data sets failed an audit", file=sys.stderr)
        return EXIT_AUDIT
    return EXIT_OK


# ------------------------------------------------------------------ entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plasma-riemann", description="Riemann problem for the cold plasma equations")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("solve", "solve one period and write profile.csv, shock.csv, summary.json"),
        ("check", "run all audits and write audit.json"),
        ("plot", "write SVG figures"),
        ("sweep", "audit randomized data sets in parallel"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--data", help="v-,v+,e-,e+")
        p.add_argument("--variant", choices=("linear", "simple", "auto"))
        p.add_argument("--simple-wave", action="store_true", help="demand the simple-wave constraint (auto variant)")
        p.add_argument("--tol-ode", type=float, help="relative ODE tolerance")
        p.add_argument("--window", help="L,R")
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", help="comma list from csv,json,svg")
        p.add_argument("--far-side", choices=("stop", "reflect"))
        p.add_argument("--seed", type=int)
        p.add_argument("--count", type=int)
        p.add_argument("--workers", type=int)
        if name == "plot":
            p.add_argument("--input", help="directory holding a prior summary.json")
    return parser


def _plot_config_from_input(cfg: RunConfig, directory: str) -> RunConfig:
    path = Path(directory) / "summary.json"
    try:
        summary = json.loads(path.read_text(encoding="utf-8"))
        d = summary["data"]
        return replace(cfg, data=(d["v_minus"], d["v_plus"], d["e_minus"], d["e_plus"]), x0=d.get("x0", 0.0))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise FileNotFoundError(f"no usable summary.json in {directory}: {exc}") from exc


COMMANDS = {"solve": cmd_solve, "check": cmd_check, "plot": cmd_plot, "sweep": cmd_sweep}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "plot" and cfg.data is None and getattr(args, "input", None):
            cfg = _plot_config_from_input(cfg, args.input)
        if args.command in ("solve", "check"):
            cfg.riemann_data()
        return COMMANDS[args.command](cfg)
    except (ValidationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
