"""The ``run`` driver: time loop, CSV series, snapshots and singularity reports."""

import math
import os
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .. import diagnostics as dg
from ..errors import DegenerateFrame, FrameDefect, NonFinite, StepRejected
from ..integrator import SimState, adaptive_dt, mollify_state, step, step_friedrich
from .initial import make_initial
from .snapshot import write_snapshot

EXIT_OK = 0
EXIT_SINGULAR = 2
EXIT_CONFIG = 3


@dataclass
class RunResult:
    exit_code: int
    steps: int
    state: SimState
    report: Optional[dg.SingularityReport] = None


def _fmt(x):
    return "nan" if isinstance(x, float) and math.isnan(x) else format(float(x), ".17g")


def _resolve(path, base):
    return path if base is None or os.path.isabs(path) else os.path.join(base, path)


def initial_state(cfg):
    p, v = make_initial(cfg.initial, cfg.grid)
    state = SimState(t=0.0, p=p, v=v)
    if cfg.integrator.mollify_cutoff is not None:
        state = mollify_state(cfg.grid, state, cfg.integrator.mollify_cutoff)
    return state


def _take_step(cfg, state, dt):
    """Step with dt halving on rejection; returns (new state, dt used)."""
    grid, coeffs, icfg = cfg.grid, cfg.coeffs, cfg.integrator
    stepper = step if icfg.mollify_cutoff is None else step_friedrich
    for _ in range(cfg.diagnostics.max_halvings + 1):
        try:
            return stepper(grid, state, coeffs, icfg, dt=dt), dt
        except StepRejected as exc:
            last = exc
            dt *= 0.5
    raise last


def run(cfg, base_dir=None):
    """Integrate ``cfg`` and write its artifacts; never raises for numerical breakdown."""
    grid, coeffs, icfg, dcfg = cfg.grid, cfg.coeffs, cfg.integrator, cfg.diagnostics
    cutoff = icfg.mollify_cutoff
    freeze = icfg.freeze_velocity
    state = initial_state(cfg)
    e0, _ = dg.total_energy(grid, state, coeffs)
    eps0 = dcfg.eps0 if dcfg.eps0 is not None else 0.1 * e0

    series_path = _resolve(cfg.output.series_path, base_dir)
    snap_dir = _resolve(cfg.output.snapshot_dir, base_dir)
    report_path = _resolve(cfg.output.report_path, base_dir)
    for path in (series_path, report_path):
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    if cfg.output.snapshot_interval:
        os.makedirs(snap_dir, exist_ok=True)

    def snapshot(s):
        k = cfg.output.snapshot_interval
        if k and s.step_index % k == 0:
            write_snapshot(os.path.join(snap_dir, f"snap_{s.step_index:06d}.bxfh"), grid, s)

    def make_record(s, integral):
        return dg.record(grid, s, coeffs, integral, dcfg.radius, cutoff, freeze)

    report = None
    nsteps = 0
    with open(series_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(dg.CSV_COLUMNS) + "\n")

        def emit(rec):
            fh.write(",".join(_fmt(x) for x in rec.csv_values()) + "\n")

        try:
            rec = make_record(state, 0.0)
        except NonFinite as exc:
            report = dg.SingularityReport(True, state.t, "NonFinite",
                                          message=f"initial state: {exc}")
            rec = None
        window = deque([rec], maxlen=3)
        snapshot(state)
        while rec is not None:
            if cfg.steps is not None and nsteps >= cfg.steps:
                break
            if cfg.t_end is not None and state.t >= cfg.t_end * (1 - 1e-12):
                break
            dt = adaptive_dt(grid, state, coeffs, icfg) if cfg.adaptive else icfg.dt
            if cfg.t_end is not None:
                dt = min(dt, cfg.t_end - state.t)
            try:
                new, used = _take_step(cfg, state, dt)
                new_rec = make_record(new, window[-1].blowup_integral + used * window[-1].blowup_integrand)
            except (NonFinite, DegenerateFrame, FrameDefect, FloatingPointError) as exc:
                report = dg.SingularityReport(True, state.t, "NonFinite", message=str(exc))
                break
            except StepRejected as exc:
                report = dg.SingularityReport(True, state.t, "StepRejected", message=str(exc))
                break
            window.append(new_rec)
            state = new
            nsteps += 1
            if len(window) == 3:
                a, b, c = window
                b.energy_residual = dg.residual_from_samples(
                    (a.t, b.t, c.t), (a.E_total, b.E_total, c.E_total), b.D_total,
                    dcfg.residual_floor)
            if len(window) >= 2:
                emit(window[-2])
            snapshot(state)
            if len(window) == 3 and window[1].energy_residual > dcfg.residual_limit:
                report = dg.SingularityReport(
                    True, window[1].t, "EnergyResidual",
                    message=f"energy-law residual {window[1].energy_residual:.3e} "
                            f"exceeds {dcfg.residual_limit:.3e}")
                break
            if new_rec.blowup_integrand > dcfg.blowup_limit:
                _, hot = dg.local_energy_scan(grid, state, dcfg.radius, eps0)
                report = dg.SingularityReport(
                    True, state.t, "LocalConcentration", hotspot_centers=[list(h) for h in hot],
                    message=f"blow-up integrand {new_rec.blowup_integrand:.3e} "
                            f"exceeds {dcfg.blowup_limit:.3e}")
                break
        if rec is not None:
            emit(window[-1])

    if report is not None:
        if not report.hotspot_centers and report.trigger != "LocalConcentration":
            try:
                _, hot = dg.local_energy_scan(grid, state, dcfg.radius, eps0)
                report.hotspot_centers = [list(h) for h in hot]
            except (FloatingPointError, ValueError):
                pass
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write(report.to_json() + "\n")
        return RunResult(EXIT_SINGULAR, nsteps, state, report)
    return RunResult(EXIT_OK, nsteps, state, None)
