"""Time stepping for the coupled frame / velocity system.

The frame equation is written as a pointwise affine vector field

    d n_i / dt = W x n_i + r_i,   W = c1 n1 + c2 n2 + c3 n3,  r_i = -(v . grad) n_i

and advanced with commutator-free Lie-group Runge-Kutta schemes whose
exponentials are exact affine flows (Rodrigues rotation plus the phi_1
correction for the drift).  With r = 0 every stage is an exact rotation.
The velocity uses the matching Lawson (integrating-factor) Runge-Kutta
scheme so that viscosity is integrated exactly in Fourier space.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import hydro
from .elasticity import (ElasticCoefficients, derive_coefficients, elastic_energy,
                         frame_gradients, molecular_fields, rotational_derivatives)
from .errors import NonFinite, StepRejected
from .frame import affine_flow, check_frame, cross_each, reproject_so3, tensor_basis
from .grid import leray_hat, mollifier_symbol
from .hydro import HydroCoefficients

SCHEMES = ("explicit_rk2_lie", "explicit_rk4_lie")


@dataclass
class SimState:
    t: float
    p: np.ndarray
    v: np.ndarray
    step_index: int = 0


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    scheme: str = "explicit_rk4_lie"
    mollify_cutoff: Optional[float] = None
    cfl_safety: float = 0.4
    reprojection_interval: Optional[int] = 1
    freeze_velocity: bool = False   # v stays 0: pure frame gradient flow

    def __post_init__(self):
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ValueError("dt must be a positive finite number")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if not (0 < self.cfl_safety <= 1):
            raise ValueError("cfl_safety must lie in (0, 1]")
        if self.reprojection_interval is not None and int(self.reprojection_interval) < 1:
            raise ValueError("reprojection_interval must be a positive integer or None")
        if self.mollify_cutoff is not None and not self.mollify_cutoff > 0:
            raise ValueError("mollify_cutoff must be positive")


@dataclass(frozen=True)
class Coefficients:
    elastic: ElasticCoefficients
    hydro: HydroCoefficients
    # fault injection only: coefficients seen by the stress and nowhere else
    stress_hydro: Optional[HydroCoefficients] = None

    @classmethod
    def default(cls):
        return cls(derive_coefficients(np.ones(12)), HydroCoefficients())


@dataclass
class Evaluation:
    """Every intermediate field of one right-hand-side evaluation.

    In mollified mode ``frame`` and ``vel`` hold J n and J v; ``p`` and ``v``
    always hold the raw state.
    """

    p: np.ndarray
    v: np.ndarray
    frame: np.ndarray
    vel: np.ndarray
    grads: object
    h: np.ndarray
    lf: np.ndarray
    sr: hydro.StrainRotation
    tb: object
    rates: np.ndarray
    omega: np.ndarray
    drift: np.ndarray
    sigma: np.ndarray
    force: np.ndarray
    forcing: np.ndarray       # projected explicit velocity terms (no viscosity)
    symbol: Optional[np.ndarray] = None


# right-hand side --------------------------------------------------------------

def _advection(grads, vel):
    """-(u . grad) n_i for each frame vector."""
    return -(vel[0] * grads.d[0] + vel[1] * grads.d[1])


def _convective(grid, vel):
    """Rotational form -omega x u; differs from -(u.grad)u by a gradient."""
    vh = grid.fft(vel)
    w = grid.ifft(grid.dkx * vh[1] - grid.dky * vh[0])
    return np.stack([w * vel[1], -w * vel[0]])


def _projected(grid, sigma, body, symbol=None):
    """P[mask * (div sigma + body)], optionally filtered by ``symbol``."""
    sh = grid.fft(sigma[:2, :2])
    fh = grid.mask * grid.fft(body) + grid.dkx * sh[:, 0] + grid.dky * sh[:, 1]
    fh = leray_hat(grid, fh)
    if symbol is not None:
        fh = symbol * fh
    return grid.ifft(fh)


def evaluate(grid, p, v, coeffs, symbol=None, freeze_velocity=False, check=True):
    """Assemble the right-hand side.  ``symbol`` is the mollifier J in Fourier space."""
    if freeze_velocity:
        v = np.zeros_like(v)
    if symbol is None:
        if check:
            check_frame(p)
        frame, vel = p, v
    else:
        frame = grid.ifft(symbol * grid.fft(p))
        vel = grid.ifft(symbol * grid.fft(v))
    g = frame_gradients(grid, frame)
    h = molecular_fields(grid, frame, coeffs.elastic, check=False, grads=g)
    lf = rotational_derivatives(frame, h)
    sr = hydro.strain_rotation(grid, vel)
    tb = tensor_basis(frame, check=False)
    rates = hydro.angular_rates(sr, tb, lf, coeffs.hydro)
    omega = hydro.rotation_vector(p, rates)
    sigma = hydro.stress(sr, tb, lf, coeffs.stress_hydro or coeffs.hydro)
    force = hydro.body_force(g, frame, lf)
    if symbol is None:
        drift = _advection(g, vel)
    else:
        # mollified frame velocity: J(c3 m2 - c2 m3 - u.grad m1), ... minus W x n
        target = hydro.frame_velocity(frame, rates) + _advection(g, vel)
        target = grid.ifft(symbol * grid.fft(target))
        drift = target - cross_each(omega, p)
    if freeze_velocity:
        forcing = np.zeros_like(v)
    else:
        forcing = _projected(grid, sigma, _convective(grid, vel) + force, symbol)
    out = Evaluation(p=p, v=v, frame=frame, vel=vel, grads=g, h=h, lf=lf, sr=sr, tb=tb,
                     rates=rates, omega=omega, drift=drift, sigma=sigma, force=force,
                     forcing=forcing, symbol=symbol)
    if not (np.all(np.isfinite(omega)) and np.all(np.isfinite(drift))
            and np.all(np.isfinite(forcing))):
        raise NonFinite("non-finite values in the right-hand side")
    return out


def _viscous_symbol(grid, eta, symbol=None):
    s = -eta * grid.k2 * grid.mask
    if symbol is not None:
        s = s * symbol**2
    return s


def rhs(grid, state, coeffs, freeze_velocity=False):
    """(omega, advect_p, dvdt) of the unmollified system."""
    ev = evaluate(grid, state.p, state.v, coeffs, freeze_velocity=freeze_velocity)
    if freeze_velocity:
        dvdt = np.zeros_like(state.v)
    else:
        lap = grid.ifft(_viscous_symbol(grid, coeffs.hydro.eta) * grid.fft(state.v))
        dvdt = ev.forcing + lap
    return ev.omega, ev.drift, dvdt


def rhs_friedrich(grid, state, coeffs, cutoff, freeze_velocity=False):
    """(omega, drift, dvdt) of the mollified system; drift absorbs everything but W x n."""
    sym = mollifier_symbol(grid, cutoff)
    ev = evaluate(grid, state.p, state.v, coeffs, symbol=sym, freeze_velocity=freeze_velocity)
    if freeze_velocity:
        dvdt = np.zeros_like(state.v)
    else:
        lap = grid.ifft(_viscous_symbol(grid, coeffs.hydro.eta, sym) * grid.fft(state.v))
        dvdt = ev.forcing + lap
    return ev.omega, ev.drift, dvdt


def frame_rate(ev):
    """d n_i / dt implied by an evaluation."""
    return cross_each(ev.omega, ev.p) + ev.drift


# energy bookkeeping -------------------------------------------------------------

def energy(grid, p, v, coeffs):
    return 0.5 * grid.inner(v, v) + elastic_energy(grid, p, coeffs.elastic)


def energy_rate(grid, state, coeffs, cutoff=None, freeze_velocity=False):
    """(dE/dt from the chained right-hand sides, dissipation D).

    The energy is 1/2 |v|^2 + F[n] with n the raw state in both modes.
    """
    sym = None if cutoff is None else mollifier_symbol(grid, cutoff)
    ev = evaluate(grid, state.p, state.v, coeffs, symbol=sym, freeze_velocity=freeze_velocity)
    if sym is None:
        h_raw = ev.h
    else:
        h_raw = molecular_fields(grid, state.p, coeffs.elastic, check=False)
    dedt = -grid.inner(h_raw, frame_rate(ev))
    if not freeze_velocity:
        lap = grid.ifft(_viscous_symbol(grid, coeffs.hydro.eta, sym) * grid.fft(state.v))
        dedt += grid.inner(state.v, ev.forcing + lap)
    sr = ev.sr
    if freeze_velocity:
        sr = hydro.strain_rotation(grid, np.zeros_like(state.v))
    total, _ = hydro.dissipation(grid, sr, ev.tb, ev.lf, coeffs.hydro)
    return dedt, total


# step control ------------------------------------------------------------------

def stability_limit(grid, state, coeffs):
    """Largest dt the explicit part tolerates: advective and diffusive bounds."""
    h = min(grid.dx, grid.dy)
    hc = coeffs.hydro
    stiff = max(coeffs.elastic.stiffness() / float(np.min(hc.chi)), hc.explicit_viscosity())
    limit = h * h / (2.0 * stiff)
    vmax = float(np.max(np.abs(state.v))) if state.v.size else 0.0
    if vmax > 0:
        limit = min(limit, h / vmax)
    return limit


def adaptive_dt(grid, state, coeffs, icfg):
    return min(icfg.dt, icfg.cfl_safety * stability_limit(grid, state, coeffs))


# steppers ------------------------------------------------------------------------

def _flow(p, gens, weights, dt):
    """exp(dt * sum_k w_k F_k) applied to p."""
    w = sum(c * g[0] for c, g in zip(weights, gens) if c)
    r = sum(c * g[1] for c, g in zip(weights, gens) if c)
    return affine_flow(p, w, r, dt)


def _advance(grid, state, coeffs, icfg, dt, symbol):
    freeze = icfg.freeze_velocity
    eta = coeffs.hydro.eta

    def stage(p, v):
        ev = evaluate(grid, p, v, coeffs, symbol=symbol, freeze_velocity=freeze, check=False)
        return (ev.omega, ev.drift), grid.fft(ev.forcing)

    vsym = _viscous_symbol(grid, eta, symbol)
    p0 = state.p
    v0h = grid.fft(state.v)
    E = lambda tau: np.exp(vsym * tau)
    to_v = grid.ifft

    if icfg.scheme == "explicit_rk2_lie":
        F1, N1 = stage(p0, state.v)
        p2 = _flow(p0, [F1], [1.0], dt)
        v2h = E(dt) * (v0h + dt * N1)
        F2, N2 = stage(p2, to_v(v2h))
        p1 = _flow(_flow(p0, [F1], [0.5], dt), [F2], [0.5], dt)
        v1h = E(dt) * (v0h + 0.5 * dt * N1) + 0.5 * dt * N2
    else:
        half = 0.5 * dt
        F1, N1 = stage(p0, state.v)
        p2 = _flow(p0, [F1], [0.5], dt)
        v2h = E(half) * (v0h + half * N1)
        F2, N2 = stage(p2, to_v(v2h))
        p3 = _flow(p0, [F2], [0.5], dt)
        v3h = E(half) * v0h + half * N2
        F3, N3 = stage(p3, to_v(v3h))
        p4 = _flow(p2, [F1, F3], [-0.5, 1.0], dt)
        v4h = E(dt) * v0h + dt * E(half) * N3
        F4, N4 = stage(p4, to_v(v4h))
        mid = _flow(p0, [F1, F2, F3, F4], [3 / 12, 2 / 12, 2 / 12, -1 / 12], dt)
        p1 = _flow(mid, [F1, F2, F3, F4], [-1 / 12, 2 / 12, 2 / 12, 3 / 12], dt)
        v1h = E(dt) * v0h + dt / 6.0 * (E(dt) * N1 + 2.0 * E(half) * (N2 + N3) + N4)

    v1 = np.zeros_like(state.v) if freeze else to_v(v1h)
    if not (np.all(np.isfinite(p1)) and np.all(np.isfinite(v1))):
        raise NonFinite("non-finite state after step")
    return p1, v1


def _check_dt(grid, state, coeffs, dt):
    limit = stability_limit(grid, state, coeffs)
    if dt > limit:
        raise StepRejected(f"dt = {dt:.3e} exceeds the stability limit {limit:.3e}", limit)


def step(grid, state, coeffs, icfg, dt=None):
    """Advance one step of size ``dt`` (default ``icfg.dt``)."""
    dt = icfg.dt if dt is None else dt
    _check_dt(grid, state, coeffs, dt)
    p1, v1 = _advance(grid, state, coeffs, icfg, dt, None)
    n = state.step_index + 1
    k = icfg.reprojection_interval
    if k is not None and n % int(k) == 0:
        p1 = reproject_so3(p1)
    return SimState(t=state.t + dt, p=p1, v=v1, step_index=n)


def step_friedrich(grid, state, coeffs, icfg, dt=None):
    """One step of the mollified system; no reprojection (its frames are not in SO(3))."""
    if icfg.mollify_cutoff is None:
        raise ValueError("mollify_cutoff must be set for the mollified system")
    dt = icfg.dt if dt is None else dt
    _check_dt(grid, state, coeffs, dt)
    sym = mollifier_symbol(grid, icfg.mollify_cutoff)
    p1, v1 = _advance(grid, state, coeffs, icfg, dt, sym)
    return SimState(t=state.t + dt, p=p1, v=v1, step_index=state.step_index + 1)


def mollify_state(grid, state, cutoff):
    """Initial data of the mollified system: J applied to every component."""
    sym = mollifier_symbol(grid, cutoff)
    f = lambda a: grid.ifft(sym * grid.fft(a))
    return replace(state, p=f(state.p), v=f(state.v))


def advance(grid, state, coeffs, icfg, nsteps):
    """Take ``nsteps`` fixed steps with the stepper selected by ``icfg``."""
    stepper = step if icfg.mollify_cutoff is None else step_friedrich
    for _ in range(nsteps):
        state = stepper(grid, state, coeffs, icfg)
    return state
