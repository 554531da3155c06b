"""Energy bookkeeping, the blow-up criterion integrand and local energy scans."""

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import hydro
from .elasticity import elastic_energy, frame_gradients
from .frame import orthonormality_defect
from .grid import mollifier_symbol
from .integrator import evaluate

TRIGGERS = ("NonFinite", "EnergyResidual", "LocalConcentration", "StepRejected")


def total_energy(grid, state, coeffs):
    """E = 1/2 |v|^2 + elastic energy, with the two parts."""
    kin = 0.5 * grid.inner(state.v, state.v)
    el = elastic_energy(grid, state.p, coeffs.elastic)
    return kin + el, {"kinetic": kin, "elastic": el}


def state_dissipation(grid, state, coeffs, cutoff=None, freeze_velocity=False):
    """Dissipation functional at a state; mollified fields when ``cutoff`` is given."""
    sym = None if cutoff is None else mollifier_symbol(grid, cutoff)
    ev = evaluate(grid, state.p, state.v, coeffs, symbol=sym,
                  freeze_velocity=freeze_velocity, check=False)
    return hydro.dissipation(grid, ev.sr, ev.tb, ev.lf, coeffs.hydro)


def three_point_rate(times, values):
    """Derivative at the middle of three (possibly unevenly spaced) samples."""
    t0, t1, t2 = times
    e0, e1, e2 = values
    h1, h2 = t1 - t0, t2 - t1
    if not (h1 > 0 and h2 > 0):
        raise ValueError("times must be strictly increasing")
    return (-h2 / (h1 * (h1 + h2)) * e0 + (h2 - h1) / (h1 * h2) * e1
            + h1 / (h2 * (h1 + h2)) * e2)


def residual_from_samples(times, energies, dissipation_mid, floor=1e-12):
    """|dE/dt + D| / max(D, floor) from three energy samples and the middle D."""
    rate = three_point_rate(times, energies)
    return abs(rate + dissipation_mid) / max(dissipation_mid, floor)


def energy_law_residual(grid, window, coeffs, floor=1e-12, cutoff=None, freeze_velocity=False):
    """Time-discrete energy-law residual over three consecutive states."""
    if len(window) != 3:
        raise ValueError("window must hold three states")
    times = [s.t for s in window]
    energies = [total_energy(grid, s, coeffs)[0] for s in window]
    d_mid, _ = state_dissipation(grid, window[1], coeffs, cutoff, freeze_velocity)
    return residual_from_samples(times, energies, d_mid, floor)


# blow-up criterion -----------------------------------------------------------

def blowup_integrand(grid, state, grads=None):
    """max|curl v| + sum_i max|grad n_i|^2 with grid max norms."""
    vh = grid.fft(state.v)
    vort = grid.ifft(grid.dkx * vh[1] - grid.dky * vh[0])
    g = grads if grads is not None else frame_gradients(grid, state.p)
    gsq = g.grad_sq()
    return float(np.max(np.abs(vort)) + sum(float(np.max(gsq[i])) for i in range(3)))


def blowup_monitor(grid, state, running, dt):
    """Left Riemann update of the running criterion integral."""
    return running + dt * blowup_integrand(grid, state)


# local energy ------------------------------------------------------------------

def energy_concentration_density(grid, state):
    """|grad p|^2 + |v|^2 pointwise."""
    g = frame_gradients(grid, state.p)
    return g.grad_sq().sum(axis=0) + np.einsum("c...,c...->...", state.v, state.v)


def disc_indicator(grid, radius, subsamples=16):
    """Fraction of each grid cell covered by the periodic disc centred at the origin.

    Cells straddling the circle are supersampled on a ``subsamples``^2 lattice;
    a plain point-sampled indicator misses the disc area by a few percent.
    """
    x, y = grid.coords()
    dx = np.minimum(x, grid.lx - x)
    dy = np.minimum(y, grid.ly - y)
    dist = np.hypot(dx, dy)
    half_diag = 0.5 * np.hypot(grid.dx, grid.dy)
    out = (dist <= radius - half_diag).astype(float)
    edge = np.abs(dist - radius) < half_diag
    if np.any(edge):
        s = (np.arange(subsamples) + 0.5) / subsamples - 0.5
        ox = (s * grid.dx)[:, None]
        oy = (s * grid.dy)[None, :]
        # coordinates relative to the nearest periodic image of the centre
        ex = np.where(x > grid.lx / 2, x - grid.lx, x)[edge][:, None, None] + ox
        ey = np.where(y > grid.ly / 2, y - grid.ly, y)[edge][:, None, None] + oy
        out[edge] = np.mean(ex * ex + ey * ey <= radius * radius, axis=(1, 2))
    return out


def disc_integrals(grid, density, radius):
    """Integral of ``density`` over the disc around every grid point (circular convolution)."""
    ind = disc_indicator(grid, radius)
    conv = grid.ifft(grid.fft(density) * np.conj(grid.fft(ind)))
    return conv * grid.cell_area


def local_energy_scan(grid, state, radius, eps0):
    """(max over centres of the disc energy, list of centre indices exceeding eps0)."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    local = disc_integrals(grid, energy_concentration_density(grid, state), radius)
    hot = np.argwhere(local > eps0)
    return float(local.max()), [tuple(int(i) for i in ij) for ij in hot]


# records -------------------------------------------------------------------------

CSV_COLUMNS = ("t", "E_total", "E_kin", "E_elastic", "D_total", "D_visc", "D_rot", "D_beta",
               "residual", "blowup_integrand", "blowup_integral", "ortho_defect",
               "local_energy_max")


@dataclass
class DiagnosticsRecord:
    t: float
    E_kinetic: float
    E_elastic: float
    dissipation_terms: dict
    energy_residual: float
    blowup_integrand: float
    blowup_integral: float
    ortho_defect_max: float
    local_energy_max: float

    @property
    def E_total(self):
        return self.E_kinetic + self.E_elastic

    @property
    def D_total(self):
        return float(sum(self.dissipation_terms.values()))

    def csv_values(self):
        visc, rot, beta = hydro.grouped_dissipation(self.dissipation_terms)
        return (self.t, self.E_total, self.E_kinetic, self.E_elastic, self.D_total,
                visc, rot, beta, self.energy_residual, self.blowup_integrand,
                self.blowup_integral, self.ortho_defect_max, self.local_energy_max)


def record(grid, state, coeffs, blowup_integral, radius, cutoff=None,
           freeze_velocity=False, residual=float("nan")):
    """Everything but the lagged energy residual, for one state."""
    energy, parts = total_energy(grid, state, coeffs)
    _, terms = state_dissipation(grid, state, coeffs, cutoff, freeze_velocity)
    local, _ = local_energy_scan(grid, state, radius, np.inf)
    return DiagnosticsRecord(
        t=state.t, E_kinetic=parts["kinetic"], E_elastic=parts["elastic"],
        dissipation_terms=terms, energy_residual=residual,
        blowup_integrand=blowup_integrand(grid, state), blowup_integral=blowup_integral,
        ortho_defect_max=orthonormality_defect(state.p), local_energy_max=local)


@dataclass
class SingularityReport:
    detected: bool
    t_last_good: float
    trigger: Optional[str] = None
    hotspot_centers: list = field(default_factory=list)
    message: str = ""

    def __post_init__(self):
        if self.detected and self.trigger not in TRIGGERS:
            raise ValueError(f"trigger must be one of {TRIGGERS}")

    def to_json(self):
        return json.dumps(asdict(self), indent=2)
