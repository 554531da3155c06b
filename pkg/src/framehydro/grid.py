"""Periodic 2D grid with spectral differentiation, projection and filtering.

Field layout conventions used throughout the package (all float64):

* scalar field      ``(nx, ny)``, index ``[ix, iy]`` with ``x = ix * dx``
* velocity field    ``(2, nx, ny)``
* 3-vector field    ``(3, nx, ny)``  (fields in R^3 with d/dx3 = 0)
* frame field       ``(3, 3, nx, ny)``, ``p[i]`` is the unit vector n_{i+1}
* tensor field      ``(3, 3, nx, ny)``

Every spectral operator accepts arbitrary leading batch axes.
"""

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

THREADS_ENV = "FRAMEHYDRO_THREADS"


def _default_workers():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _wavenumbers(n, length):
    return np.fft.fftfreq(n, d=1.0 / n) * (2.0 * np.pi / length)


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic grid on [0, lx) x [0, ly).

    The dealiasing mask keeps modes with integer index ``|m| < fraction * n / 2``
    along each axis; with ``fraction = 1`` this still drops the unmatched
    Nyquist mode.
    """

    nx: int
    ny: int
    lx: float = 2.0 * np.pi
    ly: float = 2.0 * np.pi
    dealias_fraction: float = 2.0 / 3.0
    workers: int = field(default_factory=_default_workers, compare=False)

    def __post_init__(self):
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if int(n) != n or n < 8 or n % 2:
                raise ValueError(f"{name} must be an even integer >= 8, got {n!r}")
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError("domain lengths must be positive")
        if not (0.0 < self.dealias_fraction <= 1.0):
            raise ValueError("dealias_fraction must lie in (0, 1]")

        kx = _wavenumbers(self.nx, self.lx)[:, None]
        ky = np.fft.rfftfreq(self.ny, d=1.0 / self.ny)[None, :] * (2.0 * np.pi / self.ly)
        mx = np.abs(np.fft.fftfreq(self.nx, d=1.0 / self.nx))[:, None]
        my = np.fft.rfftfreq(self.ny, d=1.0 / self.ny)[None, :]
        mask = (mx < self.dealias_fraction * self.nx / 2) & (my < self.dealias_fraction * self.ny / 2)
        k2 = kx**2 + ky**2
        k2_safe = k2.copy()
        k2_safe[0, 0] = 1.0
        # rfft2 stores half the spectrum; weights restore full-spectrum sums
        weight = np.full(k2.shape, 2.0)
        weight[:, 0] = 1.0
        if self.ny % 2 == 0:
            weight[:, -1] = 1.0

        set_ = object.__setattr__
        set_(self, "kx", kx)
        set_(self, "ky", ky)
        set_(self, "k2", k2)
        set_(self, "k2_safe", k2_safe)
        set_(self, "mask", mask.astype(float))
        set_(self, "dkx", 1j * kx * mask)
        set_(self, "dky", 1j * ky * mask)
        set_(self, "spectral_weight", weight)
        keep = np.ones(k2.shape)
        keep[self.nx // 2, :] = 0.0
        keep[:, -1] = 0.0
        set_(self, "nyquist_free", keep)

    # geometry -------------------------------------------------------------
    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def dx(self):
        return self.lx / self.nx

    @property
    def dy(self):
        return self.ly / self.ny

    @property
    def cell_area(self):
        return self.dx * self.dy

    @property
    def area(self):
        return self.lx * self.ly

    def coords(self):
        x = np.arange(self.nx) * self.dx
        y = np.arange(self.ny) * self.dy
        return np.meshgrid(x, y, indexing="ij")

    @property
    def k_resolved_max(self):
        """Largest |k| kept by the dealiasing mask."""
        return float(np.sqrt(self.k2[self.mask > 0].max()))

    @property
    def k_grid_max(self):
        """Largest |k| present on the grid at all."""
        kx = np.abs(_wavenumbers(self.nx, self.lx)).max()
        ky = np.abs(_wavenumbers(self.ny, self.ly)).max()
        return float(np.hypot(kx, ky))

    # transforms -------------------------------------------------------------
    def fft(self, f):
        return sfft.rfft2(f, axes=(-2, -1), workers=self.workers)

    def ifft(self, fh):
        return sfft.irfft2(fh, s=self.shape, axes=(-2, -1), workers=self.workers)

    # quadrature -------------------------------------------------------------
    def integrate(self, f):
        """Grid quadrature over the two trailing axes."""
        return np.sum(f, axis=(-2, -1)) * self.cell_area

    def inner(self, f, g):
        return float(np.sum(f * g) * self.cell_area)

    def norm(self, f):
        return float(np.sqrt(self.inner(f, f)))


# differential operators ----------------------------------------------------

def ddx(grid, f, axis):
    """Dealiased spectral derivative along ``axis`` (1 = x, 2 = y)."""
    if axis == 1:
        sym = grid.dkx
    elif axis == 2:
        sym = grid.dky
    else:
        raise ValueError("axis must be 1 or 2")
    return grid.ifft(sym * grid.fft(f))


def gradient(grid, f):
    """Stack ``(d1 f, d2 f)`` along a new leading axis."""
    fh = grid.fft(f)
    return np.stack([grid.ifft(grid.dkx * fh), grid.ifft(grid.dky * fh)])


def divergence(grid, w):
    """Planar divergence d1 w[0] + d2 w[1]."""
    wh = grid.fft(w[:2])
    return grid.ifft(grid.dkx * wh[0] + grid.dky * wh[1])


def laplacian(grid, f):
    return grid.ifft(-grid.k2 * grid.mask * grid.fft(f))


def curl3(grid, u):
    """Curl of a 3-vector field with no x3 dependence."""
    uh = grid.fft(u)
    out = np.empty(np.broadcast_shapes(u.shape), dtype=float)
    out[0] = grid.ifft(grid.dky * uh[2])
    out[1] = grid.ifft(-grid.dkx * uh[2])
    out[2] = grid.ifft(grid.dkx * uh[1] - grid.dky * uh[0])
    return out


def vorticity(grid, v):
    vh = grid.fft(v)
    return grid.ifft(grid.dkx * vh[1] - grid.dky * vh[0])


def dealias(grid, f):
    return grid.ifft(grid.mask * grid.fft(f))


# projection, filtering, Poisson ------------------------------------------

def leray_hat(grid, wh):
    """Leray projection acting on spectral coefficients of shape (2, ...).

    Unmatched Nyquist modes are dropped: their conjugate partner aliases to
    a different wavevector, so no real projector exists there.
    """
    kdotw = (grid.kx * wh[0] + grid.ky * wh[1]) / grid.k2_safe
    return grid.nyquist_free * np.stack([wh[0] - grid.kx * kdotw, wh[1] - grid.ky * kdotw])


def leray_project(grid, w):
    """Divergence-free part of a planar vector field; the mean is kept."""
    return grid.ifft(leray_hat(grid, grid.fft(w)))


def cutoff_symbol(r):
    """Smooth radial cutoff: 1 on [0, 1], cos^2 ramp on (1, 2), 0 beyond."""
    r = np.asarray(r, dtype=float)
    ramp = np.cos(0.5 * np.pi * (r - 1.0)) ** 2
    return np.where(r <= 1.0, 1.0, np.where(r >= 2.0, 0.0, ramp))


def mollifier_symbol(grid, cutoff_radius):
    if not cutoff_radius > 0:
        raise ValueError("cutoff_radius must be positive")
    return cutoff_symbol(np.sqrt(grid.k2) / cutoff_radius)


def mollify(grid, f, cutoff_radius):
    """Fourier low-pass filter keeping |k| <= cutoff_radius untouched.

    Larger ``cutoff_radius`` means milder smoothing; modes with
    ``|k| >= 2 * cutoff_radius`` are removed.
    """
    return grid.ifft(mollifier_symbol(grid, cutoff_radius) * grid.fft(f))


def invert_laplacian(grid, f):
    """Zero-mean solution u of  Laplace(u) = f - mean(f)."""
    fh = grid.fft(f)
    uh = -fh / grid.k2_safe
    uh[..., 0, 0] = 0.0
    return grid.ifft(uh)


def spectral_norm(grid, f):
    """L2 norm computed from Fourier coefficients (Parseval)."""
    fh = grid.fft(f)
    n = grid.nx * grid.ny
    s = np.sum(grid.spectral_weight * np.abs(fh) ** 2)
    return float(np.sqrt(s * grid.area / n**2))
