"""Initial-condition presets.

Every frame is the identity frame rotated pointwise by a smooth rotation
field, so it is orthonormal to roundoff.  Velocities are dealiased and
Leray-projected.
"""

import numpy as np

from ..errors import SpecError
from ..frame import identity_frame, rodrigues_rotate
from ..grid import leray_project

PRESETS = {
    "uniform": {},
    "twist": {"amplitude": 0.5, "mode": 1},
    "biaxial_bump": {"amplitude": 1.0, "width": 0.5},
    "taylor_green": {"v_amplitude": 1.0},
    "random_smooth": {"seed": 0, "band": 4, "amplitude": 1.0, "v_amplitude": 0.5},
}
# any preset may also carry velocity_amplitude: adds a Taylor-Green flow
SHARED = {"velocity_amplitude": 0.0}


def parse_initial_spec(spec):
    if isinstance(spec, str):
        spec = {"preset": spec}
    spec = dict(spec)
    name = spec.pop("preset", None)
    if name not in PRESETS:
        raise SpecError(f"unknown initial-condition preset {name!r}; "
                        f"expected one of {sorted(PRESETS)}")
    allowed = {**PRESETS[name], **SHARED}
    unknown = set(spec) - set(allowed)
    if unknown:
        raise SpecError(f"preset {name!r} does not accept {sorted(unknown)}")
    out = {**allowed, **spec}
    for key, val in out.items():
        if isinstance(val, bool) or not isinstance(val, (int, float)) or not np.isfinite(val):
            raise SpecError(f"{name}.{key} must be a finite number, got {val!r}")
    return name, out


def taylor_green_velocity(grid, amplitude):
    x, y = grid.coords()
    kx, ky = 2 * np.pi / grid.lx, 2 * np.pi / grid.ly
    return amplitude * np.stack([np.sin(kx * x) * np.cos(ky * y),
                                 -(ky / kx) * np.cos(kx * x) * np.sin(ky * y)])


def _rotated(grid, axis_angle):
    return rodrigues_rotate(identity_frame(grid.shape), axis_angle, 1.0)


def band_limited_fields(grid, rng, band, count):
    """``count`` real random fields with Fourier support in |m| <= band, unit max."""
    shape = (count,) + grid.ifft(np.zeros(grid.k2.shape, complex)).shape
    mx = np.abs(np.fft.fftfreq(grid.nx, d=1.0 / grid.nx))[:, None]
    my = np.fft.rfftfreq(grid.ny, d=1.0 / grid.ny)[None, :]
    keep = (np.hypot(mx, my) <= band) & (grid.mask > 0)
    coef = rng.normal(size=(count,) + grid.k2.shape) + 1j * rng.normal(size=(count,) + grid.k2.shape)
    f = grid.ifft(coef * keep)
    scale = np.max(np.abs(f.reshape(count, -1)), axis=1)
    scale[scale == 0] = 1.0
    return (f / scale.reshape((count,) + (1,) * (len(shape) - 1)))


def make_initial(spec, grid):
    """Return ``(p, v)`` for a preset given as a name or a dict with key ``preset``."""
    name, prm = parse_initial_spec(spec)
    x, y = grid.coords()
    v = np.zeros((2,) + grid.shape)

    if name == "uniform":
        p = identity_frame(grid.shape)
    elif name == "twist":
        mode = prm["mode"]
        if int(mode) != mode or mode < 1:
            raise SpecError("twist.mode must be a positive integer")
        theta = prm["amplitude"] * np.sin(2 * np.pi * mode * x / grid.lx)
        # rotation about n1 with angle varying along x
        p = _rotated(grid, np.stack([theta, np.zeros_like(x), np.zeros_like(x)]))
    elif name == "biaxial_bump":
        w = prm["width"]
        if not w > 0:
            raise SpecError("biaxial_bump.width must be positive")
        dx = grid.lx / np.pi * np.sin(np.pi * (x - grid.lx / 2) / grid.lx)
        dy = grid.ly / np.pi * np.sin(np.pi * (y - grid.ly / 2) / grid.ly)
        theta = prm["amplitude"] * np.exp(-(dx**2 + dy**2) / (2 * w * w))
        axis = np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0)
        p = _rotated(grid, axis[:, None, None] * theta)
    elif name == "taylor_green":
        p = identity_frame(grid.shape)
        v = taylor_green_velocity(grid, prm["v_amplitude"])
    else:
        band = prm["band"]
        if not band >= 1:
            raise SpecError("random_smooth.band must be >= 1")
        rng = np.random.default_rng(int(prm["seed"]))
        rot = band_limited_fields(grid, rng, band, 3) * prm["amplitude"]
        p = _rotated(grid, rot)
        v = band_limited_fields(grid, rng, band, 2) * prm["v_amplitude"]

    if prm["velocity_amplitude"]:
        v = v + taylor_green_velocity(grid, prm["velocity_amplitude"])
    v = leray_project(grid, grid.ifft(grid.mask * grid.fft(v)))
    return np.ascontiguousarray(p), v
