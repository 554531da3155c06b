"""Biaxial orientational elasticity on a periodic frame field.

The energy is evaluated in the rewritten form

    f = 1/2 sum_i gamma_i |grad n_i|^2
        + 1/2 (sum_i k_i (div n_i)^2 + sum_ij k_ij (n_i . curl n_j)^2)

which is a quadratic form on arbitrary triads.  Its exact discrete
gradient is minus the molecular field assembled in
:func:`molecular_fields`, because every derivative uses the same
skew-adjoint spectral operator.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidCoefficients
from .frame import check_frame, cross, dot

# K index (0-based) of the bulk term (n_i . curl n_j)^2, keyed by (i, j)
TWIST_INDEX = {
    (0, 0): 3, (1, 1): 4, (2, 2): 5,
    (2, 0): 6, (0, 1): 7, (1, 2): 8,
    (1, 0): 9, (2, 1): 10, (0, 2): 11,
}
GROUPS = ((0, 3, 6, 9), (1, 4, 7, 10), (2, 5, 8, 11))

BULK_LABELS = (
    "div n1", "div n2", "div n3",
    "n1.curl n1", "n2.curl n2", "n3.curl n3",
    "n3.curl n1", "n1.curl n2", "n2.curl n3",
    "n2.curl n1", "n3.curl n2", "n1.curl n3",
)


@dataclass(frozen=True)
class ElasticCoefficients:
    K: np.ndarray        # K1..K12
    gamma: np.ndarray    # gamma1..gamma3
    k_div: np.ndarray    # k1..k3
    k_twist: np.ndarray  # k_twist[i, j] weights (n_i . curl n_j)^2

    def scaled(self, factor):
        return derive_coefficients(np.asarray(self.K) * factor)

    def stiffness(self):
        """Upper bound on the linear elastic symbol per unit |k|^2."""
        lin = self.gamma + self.k_div + self.k_twist.sum(axis=0)
        return float(lin.max())


def derive_coefficients(K):
    """Split the twelve bulk constants into gamma_i, k_i and k_ij."""
    K = np.asarray(K, dtype=float).reshape(-1)
    if K.shape != (12,):
        raise InvalidCoefficients(f"expected 12 elastic constants, got {K.size}")
    for i, val in enumerate(K):
        if not np.isfinite(val) or val < 0:
            raise InvalidCoefficients(f"K{i + 1} = {val} must be a finite non-negative number")
    gamma = np.array([K[list(g)].min() for g in GROUPS])
    for i, g in enumerate(gamma):
        if g <= 0:
            names = ", ".join(f"K{j + 1}" for j in GROUPS[i])
            raise InvalidCoefficients(f"gamma{i + 1} = min({names}) must be positive")
    k_div = K[:3] - gamma
    k_twist = np.zeros((3, 3))
    for (i, j), idx in TWIST_INDEX.items():
        k_twist[i, j] = K[idx] - gamma[j]
    return ElasticCoefficients(K=K, gamma=gamma, k_div=k_div, k_twist=k_twist)


# kinematics --------------------------------------------------------------------

@dataclass
class FrameGradients:
    """Spectral derivatives of a frame field.

    ``d[j, i]`` is the derivative of n_{i+1} along x_{j+1} (shape (2, 3, 3, nx, ny)),
    ``div[i]`` and ``curl[i]`` the divergence and curl of n_{i+1}.
    """

    p_hat: np.ndarray
    d: np.ndarray
    div: np.ndarray
    curl: np.ndarray

    def twist(self, p):
        """twist[i, j] = n_i . curl n_j."""
        return np.einsum("ic...,jc...->ij...", p, self.curl)

    def grad_sq(self):
        """|grad n_i|^2 for each i, shape (3, nx, ny)."""
        return np.einsum("jic...,jic...->i...", self.d, self.d)


def frame_gradients(grid, p):
    ph = grid.fft(p)
    d = np.stack([grid.ifft(grid.dkx * ph), grid.ifft(grid.dky * ph)])
    div = d[0, :, 0] + d[1, :, 1]
    curl = np.stack([d[1, :, 2], -d[0, :, 2], d[0, :, 1] - d[1, :, 0]], axis=1)
    return FrameGradients(p_hat=ph, d=d, div=div, curl=curl)


# energy ------------------------------------------------------------------------------

def _w_density(coeffs, g, twist):
    w = np.einsum("i,i...->...", coeffs.k_div, g.div**2)
    w = w + np.einsum("ij,ij...->...", coeffs.k_twist, twist**2)
    return 0.5 * w


def energy_density(grid, p, coeffs, check=True, grads=None):
    """Pointwise rewritten elastic density (non-negative)."""
    if check:
        check_frame(p)
    g = grads if grads is not None else frame_gradients(grid, p)
    dirichlet = 0.5 * np.einsum("i,i...->...", coeffs.gamma, g.grad_sq())
    return dirichlet + _w_density(coeffs, g, g.twist(p))


def elastic_energy(grid, p, coeffs, grads=None):
    """Total rewritten energy; defined for arbitrary (non-orthonormal) triads."""
    return float(grid.integrate(energy_density(grid, p, coeffs, check=False, grads=grads)))


@dataclass
class EnergyBreakdown:
    total: float
    per_term: np.ndarray           # 12 bulk + 3 surface integrals
    rewritten_dirichlet: np.ndarray
    rewritten_w: float

    @property
    def bulk(self):
        return self.per_term[:12]

    @property
    def surface(self):
        return self.per_term[12:]

    @property
    def rewritten_total(self):
        return float(self.rewritten_dirichlet.sum() + self.rewritten_w)


def surface_densities(g):
    """div[(n.grad)n - (div n) n] expanded pointwise, for each frame vector.

    With no x3 dependence the second derivatives cancel and what remains is
    -2 times the planar Jacobian determinant of (n_x, n_y).
    """
    d1, d2 = g.d[0], g.d[1]
    return 2.0 * (d1[:, 1] * d2[:, 0] - d1[:, 0] * d2[:, 1])


def energy_breakdown(grid, p, coeffs):
    """Evaluate the fifteen-term form and the rewritten form side by side."""
    check_frame(p)
    g = frame_gradients(grid, p)
    twist = g.twist(p)
    K = coeffs.K
    bulk = np.empty(12)
    for i in range(3):
        bulk[i] = 0.5 * K[i] * grid.integrate(g.div[i] ** 2)
    for (i, j), idx in TWIST_INDEX.items():
        bulk[idx] = 0.5 * K[idx] * grid.integrate(twist[i, j] ** 2)
    surface = 0.5 * coeffs.gamma * grid.integrate(surface_densities(g))
    dirichlet = 0.5 * coeffs.gamma * grid.integrate(g.grad_sq())
    w = float(grid.integrate(_w_density(coeffs, g, twist)))
    per_term = np.concatenate([bulk, surface])
    return EnergyBreakdown(total=float(per_term.sum()), per_term=per_term,
                           rewritten_dirichlet=dirichlet, rewritten_w=w)


# variational derivatives -------------------------------------------------------

def molecular_fields(grid, p, coeffs, check=True, grads=None):
    """h_i = -dF/dn_i for i = 1..3, shape (3, 3, nx, ny)."""
    if check:
        check_frame(p)
    g = grads if grads is not None else frame_gradients(grid, p)
    ph = g.p_hat
    lap = -grid.k2 * grid.mask
    h_hat = coeffs.gamma[:, None, None, None] * lap * ph
    kd = coeffs.k_div
    if np.any(kd):
        div_hat = grid.dkx * ph[:, 0] + grid.dky * ph[:, 1]
        h_hat[:, 0] += kd[:, None, None] * grid.dkx * div_hat
        h_hat[:, 1] += kd[:, None, None] * grid.dky * div_hat
    h_point = 0.0
    kt = coeffs.k_twist
    if np.any(kt):
        twist = g.twist(p)
        # Q_i = sum_j k_ji (n_j . curl n_i) n_j, differentiated by curl
        q = np.einsum("ji,ji...,jc...->ic...", kt, twist, p)
        qh = grid.fft(q)
        h_hat[:, 0] -= grid.dky * qh[:, 2]
        h_hat[:, 1] -= -grid.dkx * qh[:, 2]
        h_hat[:, 2] -= grid.dkx * qh[:, 1] - grid.dky * qh[:, 0]
        h_point = -np.einsum("ij,ij...,jc...->ic...", kt, twist, g.curl)
    return grid.ifft(h_hat) + h_point


def rotational_derivatives(p, h):
    """L_k F for k = 1..3 from the molecular fields, shape (3, nx, ny)."""
    n1, n2, n3 = p[0], p[1], p[2]
    h1, h2, h3 = h[0], h[1], h[2]
    return np.stack([
        dot(n2, h3) - dot(n3, h2),
        dot(n3, h1) - dot(n1, h3),
        dot(n1, h2) - dot(n2, h1),
    ])


def rotation_generator_from_molecular(p, h):
    """sum_i n_i x h_i; its projection on n_k is -L_k F."""
    return cross(p[0], h[0]) + cross(p[1], h[1]) + cross(p[2], h[2])


def gradient_check_oracle(grid, p, coeffs, direction, eps):
    """Central difference of the energy along ``direction`` (a frame-shaped array)."""
    if not (1e-7 <= eps <= 1e-3):
        raise ValueError("eps must lie in [1e-7, 1e-3]")
    plus = elastic_energy(grid, p + eps * direction, coeffs)
    minus = elastic_energy(grid, p - eps * direction, coeffs)
    return (plus - minus) / (2.0 * eps)

