"""Pointwise SO(3) frame algebra.

A frame is stored as an array ``p`` of shape ``(3, 3, ...)`` where ``p[i]``
is the unit vector ``n_{i+1}`` (component axis second).  Trailing axes are
arbitrary: a single frame is ``(3, 3)``, a batch is ``(3, 3, N)`` and a
field is ``(3, 3, nx, ny)``.  Second-order tensors are ``(3, 3, ...)``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFrame, FrameDefect

DEFECT_LIMIT = 1e-6

# Levi-Civita symbol
LEVI_CIVITA = np.zeros((3, 3, 3))
for _a, _b, _c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_a, _b, _c] = 1.0
    LEVI_CIVITA[_a, _c, _b] = -1.0


def identity_frame(shape=()):
    eye = np.eye(3)
    return np.broadcast_to(eye.reshape((3, 3) + (1,) * len(shape)), (3, 3) + tuple(shape)).copy()


def dot(a, b):
    return np.einsum("c...,c...->...", a, b)


def cross(a, b):
    return np.stack([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


def outer(a, b):
    return a[:, None] * b[None, :]


def contract(s, t):
    """Frobenius product S . T of tensor fields."""
    return np.einsum("ab...,ab...->...", s, t)


def frame_matrix(p):
    """Matrices with columns n1, n2, n3, shape (..., 3, 3)."""
    return np.moveaxis(np.moveaxis(p, 0, -1), 0, -2)


def from_matrix(m):
    return np.moveaxis(np.moveaxis(m, -1, 0), -1, 1)


def orthonormality_defect(p):
    """max |n_i . n_j - delta_ij| over all points (a scalar)."""
    gram = np.einsum("ic...,jc...->ij...", p, p)
    eye = np.eye(3).reshape((3, 3) + (1,) * (p.ndim - 2))
    return float(np.max(np.abs(gram - eye)))


def handedness(p):
    """Pointwise det[n1 n2 n3]."""
    return dot(cross(p[0], p[1]), p[2])


def check_frame(p, limit=DEFECT_LIMIT):
    d = orthonormality_defect(p)
    if not d <= limit:
        raise FrameDefect(f"orthonormality defect {d:.3e} exceeds {limit:.1e}")
    return d


# local tensor basis ----------------------------------------------------------

@dataclass
class TensorBasis:
    """s[0..4] = s1..s5 (symmetric traceless), a[0..2] = a1..a3 (antisymmetric)."""

    s: np.ndarray
    a: np.ndarray


def tensor_basis(p, check=True):
    """The eight traceless tensors built from a frame.

    ``check=False`` skips the SO(3) test; the mollified system evaluates the
    same expressions on non-orthonormal triads.
    """
    if check:
        check_frame(p)
    n1, n2, n3 = p[0], p[1], p[2]
    eye = np.eye(3).reshape((3, 3) + (1,) * (p.ndim - 2))
    o11, o22, o33 = outer(n1, n1), outer(n2, n2), outer(n3, n3)
    o12, o13, o23 = outer(n1, n2), outer(n1, n3), outer(n2, n3)
    o21, o31, o32 = np.swapaxes(o12, 0, 1), np.swapaxes(o13, 0, 1), np.swapaxes(o23, 0, 1)
    s = np.stack([
        o11 - eye / 3.0,
        o22 - o33,
        0.5 * (o12 + o21),
        0.5 * (o13 + o31),
        0.5 * (o23 + o32),
    ])
    a = np.stack([o23 - o32, o31 - o13, o12 - o21])
    return TensorBasis(s=s, a=a)


# tangent / normal bases ------------------------------------------------------

def tangent_basis(p):
    """V (3, ...) and W (6, ...) as 3x3 matrices whose columns are the triple slots.

    Returned arrays have shape ``(3, 3, 3, ...)`` and ``(6, 3, 3, ...)`` indexed
    ``[k, component, slot]`` so that ``contract(A, V[k])`` is ``A . V_k``.
    """
    n1, n2, n3 = p[0], p[1], p[2]
    z = np.zeros_like(n1)
    triples_v = [(z, n3, -n2), (-n3, z, n1), (n2, -n1, z)]
    triples_w = [(z, n3, n2), (n3, z, n1), (n2, n1, z), (n1, z, z), (z, n2, z), (z, z, n3)]
    V = np.stack([np.stack(t, axis=1) for t in triples_v])
    W = np.stack([np.stack(t, axis=1) for t in triples_w])
    return V, W


def inner_decomposition_check(A, B, p):
    """Both sides of the tangent/normal splitting of the matrix inner product.

    ``A`` and ``B`` are ``(3, 3, ...)`` matrices, ``p`` a frame broadcastable
    against them.  Returns ``(lhs, rhs)``.
    """
    check_frame(p)
    V, W = tangent_basis(p)
    lhs = contract(A, B)
    rhs = 0.0
    for basis in (V, W):
        for E in basis:
            rhs = rhs + contract(A, E) * contract(B, E) / contract(E, E)
    return lhs, rhs


def script_l_on_frame(p, k):
    """Infinitesimal rotation about n_k applied to each frame vector.

    Returns the triple (L_k n1, L_k n2, L_k n3) with L_k n_p = eps^{kpq} n_q.
    """
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2 or 3")
    eps = LEVI_CIVITA[k - 1]
    return np.einsum("pq,qc...->pc...", eps, p)


# rotations -------------------------------------------------------------------

def _rotation_coefficients(theta):
    """sin(t)/t and (1 - cos t)/t^2 with series fallback near zero."""
    small = theta < 1e-4
    t = np.where(small, 1.0, theta)
    t2 = theta * theta
    a = np.where(small, 1.0 - t2 / 6.0 + t2 * t2 / 120.0, np.sin(t) / t)
    b = np.where(small, 0.5 - t2 / 24.0 + t2 * t2 / 720.0, 2.0 * np.sin(0.5 * t) ** 2 / (t * t))
    return a, b


def _phi1_coefficients(theta):
    """(1 - cos t)/t^2 and (t - sin t)/t^3 with series fallback near zero."""
    small = theta < 1e-3
    t = np.where(small, 1.0, theta)
    t2 = theta * theta
    b = np.where(small, 0.5 - t2 / 24.0 + t2 * t2 / 720.0, 2.0 * np.sin(0.5 * t) ** 2 / (t * t))
    c = np.where(small, 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0, (t - np.sin(t)) / t**3)
    return b, c


def cross_each(w, p):
    """w x n_i for every vector of a triad ``p`` (3, 3, ...)."""
    out = np.empty(np.broadcast_shapes(p.shape, (3,) + np.shape(w)))
    out[:, 0] = w[1] * p[:, 2] - w[2] * p[:, 1]
    out[:, 1] = w[2] * p[:, 0] - w[0] * p[:, 2]
    out[:, 2] = w[0] * p[:, 1] - w[1] * p[:, 0]
    return out


def rotate_vectors(x, omega, dt):
    """Apply exp(dt [omega]_x) to vectors x of shape (3, ...) or (m, 3, ...)."""
    w = np.asarray(omega, dtype=float) * dt
    theta = np.sqrt(dot(w, w))
    a, b = _rotation_coefficients(theta)
    if x.ndim == w.ndim:
        wx = cross(w, x)
        return x + a * wx + b * cross(w, wx)
    wx = cross_each(w, x)
    return x + a * wx + b * cross_each(w, wx)


def rodrigues_rotate(p, omega, dt):
    """Rotate every frame vector by the rotation exp(dt [omega]_x)."""
    w = np.asarray(omega, dtype=float)
    if dt == 0 or not np.any(w):
        return p.copy()
    return rotate_vectors(p, w, dt)


def affine_flow(p, omega, drift, dt):
    """Exact flow over time dt of  n_i' = omega x n_i + drift_i  with frozen data.

    With ``drift = 0`` this is :func:`rodrigues_rotate`.
    """
    out = rodrigues_rotate(p, omega, dt)
    if drift is None or (np.isscalar(drift) and drift == 0):
        return out
    w = np.asarray(omega, dtype=float) * dt
    theta = np.sqrt(dot(w, w))
    b, c = _phi1_coefficients(theta)
    r = np.asarray(drift) * dt
    wr = cross_each(w, r)
    return out + r + b * wr + c * cross_each(w, wr)


def _polar_newton(m, tol=1e-13, max_iter=50):
    x = m.copy()
    converged = False
    for _ in range(max_iter):
        try:
            xinv_t = np.swapaxes(np.linalg.inv(x), -1, -2)
        except np.linalg.LinAlgError as exc:
            raise DegenerateFrame("singular frame matrix") from exc
        # scaled Newton iteration, scale |det|^(-1/3)
        g = np.abs(np.linalg.det(x))[..., None, None] ** (-1.0 / 3.0)
        x_new = 0.5 * (g * x + xinv_t / g)
        delta = np.max(np.abs(x_new - x))
        x = x_new
        if converged:
            break
        # quadratic convergence: one more sweep after tol reaches roundoff
        converged = delta < tol
    return x


def _newton_schulz(p, max_iter=8):
    """Polar factor of near-orthonormal triads: n_j <- sum_i n_i (3 delta_ij - G_ij) / 2."""
    eye = np.eye(3).reshape((3, 3) + (1,) * (p.ndim - 2))
    for _ in range(max_iter):
        gram = np.einsum("ic...,jc...->ij...", p, p)
        err = float(np.max(np.abs(gram - eye)))
        if err < 1e-15:
            break
        p = np.einsum("ic...,ij...->jc...", p, 0.5 * (3.0 * eye - gram))
    return p


def reproject_so3(p):
    """Nearest rotation to each near-frame (orthogonal polar factor)."""
    defect = orthonormality_defect(p)
    if not np.isfinite(defect):
        raise DegenerateFrame("non-finite frame")
    if defect < 0.1:
        # Newton-Schulz converges quadratically when |G - I| < 1
        q = _newton_schulz(p)
    else:
        m = frame_matrix(p)
        det = np.linalg.det(m)
        if np.any(np.abs(det) < 1e-12):
            raise DegenerateFrame("singular frame matrix")
        q = from_matrix(_polar_newton(m))
    if np.any(handedness(q) < 0):
        raise DegenerateFrame("frame matrix has a reflection-like polar factor")
    return np.ascontiguousarray(q)


def random_rotations(rng, n):
    """n Haar-random frames as an array (3, 3, n)."""
    q = rng.normal(size=(n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    w, x, y, z = q.T
    m = np.empty((n, 3, 3))
    m[:, 0, 0] = 1 - 2 * (y * y + z * z)
    m[:, 0, 1] = 2 * (x * y - z * w)
    m[:, 0, 2] = 2 * (x * z + y * w)
    m[:, 1, 0] = 2 * (x * y + z * w)
    m[:, 1, 1] = 1 - 2 * (x * x + z * z)
    m[:, 1, 2] = 2 * (y * z - x * w)
    m[:, 2, 0] = 2 * (x * z - y * w)
    m[:, 2, 1] = 2 * (y * z + x * w)
    m[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return from_matrix(m)
