"""Velocity-gradient kinematics, frame angular rates, stress, body force
and the dissipation functional."""

from dataclasses import dataclass, field

import numpy as np

from .frame import contract, dot

CONDITION_LABELS = {
    "beta0": "beta0^2 <= beta1*beta2",
    "eta1": "eta1^2 <= beta5*chi1",
    "eta2": "eta2^2 <= beta4*chi2",
    "eta3": "eta3^2 <= beta3*chi3",
}


@dataclass(frozen=True)
class HydroCoefficients:
    beta: np.ndarray = field(default_factory=lambda: np.array([0.3, 1, 1, 1, 1, 1], dtype=float))
    eta: float = 1.0
    eta_rot: np.ndarray = field(default_factory=lambda: np.full(3, 0.5))
    chi: np.ndarray = field(default_factory=lambda: np.ones(3))

    def __post_init__(self):
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=float).reshape(6))
        object.__setattr__(self, "eta_rot", np.asarray(self.eta_rot, dtype=float).reshape(3))
        object.__setattr__(self, "chi", np.asarray(self.chi, dtype=float).reshape(3))
        object.__setattr__(self, "eta", float(self.eta))

    def aniso_coefficients(self):
        """beta3 - eta3^2/chi3, beta4 - eta2^2/chi2, beta5 - eta1^2/chi1."""
        b, e, c = self.beta, self.eta_rot, self.chi
        return np.array([b[3] - e[2] ** 2 / c[2], b[4] - e[1] ** 2 / c[1], b[5] - e[0] ** 2 / c[0]])

    def explicit_viscosity(self):
        """Bound on the explicitly integrated stress stiffness per unit |k|^2."""
        b = self.beta
        block = 0.5 * (b[1] + b[2] + np.hypot(b[1] - b[2], 2 * b[0]))
        coupling = np.max(self.eta_rot**2 / self.chi) + 0.25 / np.min(self.chi)
        return float(2.0 * block + max(b[3:].max(), 0.0) + coupling)


@dataclass
class Condition:
    name: str
    lhs: float
    rhs: float
    strict: bool = False

    @property
    def margin(self):
        return self.rhs - self.lhs

    @property
    def passed(self):
        m = self.margin
        return bool(m > 0) if self.strict else bool(m >= 0)


@dataclass
class AdmissibilityReport:
    conditions: list

    @property
    def ok(self):
        return all(c.passed for c in self.conditions)

    @property
    def failed(self):
        return [c for c in self.conditions if not c.passed]

    def __str__(self):
        lines = []
        for c in self.conditions:
            status = "pass" if c.passed else "FAIL"
            lines.append(f"{status}  {c.name:28s} margin={c.margin:+.6g}")
        return "\n".join(lines)


def validate_coefficients(hc):
    """Check the non-negative definiteness conditions; never raises."""
    b, e, c = hc.beta, hc.eta_rot, hc.chi
    conds = [Condition(f"beta{i} >= 0", 0.0, b[i]) for i in range(1, 6)]
    conds += [Condition(f"chi{j + 1} > 0", 0.0, c[j], strict=True) for j in range(3)]
    conds.append(Condition("eta > 0", 0.0, hc.eta, strict=True))
    conds.append(Condition(CONDITION_LABELS["beta0"], b[0] ** 2, b[1] * b[2]))
    conds.append(Condition(CONDITION_LABELS["eta1"], e[0] ** 2, b[5] * c[0]))
    conds.append(Condition(CONDITION_LABELS["eta2"], e[1] ** 2, b[4] * c[1]))
    conds.append(Condition(CONDITION_LABELS["eta3"], e[2] ** 2, b[3] * c[2]))
    return AdmissibilityReport(conds)


# kinematics ------------------------------------------------------------------------

@dataclass
class StrainRotation:
    """kappa[i, j] = d_j v_i padded to 3x3, A its symmetric and Omega its skew part."""

    kappa: np.ndarray
    A: np.ndarray
    Omega: np.ndarray


def strain_rotation_from_gradient(kappa2):
    """Build A and Omega from the planar gradient kappa2[i, j] = d_j v_i."""
    shape = kappa2.shape[2:]
    kappa = np.zeros((3, 3) + shape)
    kappa[:2, :2] = kappa2
    kt = np.swapaxes(kappa, 0, 1)
    return StrainRotation(kappa=kappa, A=0.5 * (kappa + kt), Omega=0.5 * (kappa - kt))


def strain_rotation(grid, v):
    vh = grid.fft(v)
    kappa2 = np.stack([grid.ifft(grid.dkx * vh), grid.ifft(grid.dky * vh)], axis=1)
    return strain_rotation_from_gradient(kappa2)


def strain_projections(sr, tb):
    """x_k = A . s_k (five fields) and w_k = Omega . a_k (three fields)."""
    x = np.einsum("ab...,kab...->k...", sr.A, tb.s)         # A . s_k
    w = np.einsum("ab...,kab...->k...", sr.Omega, tb.a)     # Omega . a_k
    return x, w


def angular_rates(sr, tb, lf, hc):
    """The three scalar brackets c_k; the frame rotates with sum_k c_k n_k."""
    x, w = strain_projections(sr, tb)
    e, chi = hc.eta_rot, hc.chi
    return np.stack([
        0.5 * w[2] + e[0] / chi[0] * x[4] - lf[0] / chi[0],
        0.5 * w[1] + e[1] / chi[1] * x[3] - lf[1] / chi[1],
        0.5 * w[0] + e[2] / chi[2] * x[2] - lf[2] / chi[2],
    ])


def rotation_vector(p, rates):
    """omega = c1 n1 + c2 n2 + c3 n3."""
    return np.einsum("k...,kc...->c...", rates, p)


def frame_velocity(p, rates):
    """Time derivatives of n1, n2, n3 induced by the angular rates."""
    c1, c2, c3 = rates
    n1, n2, n3 = p
    return np.stack([c3 * n2 - c2 * n3, -c3 * n1 + c1 * n3, c2 * n1 - c1 * n2])


def stress(sr, tb, lf, hc):
    """Stress tensor with time derivatives eliminated through the frame equations."""
    x, _ = strain_projections(sr, tb)
    b, e, chi = hc.beta, hc.eta_rot, hc.chi
    s, a = tb.s, tb.a
    an = hc.aniso_coefficients()
    sig = (b[1] * x[0] + b[0] * x[1]) * s[0] + (b[0] * x[0] + b[2] * x[1]) * s[1]
    sig = sig + (an[0] * x[2] + e[2] / chi[2] * lf[2]) * s[2]
    sig = sig + (an[1] * x[3] + e[1] / chi[1] * lf[1]) * s[3]
    sig = sig + (an[2] * x[4] + e[0] / chi[0] * lf[0]) * s[4]
    sig = sig + 0.5 * (lf[2] * a[0] + lf[1] * a[1] + lf[0] * a[2])
    return sig


def stress_divergence(grid, sig):
    """Planar components of div(sigma): sum_j d_j sigma_ij, i = 1, 2."""
    sh = grid.fft(sig[:2, :2])
    return grid.ifft(grid.dkx * sh[:, 0] + grid.dky * sh[:, 1])


def body_force(grads, p, lf):
    """F_j = d_j n1.n2 L3 + d_j n3.n1 L2 + d_j n2.n3 L1 for j = 1, 2."""
    d = grads.d
    n1, n2, n3 = p
    return np.stack([
        dot(d[j, 0], n2) * lf[2] + dot(d[j, 2], n1) * lf[1] + dot(d[j, 1], n3) * lf[0]
        for j in range(2)
    ])


def beta_block(x, hc):
    """Pointwise beta1 x1^2 + 2 beta0 x1 x2 + beta2 x2^2."""
    b = hc.beta
    return b[1] * x[0] ** 2 + 2 * b[0] * x[0] * x[1] + b[2] * x[1] ** 2


def dissipation(grid, sr, tb, lf, hc):
    """Total dissipation rate and its named parts."""
    x, _ = strain_projections(sr, tb)
    an = hc.aniso_coefficients()
    integ = grid.integrate
    terms = {
        "viscous": hc.eta * float(integ(contract(sr.kappa, sr.kappa))),
        "rot1": float(integ(lf[0] ** 2)) / hc.chi[0],
        "rot2": float(integ(lf[1] ** 2)) / hc.chi[1],
        "rot3": float(integ(lf[2] ** 2)) / hc.chi[2],
        "beta_block": float(integ(beta_block(x, hc))),
        "aniso3": an[0] * float(integ(x[2] ** 2)),
        "aniso4": an[1] * float(integ(x[3] ** 2)),
        "aniso5": an[2] * float(integ(x[4] ** 2)),
    }
    return sum(terms.values()), terms


def dissipation_density(sr, tb, lf, hc):
    """Pointwise integrand of :func:`dissipation`."""
    x, _ = strain_projections(sr, tb)
    an = hc.aniso_coefficients()
    return (hc.eta * contract(sr.kappa, sr.kappa)
            + np.einsum("k,k...->...", 1.0 / hc.chi, lf**2)
            + beta_block(x, hc)
            + an[0] * x[2] ** 2 + an[1] * x[3] ** 2 + an[2] * x[4] ** 2)


def grouped_dissipation(terms):
    """Collapse named terms into viscous / rotational / anisotropic groups."""
    rot = terms["rot1"] + terms["rot2"] + terms["rot3"]
    beta = terms["beta_block"] + terms["aniso3"] + terms["aniso4"] + terms["aniso5"]
    return terms["viscous"], rot, beta
