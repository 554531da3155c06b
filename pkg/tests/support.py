"""Shared generators for the test modules."""

import numpy as np

from framehydro.hydro import HydroCoefficients, StrainRotation


def random_admissible(rng, slack=1.0):
    """Coefficients drawn inside the admissible region (``slack`` <= 1 scales the couplings)."""
    b = rng.uniform(0.1, 2.0, 6)
    b[0] = slack * rng.uniform(-1, 1) * np.sqrt(b[1] * b[2])
    chi = rng.uniform(0.2, 2.0, 3)
    # eta1 pairs with beta5, eta2 with beta4, eta3 with beta3
    bound = np.sqrt(np.array([b[5], b[4], b[3]]) * chi)
    eta_rot = slack * rng.uniform(-1, 1, 3) * bound
    return HydroCoefficients(beta=b, eta=rng.uniform(0.1, 2.0), eta_rot=eta_rot, chi=chi)


def random_strain(rng, n):
    kappa = rng.normal(size=(3, 3, n))
    kt = np.swapaxes(kappa, 0, 1)
    return StrainRotation(kappa=kappa, A=0.5 * (kappa + kt), Omega=0.5 * (kappa - kt))
