"""
Which viscosity coefficients dissipate
======================================

The admissibility report lists each inequality with its margin.  A violated
beta inequality comes with a frame and strain that make the beta block negative.
"""

import numpy as np

from framehydro.frame import tensor_basis
from framehydro.hydro import (HydroCoefficients, StrainRotation, beta_block,
                              strain_projections, validate_coefficients)

print(validate_coefficients(HydroCoefficients()))
print()

bad = HydroCoefficients(beta=[1.5, 1.0, 1.0, 1.0, 1.0, 1.0])
print(validate_coefficients(bad))

# negative eigenvector of [[b1, b0], [b0, b2]] realized by a frame under A = diag(1, -1, 0)
b = bad.beta
_, vecs = np.linalg.eigh([[b[1], b[0]], [b[0], b[2]]])
e = vecs[:, 0] * np.sign(vecs[0, 0])
x1 = e[0] / (e[0] + abs(e[1]))
theta = np.arccos(np.sqrt(x1))
psi = 0.5 * np.arccos(-(1 - x1) * np.sign(e[1]) / (1 + np.sin(theta) ** 2))
u = np.array([-np.sin(theta), 0, np.cos(theta)])
n1 = np.array([np.cos(theta), 0, np.sin(theta)])
n2 = np.cos(psi) * np.array([0, 1.0, 0]) + np.sin(psi) * u
p = np.stack([n1, n2, np.cross(n1, n2)])[..., None]
A = np.diag([1.0, -1.0, 0.0])[..., None]
x, _ = strain_projections(StrainRotation(A, A, 0 * A), tensor_basis(p))
print(f"\nwitness x1={x[0, 0]:.4f} x2={x[1, 0]:.4f}  beta block = {beta_block(x, bad)[0]:.4f}")
