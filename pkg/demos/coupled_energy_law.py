"""
Energy balance of the coupled flow
==================================

Twisted frame plus a Taylor-Green vortex.  The chained right-hand sides give
dE/dt = -D to roundoff; sampled energies reproduce it at second order in dt.
"""

from framehydro.cli_io.initial import make_initial
from framehydro.diagnostics import energy_law_residual, total_energy
from framehydro.grid import Grid2D
from framehydro.integrator import (Coefficients, IntegratorConfig, SimState, energy_rate,
                                   stability_limit, step)

grid = Grid2D(64, 64)
coeffs = Coefficients.default()
p, v = make_initial({"preset": "twist", "amplitude": 0.8, "velocity_amplitude": 1.0}, grid)
s0 = SimState(0.0, p, v)

dedt, dissipation = energy_rate(grid, s0, coeffs)
print(f"dE/dt = {dedt:.12f}   -D = {-dissipation:.12f}")

limit = stability_limit(grid, s0, coeffs)
for frac in (0.4, 0.2, 0.1):
    icfg = IntegratorConfig(frac * limit)
    s1 = step(grid, s0, coeffs, icfg)
    s2 = step(grid, s1, coeffs, icfg)
    r = energy_law_residual(grid, [s0, s1, s2], coeffs)
    print(f"dt={icfg.dt:.2e}  residual={r:.3e}")

# energy split after a short run
s = s0
for _ in range(50):
    s = step(grid, s, coeffs, IntegratorConfig(0.4 * limit))
e, parts = total_energy(grid, s, coeffs)
print(f"t={s.t:.3f}  kinetic={parts['kinetic']:.5f}  elastic={parts['elastic']:.5f}")
