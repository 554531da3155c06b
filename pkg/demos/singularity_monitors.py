"""
Blow-up integrand and local energy
==================================

Two monitors on a localized bump: the integrand max|curl v| + sum max|grad n_i|^2
whose time integral controls regularity, and the energy caught in discs of
radius R around every grid point.
"""

from framehydro.cli_io.initial import make_initial
from framehydro.diagnostics import blowup_integrand, blowup_monitor, local_energy_scan
from framehydro.grid import Grid2D
from framehydro.integrator import Coefficients, IntegratorConfig, SimState, adaptive_dt, step

grid = Grid2D(64, 64)
coeffs = Coefficients.default()
state = SimState(0.0, *make_initial({"preset": "biaxial_bump", "width": 0.4,
                                     "velocity_amplitude": 0.5}, grid))
icfg = IntegratorConfig(dt=1e-2)

integral = 0.0
for n in range(41):
    if n % 10 == 0:
        peak, hot = local_energy_scan(grid, state, 0.5, 1.0)
        x, y = grid.coords()
        where = " ".join(f"({x[i, j]:.2f}, {y[i, j]:.2f})" for i, j in hot[:2])
        print(f"t={state.t:.3f}  integrand={blowup_integrand(grid, state):8.3f}  "
              f"integral={integral:.4f}  disc max={peak:.4f}  hot={len(hot)} {where}")
    dt = adaptive_dt(grid, state, coeffs, icfg)
    integral = blowup_monitor(grid, state, integral, dt)
    state = step(grid, state, coeffs, icfg, dt=dt)
