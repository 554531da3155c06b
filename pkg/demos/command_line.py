"""
Driving a run from a configuration file
=======================================

The same steps as ``framehydro run / inspect / check-coeffs`` from a shell.
"""

import csv
import os
import tempfile

from framehydro.cli_io.cli import main

CONFIG = """
seed = 4
[grid]
nx = 32
ny = 32
[integrator]
scheme = "explicit_rk4_lie"
steps = 20
[initial]
preset = "random_smooth"
band = 3
[output]
snapshot_interval = 10
"""

work = tempfile.mkdtemp(prefix="framehydro_")
cfg = os.path.join(work, "run.toml")
with open(cfg, "w") as fh:
    fh.write(CONFIG)

main(["check-coeffs", cfg])
code = main(["run", cfg, "--outdir", work])
print("exit code", code)

with open(os.path.join(work, "series.csv")) as fh:
    rows = list(csv.DictReader(fh))
for r in rows[::5]:
    print(f"t={float(r['t']):.4f}  E={float(r['E_total']):.6f}  residual={r['residual']}")

main(["inspect", os.path.join(work, "snapshots", "snap_000020.bxfh")])
