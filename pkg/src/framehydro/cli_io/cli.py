"""Command-line entry point: run, verify, check-coeffs, inspect."""

import argparse
import sys

import numpy as np

from ..errors import SpecError
from ..hydro import validate_coefficients
from .config import ParseError, ValidationError, load_config
from .runner import EXIT_CONFIG, run
from .snapshot import SnapshotError, read_snapshot
from .verify import verify


def _load(path, validate=True):
    try:
        return load_config(path, validate=validate)
    except (ParseError, ValidationError, SpecError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return None


def cmd_run(args):
    cfg = _load(args.config)
    if cfg is None:
        return EXIT_CONFIG
    result = run(cfg, base_dir=args.outdir)
    if result.report is not None:
        print(f"stopped after {result.steps} steps: {result.report.trigger} "
              f"({result.report.message})", file=sys.stderr)
    else:
        print(f"completed {result.steps} steps, t = {result.state.t:.6g}")
    return result.exit_code


def cmd_verify(args):
    cfg = _load(args.config)
    if cfg is None:
        return EXIT_CONFIG
    results = verify(cfg, fault=args.inject_fault)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def cmd_check_coeffs(args):
    cfg = _load(args.config, validate=False)
    if cfg is None:
        return EXIT_CONFIG
    print(cfg.derived_summary())
    report = validate_coefficients(cfg.coeffs.hydro)
    print(report)
    return 0 if report.ok else EXIT_CONFIG


def cmd_inspect(args):
    try:
        snap = read_snapshot(args.snapshot)
    except (SnapshotError, OSError) as exc:
        print(f"cannot read snapshot: {exc}", file=sys.stderr)
        return 1
    print(f"grid {snap.nx} x {snap.ny}  domain {snap.lx:.6g} x {snap.ly:.6g}  t = {snap.t:.9g}")
    gram = np.einsum("ic...,jc...->ij...", snap.p, snap.p)
    defect = np.max(np.abs(gram - np.eye(3)[:, :, None, None]))
    print(f"orthonormality defect {defect:.3e}")
    names = [f"n{i + 1}{c}" for i in range(3) for c in "xyz"] + ["vx", "vy"]
    fields = np.concatenate([snap.p.reshape(9, snap.nx, snap.ny), snap.v])
    for name, f in zip(names, fields):
        print(f"  {name:3s} min={f.min():+.6e} max={f.max():+.6e} mean={f.mean():+.6e}")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="framehydro",
                                 description="Biaxial frame hydrodynamics on a periodic torus.")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="integrate a configuration")
    p.add_argument("config")
    p.add_argument("--outdir", default=None, help="directory for relative output paths")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("verify", help="run the self-check suites")
    p.add_argument("config")
    p.add_argument("--inject-fault", choices=["stress"], default=None,
                   help="perturb the stress to demonstrate the energy-law suite")
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("check-coeffs", help="report coefficient admissibility")
    p.add_argument("config")
    p.set_defaults(func=cmd_check_coeffs)
    p = sub.add_parser("inspect", help="summarize a snapshot file")
    p.add_argument("snapshot")
    p.set_defaults(func=cmd_inspect)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)
