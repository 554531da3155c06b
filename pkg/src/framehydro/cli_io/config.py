"""Run configuration: TOML loading, validation and serialization."""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import tomli

from ..elasticity import derive_coefficients
from ..errors import InvalidCoefficients, SpecError
from ..grid import Grid2D
from ..hydro import HydroCoefficients, validate_coefficients
from ..integrator import SCHEMES, Coefficients, IntegratorConfig
from .initial import parse_initial_spec


class ParseError(ValueError):
    """The configuration file is not valid TOML."""


class ValidationError(ValueError):
    """A configuration value breaks an invariant; the message names the field."""


DEFAULTS = {
    "seed": 0,
    "grid": {"nx": 128, "ny": 128, "lx": 2 * math.pi, "ly": 2 * math.pi,
             "dealias_fraction": 2.0 / 3.0},
    "elastic": {"K": [1.0] * 12},
    "hydro": {"beta": [0.3, 1.0, 1.0, 1.0, 1.0, 1.0], "eta": 1.0,
              "eta_rot": [0.5, 0.5, 0.5], "chi": [1.0, 1.0, 1.0]},
    "integrator": {"dt": 1e-3, "scheme": "explicit_rk4_lie", "cfl_safety": 0.4,
                   "reprojection_interval": 1, "freeze_velocity": False,
                   "adaptive": True, "steps": 100},
    "initial": {"preset": "twist"},
    "output": {"series_path": "series.csv", "snapshot_interval": 0,
               "snapshot_dir": "snapshots", "report_path": "singularity_report.json"},
    "diagnostics": {"radius": 0.5, "residual_floor": 1e-10, "residual_limit": 1.0,
                    "blowup_limit": 1e8, "max_halvings": 8},
}

# keys that may be absent (no default value)
OPTIONAL = {"integrator": {"mollify_cutoff", "t_end"}, "diagnostics": {"eps0"}}


@dataclass(frozen=True)
class OutputConfig:
    series_path: str = "series.csv"
    snapshot_interval: int = 0          # 0 disables snapshots
    snapshot_dir: str = "snapshots"
    report_path: str = "singularity_report.json"


@dataclass(frozen=True)
class DiagnosticsConfig:
    radius: float = 0.5
    eps0: Optional[float] = None        # None means 0.1 * E(0)
    residual_floor: float = 1e-10
    residual_limit: float = 1.0
    blowup_limit: float = 1e8
    max_halvings: int = 8


@dataclass(frozen=True)
class RunConfig:
    grid: Grid2D
    K: np.ndarray
    coeffs: Coefficients
    integrator: IntegratorConfig
    initial: dict
    output: OutputConfig
    diagnostics: DiagnosticsConfig
    seed: int = 0
    steps: Optional[int] = 100
    t_end: Optional[float] = None
    adaptive: bool = True
    raw: dict = field(default_factory=dict, compare=False)

    def derived_summary(self):
        el = self.coeffs.elastic
        fmt = lambda a: ", ".join(f"{x:.6g}" for x in np.ravel(a))
        return "\n".join([
            f"gamma = ({fmt(el.gamma)})",
            f"k_div = ({fmt(el.k_div)})",
            "k_twist =",
            *[f"  ({fmt(row)})" for row in el.k_twist],
        ])


def _merge(raw):
    out = {}
    for key, default in DEFAULTS.items():
        if isinstance(default, dict):
            section = raw.get(key, {})
            if not isinstance(section, dict):
                raise ValidationError(f"[{key}] must be a table")
            unknown = set(section) - set(default) - OPTIONAL.get(key, set())
            if key != "initial" and unknown:
                raise ValidationError(f"[{key}] has unknown keys {sorted(unknown)}")
            out[key] = {**default, **section} if key != "initial" else dict(section or default)
        else:
            out[key] = raw.get(key, default)
    unknown = set(raw) - set(DEFAULTS)
    if unknown:
        raise ValidationError(f"unknown top-level keys {sorted(unknown)}")
    return out


def _number(sec, key, value, positive=False, integer=False):
    name = f"{sec}.{key}"
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{name} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite")
    if integer and int(value) != value:
        raise ValidationError(f"{name} must be an integer")
    if positive and not value > 0:
        raise ValidationError(f"{name} must be positive, got {value!r}")
    return int(value) if integer else float(value)


def _vector(sec, key, value, n):
    if not isinstance(value, list) or len(value) != n:
        raise ValidationError(f"{sec}.{key} must be a list of {n} numbers")
    return np.array([_number(sec, f"{key}[{i}]", x) for i, x in enumerate(value)])


def hydro_from(section):
    return HydroCoefficients(
        beta=_vector("hydro", "beta", section["beta"], 6),
        eta=_number("hydro", "eta", section["eta"]),
        eta_rot=_vector("hydro", "eta_rot", section["eta_rot"], 3),
        chi=_vector("hydro", "chi", section["chi"], 3),
    )


def build_config(raw, validate=True):
    """Turn a parsed TOML mapping into a :class:`RunConfig`."""
    c = _merge(raw)
    g = c["grid"]
    try:
        grid = Grid2D(_number("grid", "nx", g["nx"], integer=True),
                      _number("grid", "ny", g["ny"], integer=True),
                      _number("grid", "lx", g["lx"], positive=True),
                      _number("grid", "ly", g["ly"], positive=True),
                      _number("grid", "dealias_fraction", g["dealias_fraction"], positive=True))
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"grid: {exc}") from None

    K = _vector("elastic", "K", c["elastic"]["K"], 12)
    try:
        elastic = derive_coefficients(K)
    except InvalidCoefficients as exc:
        raise ValidationError(f"elastic.K: {exc}") from None
    hc = hydro_from(c["hydro"])
    if validate:
        report = validate_coefficients(hc)
        if not report.ok:
            names = "; ".join(f"{f.name} violated (margin {f.margin:.6g})" for f in report.failed)
            raise ValidationError(f"hydro: {names}")

    it = c["integrator"]
    if it["scheme"] not in SCHEMES:
        raise ValidationError(f"integrator.scheme must be one of {SCHEMES}, got {it['scheme']!r}")
    reproj = _number("integrator", "reprojection_interval", it["reprojection_interval"], integer=True)
    if reproj < 0:
        raise ValidationError("integrator.reprojection_interval must be >= 0 (0 disables)")
    cutoff = it.get("mollify_cutoff")
    if cutoff is not None:
        cutoff = _number("integrator", "mollify_cutoff", cutoff, positive=True)
    cfl = _number("integrator", "cfl_safety", it["cfl_safety"], positive=True)
    if cfl > 1:
        raise ValidationError("integrator.cfl_safety must lie in (0, 1]")
    for key in ("freeze_velocity", "adaptive"):
        if not isinstance(it[key], bool):
            raise ValidationError(f"integrator.{key} must be true or false")
    icfg = IntegratorConfig(
        dt=_number("integrator", "dt", it["dt"], positive=True),
        scheme=it["scheme"], mollify_cutoff=cutoff, cfl_safety=cfl,
        reprojection_interval=reproj or None, freeze_velocity=it["freeze_velocity"])
    steps = it.get("steps")
    if steps is not None:
        steps = _number("integrator", "steps", steps, integer=True)
        if steps < 0:
            raise ValidationError("integrator.steps must be >= 0")
    t_end = it.get("t_end")
    if t_end is not None:
        t_end = _number("integrator", "t_end", t_end, positive=True)

    seed = _number("seed", "seed", c["seed"], integer=True)
    initial = dict(c["initial"])
    try:
        name, _ = parse_initial_spec(initial)
    except SpecError as exc:
        raise ValidationError(f"initial: {exc}") from None
    if name == "random_smooth":
        initial.setdefault("seed", seed)

    o = c["output"]
    output = OutputConfig(
        series_path=str(o["series_path"]),
        snapshot_interval=_number("output", "snapshot_interval", o["snapshot_interval"], integer=True),
        snapshot_dir=str(o["snapshot_dir"]), report_path=str(o["report_path"]))
    if output.snapshot_interval < 0:
        raise ValidationError("output.snapshot_interval must be >= 0")

    d = c["diagnostics"]
    radius = _number("diagnostics", "radius", d["radius"], positive=True)
    if radius > min(grid.lx, grid.ly) / 4:
        raise ValidationError("diagnostics.radius must be <= min(lx, ly) / 4")
    eps0 = d.get("eps0")
    if eps0 is not None:
        eps0 = _number("diagnostics", "eps0", eps0, positive=True)
    diag = DiagnosticsConfig(
        radius=radius, eps0=eps0,
        residual_floor=_number("diagnostics", "residual_floor", d["residual_floor"], positive=True),
        residual_limit=_number("diagnostics", "residual_limit", d["residual_limit"], positive=True),
        blowup_limit=_number("diagnostics", "blowup_limit", d["blowup_limit"], positive=True),
        max_halvings=_number("diagnostics", "max_halvings", d["max_halvings"], integer=True))

    return RunConfig(grid=grid, K=K, coeffs=Coefficients(elastic, hc), integrator=icfg,
                     initial=initial, output=output, diagnostics=diag, seed=seed,
                     steps=steps, t_end=t_end, adaptive=it["adaptive"], raw=c)


def parse_toml(text):
    try:
        return tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ParseError(str(exc)) from None


def load_config(path, validate=True):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return build_config(parse_toml(text), validate=validate)


def loads_config(text, validate=True):
    return build_config(parse_toml(text), validate=validate)


# serialization ------------------------------------------------------------------

def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps_toml(data):
    """Minimal TOML writer for one level of tables holding scalars and arrays."""
    lines = []
    for key, val in data.items():
        if not isinstance(val, dict):
            lines.append(f"{key} = {_toml_value(val)}")
    for key, val in data.items():
        if isinstance(val, dict):
            lines.append("")
            lines.append(f"[{key}]")
            for k, v in val.items():
                if v is not None:
                    lines.append(f"{k} = {_toml_value(v)}")
    return "\n".join(lines) + "\n"


def config_to_dict(cfg):
    """Plain mapping that :func:`build_config` turns back into an equal config."""
    it, hc = cfg.integrator, cfg.coeffs.hydro
    integ = {"dt": it.dt, "scheme": it.scheme, "cfl_safety": it.cfl_safety,
             "reprojection_interval": it.reprojection_interval or 0,
             "freeze_velocity": it.freeze_velocity, "adaptive": cfg.adaptive}
    if cfg.steps is not None:
        integ["steps"] = cfg.steps
    if cfg.t_end is not None:
        integ["t_end"] = cfg.t_end
    if it.mollify_cutoff is not None:
        integ["mollify_cutoff"] = it.mollify_cutoff
    diag = {"radius": cfg.diagnostics.radius,
            "residual_floor": cfg.diagnostics.residual_floor,
            "residual_limit": cfg.diagnostics.residual_limit,
            "blowup_limit": cfg.diagnostics.blowup_limit,
            "max_halvings": cfg.diagnostics.max_halvings}
    if cfg.diagnostics.eps0 is not None:
        diag["eps0"] = cfg.diagnostics.eps0
    g = cfg.grid
    return {
        "seed": cfg.seed,
        "grid": {"nx": g.nx, "ny": g.ny, "lx": g.lx, "ly": g.ly,
                 "dealias_fraction": g.dealias_fraction},
        "elastic": {"K": [float(x) for x in cfg.K]},
        "hydro": {"beta": [float(x) for x in hc.beta], "eta": hc.eta,
                  "eta_rot": [float(x) for x in hc.eta_rot], "chi": [float(x) for x in hc.chi]},
        "integrator": integ,
        "initial": dict(cfg.initial),
        "output": {"series_path": cfg.output.series_path,
                   "snapshot_interval": cfg.output.snapshot_interval,
                   "snapshot_dir": cfg.output.snapshot_dir,
                   "report_path": cfg.output.report_path},
        "diagnostics": diag,
    }


def dumps_config(cfg):
    return dumps_toml(config_to_dict(cfg))
