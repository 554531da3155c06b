import csv
import json

import numpy as np
import pytest

from framehydro.cli_io.cli import main
from framehydro.cli_io.config import (DEFAULTS, ParseError, ValidationError, build_config,
                                      config_to_dict, dumps_config, load_config, loads_config)
from framehydro.cli_io.initial import make_initial
from framehydro.cli_io.runner import EXIT_CONFIG, EXIT_OK, EXIT_SINGULAR, run
from framehydro.cli_io.snapshot import (HEADER, SnapshotError, decode, encode, read_snapshot,
                                        write_snapshot)
from framehydro.diagnostics import CSV_COLUMNS
from framehydro.errors import SpecError
from framehydro.frame import orthonormality_defect
from framehydro.grid import divergence

SMALL = """
seed = 3
[grid]
nx = 16
ny = 16
[integrator]
dt = 0.002
steps = {steps}
scheme = "explicit_rk2_lie"
{extra}
[initial]
{initial}
[output]
series_path = "series.csv"
snapshot_interval = {snap}
"""


def small_config(tmp_path, steps=5, initial='preset = "twist"\namplitude = 0.5', snap=0,
                 extra="", name="run.toml"):
    path = tmp_path / name
    path.write_text(SMALL.format(steps=steps, initial=initial, snap=snap, extra=extra))
    return path


def read_series(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(x) for x in r] for r in rows[1:]])


# configuration --------------------------------------------------------------------

def test_defaults_load(tmp_path):
    cfg = loads_config("")
    assert (cfg.grid.nx, cfg.grid.ny) == (128, 128)
    assert cfg.coeffs.hydro.beta[0] == 0.3
    assert "gamma = (1, 1, 1)" in cfg.derived_summary()


def test_decoupled_minimal_config_is_admissible():
    cfg = loads_config("[hydro]\nbeta = [0, 0, 0, 0, 0, 0]\neta_rot = [0, 0, 0]\n")
    assert cfg.coeffs.hydro.eta_rot.sum() == 0


def test_negative_k4_is_named():
    k = ", ".join(["1.0"] * 3 + ["-1.0"] + ["1.0"] * 8)
    with pytest.raises(ValidationError, match="K4"):
        loads_config(f"[elastic]\nK = [{k}]\n")


def test_eta3_inequality_is_named():
    with pytest.raises(ValidationError, match=r"eta3\^2 <= beta3\*chi3"):
        loads_config("[hydro]\neta_rot = [0.5, 0.5, 1.2]\n")
    with pytest.raises(ValidationError, match=r"beta0\^2 <= beta1\*beta2"):
        loads_config("[hydro]\nbeta = [2, 1, 1, 1, 1, 1]\n")


@pytest.mark.parametrize("text,field", [
    ("[grid]\nnx = 15\n", "grid"),
    ("[integrator]\ndt = -1\n", "integrator.dt"),
    ("[integrator]\nscheme = \"euler\"\n", "integrator.scheme"),
    ("[diagnostics]\nradius = 3.0\n", "diagnostics.radius"),
    ("[grid]\nbogus = 1\n", "bogus"),
    ("[initial]\npreset = \"spiral\"\n", "initial"),
    ("[hydro]\nbeta = [1, 2]\n", "hydro.beta"),
])
def test_validation_messages_name_the_field(text, field):
    with pytest.raises(ValidationError, match=field):
        loads_config(text)


def test_parse_error():
    with pytest.raises(ParseError):
        loads_config("[grid\nnx = 3")


def test_round_trip_is_idempotent(tmp_path):
    cfg = load_config(small_config(tmp_path, extra="mollify_cutoff = 4.0\nt_end = 0.5"))
    text = dumps_config(cfg)
    again = loads_config(text)
    assert config_to_dict(again) == config_to_dict(cfg)
    assert dumps_config(again) == text


def test_random_seed_flows_into_initial_condition():
    cfg = loads_config("seed = 9\n[initial]\npreset = \"random_smooth\"\n")
    assert cfg.initial["seed"] == 9


def test_every_default_section_is_serialized():
    assert set(config_to_dict(loads_config(""))) == set(DEFAULTS)


# initial conditions ------------------------------------------------------------------

def test_uniform_and_taylor_green(grid32):
    p, v = make_initial("uniform", grid32)
    assert orthonormality_defect(p) == 0 and not v.any()
    p, v = make_initial({"preset": "taylor_green", "v_amplitude": 2.0}, grid32)
    x, y = grid32.coords()
    np.testing.assert_allclose(v, 2.0 * np.stack([np.sin(x) * np.cos(y), -np.cos(x) * np.sin(y)]),
                               atol=1e-13)


def test_random_smooth_constructor_guarantees(grid32):
    for seed in range(20):
        p, v = make_initial({"preset": "random_smooth", "seed": seed}, grid32)
        assert orthonormality_defect(p) <= 1e-14
        assert np.abs(divergence(grid32, v)).max() <= 1e-10
        assert np.abs(v).max() > 0


def test_unknown_preset_and_bad_parameters(grid32):
    with pytest.raises(SpecError):
        make_initial("spiral", grid32)
    with pytest.raises(SpecError):
        make_initial({"preset": "twist", "mode": 1.5}, grid32)
    with pytest.raises(SpecError):
        make_initial({"preset": "twist", "colour": 1}, grid32)


# snapshots --------------------------------------------------------------------------

def test_snapshot_round_trip_is_bit_exact(tmp_path, twist_flow_state, grid32):
    path = tmp_path / "s.bxfh"
    write_snapshot(path, grid32, twist_flow_state)
    snap = read_snapshot(path)
    assert snap.t == twist_flow_state.t
    assert snap.p.tobytes() == twist_flow_state.p.tobytes()
    assert snap.v.tobytes() == twist_flow_state.v.tobytes()
    assert path.stat().st_size == HEADER.size + 11 * 32 * 32 * 8


def test_snapshot_rejects_corruption(grid32, twist_flow_state):
    data = encode(32, 32, grid32.lx, grid32.ly, 0.0, twist_flow_state.p, twist_flow_state.v)
    with pytest.raises(SnapshotError, match="magic"):
        decode(b"XXXX" + data[4:])
    with pytest.raises(SnapshotError):
        decode(data[:-8])
    with pytest.raises(SnapshotError):
        decode(data[:10])


# run driver -------------------------------------------------------------------------

def test_equilibrium_run_keeps_energy_constant(tmp_path):
    cfg = load_config(small_config(tmp_path, steps=100, initial='preset = "uniform"'))
    res = run(cfg, base_dir=str(tmp_path))
    assert res.exit_code == EXIT_OK and res.steps == 100
    header, data = read_series(tmp_path / "series.csv")
    assert tuple(header) == CSV_COLUMNS
    assert data.shape == (101, len(CSV_COLUMNS))
    e = data[:, header.index("E_total")]
    assert np.abs(e - e[0]).max() <= 1e-14


def test_frozen_twist_run_decreases_elastic_energy(tmp_path):
    cfg = load_config(small_config(tmp_path, steps=30, extra="freeze_velocity = true"))
    res = run(cfg, base_dir=str(tmp_path))
    assert res.exit_code == EXIT_OK
    header, data = read_series(tmp_path / "series.csv")
    assert np.all(np.diff(data[:, header.index("E_elastic")]) < 0)
    assert np.all(data[:, header.index("E_kin")] == 0)
    res_col = data[1:-1, header.index("residual")]
    assert np.all(res_col < 1e-3)


def test_repeated_runs_are_bit_identical(tmp_path):
    init = 'preset = "random_smooth"\nband = 3'
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    for d in (a, b):
        run(load_config(small_config(d, steps=8, initial=init)), base_dir=str(d))
    assert (a / "series.csv").read_bytes() == (b / "series.csv").read_bytes()


def test_snapshots_written_on_interval(tmp_path):
    cfg = load_config(small_config(tmp_path, steps=4, snap=2))
    run(cfg, base_dir=str(tmp_path))
    names = sorted(p.name for p in (tmp_path / "snapshots").iterdir())
    assert names == ["snap_000000.bxfh", "snap_000002.bxfh", "snap_000004.bxfh"]
    assert read_snapshot(tmp_path / "snapshots" / names[-1]).t == pytest.approx(0.008)


def test_oversized_fixed_step_emits_report(tmp_path):
    cfg = load_config(small_config(tmp_path, extra="adaptive = false"))
    cfg = build_config({**cfg.raw, "integrator": {**cfg.raw["integrator"], "dt": 10.0},
                        "diagnostics": {**cfg.raw["diagnostics"], "max_halvings": 2}})
    res = run(cfg, base_dir=str(tmp_path))
    assert res.exit_code == EXIT_SINGULAR
    report = json.loads((tmp_path / "singularity_report.json").read_text())
    assert report["detected"] and report["trigger"] == "StepRejected"


def test_non_finite_state_emits_report(tmp_path, monkeypatch):
    import framehydro.cli_io.runner as runner

    cfg = load_config(small_config(tmp_path))
    real = runner.make_initial

    def poisoned(spec, grid):
        p, v = real(spec, grid)
        v[0, 3, 3] = np.nan
        return p, v

    monkeypatch.setattr(runner, "make_initial", poisoned)
    res = run(cfg, base_dir=str(tmp_path))
    assert res.exit_code == EXIT_SINGULAR
    assert res.report.trigger == "NonFinite"


def test_t_end_stops_exactly(tmp_path):
    cfg = load_config(small_config(tmp_path, steps=1000, extra="t_end = 0.005"))
    res = run(cfg, base_dir=str(tmp_path))
    assert res.state.t == pytest.approx(0.005, abs=1e-15)


# command line ---------------------------------------------------------------------

def test_cli_run_and_inspect(tmp_path, capsys):
    path = small_config(tmp_path, steps=2, snap=2)
    assert main(["run", str(path), "--outdir", str(tmp_path)]) == EXIT_OK
    assert main(["inspect", str(tmp_path / "snapshots" / "snap_000002.bxfh")]) == 0
    out = capsys.readouterr().out
    assert "grid 16 x 16" in out and "orthonormality defect" in out


def test_cli_config_errors(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[hydro]\neta_rot = [0.5, 0.5, 2.0]\n")
    assert main(["run", str(bad)]) == EXIT_CONFIG
    assert main(["check-coeffs", str(bad)]) == EXIT_CONFIG
    assert main(["run", str(tmp_path / "missing.toml")]) == EXIT_CONFIG
    assert main(["inspect", str(bad)]) == 1


def test_cli_check_coeffs_ok(tmp_path, capsys):
    assert main(["check-coeffs", str(small_config(tmp_path))]) == 0
    out = capsys.readouterr().out
    assert "k_twist" in out and "eta3^2 <= beta3*chi3" in out


def test_cli_verify_passes_and_detects_fault(tmp_path, capsys):
    path = small_config(tmp_path)
    assert main(["verify", str(path)]) == 0
    good = capsys.readouterr().out
    assert "FAIL" not in good
    assert main(["verify", str(path), "--inject-fault", "stress"]) == 1
    lines = capsys.readouterr().out.splitlines()
    failed = [ln for ln in lines if "FAIL" in ln]
    assert len(failed) == 1 and "energy" in failed[0]


def test_verify_minimum_grid(tmp_path, capsys):
    text = SMALL.format(steps=1, initial='preset = "twist"', snap=0, extra="")
    path = tmp_path / "tiny.toml"
    path.write_text(text.replace("nx = 16", "nx = 8").replace("ny = 16", "ny = 8")
                    .replace("[diagnostics]", ""))
    assert main(["verify", str(path)]) == 0
