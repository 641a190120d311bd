import json

import pytest

from critwave.cli import main

pytestmark = pytest.mark.filterwarnings("ignore::RuntimeWarning")


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_constants_subcommand(capsys):
    code, out, _ = run_cli(capsys, "constants", "--d", "3")
    assert code == 0
    bundle = json.loads(out)
    assert bundle["threshold_energy"] == pytest.approx(4.273664, rel=1e-5)
    assert bundle["grad_norm_sq"] == pytest.approx(12.820992, rel=1e-5)


def test_check_phi_subcommand(capsys, tmp_path):
    code, out, _ = run_cli(
        capsys, "check-phi", "--family", "sinh_power", "--sigma", "2", "--out", str(tmp_path)
    )
    assert code == 0
    reports = json.loads(out)
    assert reports["focusing"]["passed"] is True
    assert reports["defocusing"]["passed"] is True
    assert (tmp_path / "conditions.json").exists()


def test_check_phi_rejects_bad_params(capsys):
    code, _, err = run_cli(capsys, "check-phi", "--family", "sinh_power", "--sigma", "-1")
    assert code == 2
    assert "error" in json.loads(err)


def _evolve_config(tmp_path, **overrides):
    cfg = {
        "dimension": 3,
        "grid": {"r_max": 72.0, "n": 2048},
        "coefficient": {"family": "sinh_power", "sigma": 2.0},
        "sign": 1,
        "data": {"family": "scaled_ground_state", "amplitude": 1.5, "lam": 0.5, "taper": [18, 42]},
        "solver": {"t_final": 20.0, "cfl": 0.25},
        "diagnostics": {"cadence": 25},
    }
    cfg.update(overrides)
    p = tmp_path / "run.json"
    p.write_text(json.dumps(cfg))
    return p


def test_evolve_blowup_run_writes_artifacts(capsys, tmp_path):
    cfg = _evolve_config(tmp_path)
    out_dir = tmp_path / "out"
    code, out, _ = run_cli(capsys, "evolve", "--config", str(cfg), "--out", str(out_dir))
    assert code == 0  # a cap hit is a normal exit
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["schema"] == 1
    assert summary["outcome"]["kind"] == "BlewUp"
    assert summary["verdict"] == "Consistent"
    assert summary["outcome"]["evidence"]["refinement_consistent"] is True
    header = (out_dir / "trace.csv").read_text().splitlines()[0]
    assert header.startswith("t,E_total,E_kinetic,E_gradient,E_potential,sup_norm,h_norm")
    conditions = json.loads((out_dir / "conditions.json").read_text())
    assert conditions["focusing"]["passed"] is True


def test_evolve_rejects_invalid_config(capsys, tmp_path):
    cfg = _evolve_config(tmp_path, solver={"t_final": -5.0})
    code, _, err = run_cli(capsys, "evolve", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 2
    assert json.loads(err)["error"]["kind"] == "config"


def test_evolve_auto_domain(capsys, tmp_path):
    cfg = _evolve_config(
        tmp_path,
        grid={"r_max": "auto", "n": 1024},
        solver={"t_final": 2.0, "cfl": 0.5},
        data={"family": "gaussian_bump", "amplitude": 0.4, "width": 1.0},
    )
    out_dir = tmp_path / "auto"
    code, _, _ = run_cli(capsys, "evolve", "--config", str(cfg), "--out", str(out_dir))
    assert code == 0
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["grid"]["r_max"] >= 9.0  # support + horizon + margin


def test_evolve_deterministic_trace(capsys, tmp_path):
    cfg = _evolve_config(tmp_path, solver={"t_final": 1.0, "cfl": 0.5})
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli(capsys, "evolve", "--config", str(cfg), "--out", str(a))[0] == 0
    assert run_cli(capsys, "evolve", "--config", str(cfg), "--out", str(b))[0] == 0
    assert (a / "trace.csv").read_bytes() == (b / "trace.csv").read_bytes()


def test_env_var_output_dir(capsys, tmp_path, monkeypatch):
    target = tmp_path / "envout"
    monkeypatch.setenv("CRITWAVE_OUT", str(target))
    cfg = _evolve_config(tmp_path, solver={"t_final": 0.5, "cfl": 0.5})
    code, _, _ = run_cli(capsys, "evolve", "--config", str(cfg))
    assert code == 0
    assert (target / "summary.json").exists()


def test_sweep_runs_and_resumes(capsys, tmp_path):
    cfg = {"amplitudes": [0.25, 1.75]}
    p = tmp_path / "sweep.json"
    p.write_text(json.dumps(cfg))
    out_dir = tmp_path / "sw"
    code, _, _ = run_cli(capsys, "sweep", "--config", str(p), "--out", str(out_dir))
    assert code == 0
    lines = (out_dir / "sweep.csv").read_text().splitlines()
    assert lines[0] == "a,E_phi,grad_ratio,prediction,outcome,verdict"
    assert len(lines) == 3
    assert "Consistent" in lines[1] and "Consistent" in lines[2]
    # resume: a second invocation must not duplicate completed rows
    code, _, _ = run_cli(capsys, "sweep", "--config", str(p), "--out", str(out_dir))
    assert code == 0
    assert len((out_dir / "sweep.csv").read_text().splitlines()) == 3


def test_sweep_rejects_empty_amplitudes(capsys, tmp_path):
    p = tmp_path / "sweep.json"
    p.write_text(json.dumps({"amplitudes": []}))
    code, _, err = run_cli(capsys, "sweep", "--config", str(p), "--out", str(tmp_path))
    assert code == 2
    assert "error" in json.loads(err)


def test_hyperbolic_subcommand(capsys, tmp_path):
    cfg = {
        "dimension": 3,
        "grid": {"r_max": "auto", "n": 2048},
        "data": {"family": "h3_gaussian", "amplitude": 0.5, "width": 1.0},
        "solver": {"t_final": 4.0, "cfl": 0.5},
        "diagnostics": {"cadence": 25},
    }
    p = tmp_path / "h3.json"
    p.write_text(json.dumps(cfg))
    out_dir = tmp_path / "h3"
    code, out, _ = run_cli(capsys, "hyperbolic", "--config", str(p), "--out", str(out_dir))
    assert code == 0
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["prediction"]["verdict"] == "Scatter"
    assert summary["shifted_energy_drift"] <= 1e-3
    assert (out_dir / "trace.csv").exists()


def test_verify_only_filter(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "verify", "--only", "linear", "--out", str(tmp_path))
    assert code == 0
    assert "[PASS] linear-exactness" in out
    report = json.loads((tmp_path / "acceptance.json").read_text())
    assert report[0]["name"] == "linear-exactness"


def test_verify_unknown_filter(capsys):
    code, _, err = run_cli(capsys, "verify", "--only", "nonexistent-criterion")
    assert code == 2
