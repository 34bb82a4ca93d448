"""CLI contract: exit codes, JSON summaries, artifact stamping, determinism."""

import json

import pytest

from rdode.cli import main

GS_CFG = {
    "family": "GrayScott", "alpha": 0.04, "beta": 0.1, "steady_label": 1,
    "grid_dim": 1, "grid_n": 64, "gamma": 1.0,
    "v_window_lo": 0.4, "v_window_hi": 1.6,
    "stripe_lo": 0.45, "stripe_hi": 0.55,
    "omega2_branch": 2, "omega1_branch": 1,
}


def write_cfg(tmp_path, name="cfg.json", **overrides):
    cfg = {**GS_CFG, **overrides}
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def run_cli(capsys, *argv):
    code = main(list(argv))
    line = capsys.readouterr().out.strip()
    assert "\n" not in line  # single-line summary
    return code, json.loads(line)


def test_steady_command(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "out"
    code, summary = run_cli(capsys, "steady", "--config", str(cfg),
                            "--out", str(out))
    assert code == 0 and summary["status"] == "ok"
    states = json.loads((out / "steady_states.json").read_text())
    assert len(states) == 3
    # every artifact dir carries the resolved config and a version stamp
    assert json.loads((out / "resolved_config.json").read_text()) == GS_CFG
    stamp = json.loads((out / "tool_version.json").read_text())
    assert stamp["tool"] == "rdode" and "version" in stamp


def test_branches_artifacts(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "out"
    code, summary = run_cli(capsys, "branches", "--config", str(cfg),
                            "--out", str(out))
    assert code == 0 and summary["branches"] == 2
    header = (out / "branches.csv").read_text().splitlines()[0]
    assert header == "V,k1,k2"
    assert (out / "g_nullcline.csv").exists()
    markers = json.loads((out / "report.json").read_text())
    assert len(markers["steady_states"]) == 3
    assert markers["separation_gap"] > 0


def test_construct_and_spectrum(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "out"
    code, summary = run_cli(capsys, "construct", "--config", str(cfg),
                            "--out", str(out))
    assert code == 0 and summary["residual_inf"] <= 1e-9
    report = json.loads((out / "report.json").read_text())
    assert report["converged"] and "deviation_report" in report
    assert (out / "field.csv").read_text().splitlines()[0] == "x,u,v"

    out2 = tmp_path / "spec"
    code, summary = run_cli(capsys, "spectrum", "--config", str(cfg),
                            "--out", str(out2))
    assert code == 0
    assert summary["rightmost_re"] > 1e-6  # autocatalytic configuration
    assert summary["autocatalysis_fraction"] > 0


def test_audit_command(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "out"
    code, summary = run_cli(capsys, "audit", "--config", str(cfg),
                            "--out", str(out))
    assert code == 0
    audit = json.loads((out / "audit.json").read_text())
    assert audit["assumption1_a0_nonzero"]["pass"]
    assert "bifurcation_gammas" in audit


def test_decay_seed_in_report(tmp_path, capsys):
    cfg = write_cfg(tmp_path, t_end=0.02)
    out = tmp_path / "out"
    code, summary = run_cli(capsys, "decay", "--config", str(cfg),
                            "--out", str(out), "--seed", "11")
    assert code == 0 and summary["seed"] == 11
    assert (out / "norms.csv").exists()


def test_determinism_byte_identical(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    run_cli(capsys, "construct", "--config", str(cfg), "--out", str(a))
    run_cli(capsys, "construct", "--config", str(cfg), "--out", str(b))
    for name in ("field.csv", "report.json", "resolved_config.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_ey_command(tmp_path, capsys):
    cfg = write_cfg(tmp_path, family="PredatorPrey", alpha=1.0, beta=1.5,
                    grid_dim=2, grid_n=16, gamma=0.1, t_end=0.05,
                    ey_fraction=0.1, omega2_branch=3)
    del_keys = ("stripe_lo", "stripe_hi")
    data = json.loads(cfg.read_text())
    for k in del_keys:
        data.pop(k)
    cfg.write_text(json.dumps(data))
    out = tmp_path / "out"
    code, summary = run_cli(capsys, "ey", "--config", str(cfg),
                            "--out", str(out))
    assert code == 0
    assert summary["u_max_omega2_interior"] == 0.0
    for name in ("final.csv", "u.pgm", "v.pgm", "mask.pbm", "report.json"):
        assert (out / name).exists()


def test_config_error_exit_2(tmp_path, capsys):
    code, summary = run_cli(capsys, "steady", "--config",
                            str(tmp_path / "missing.json"),
                            "--out", str(tmp_path / "o"))
    assert code == 2 and summary["status"] == "config-error"

    bad = write_cfg(tmp_path, "bad.json", family="Lorenz")
    code, summary = run_cli(capsys, "steady", "--config", str(bad),
                            "--out", str(tmp_path / "o2"))
    assert code == 2

    # two partition sources at once
    dup = write_cfg(tmp_path, "dup.json", ey_fraction=0.1)
    code, _ = run_cli(capsys, "construct", "--config", str(dup),
                      "--out", str(tmp_path / "o3"))
    assert code == 2


def test_computational_failure_exit_1(tmp_path, capsys):
    # resonant gamma: 1/pi^2 for Brusselator det/a0 = 1
    import numpy as np
    cfg = write_cfg(tmp_path, family="Brusselator", alpha=1.0, beta=2.0,
                    gamma=1.0 / np.pi ** 2,
                    v_window_lo=1.5, v_window_hi=2.2)
    code, summary = run_cli(capsys, "construct", "--config", str(cfg),
                            "--out", str(tmp_path / "o"))
    assert code == 1 and summary["status"] == "failed"
    assert summary["error_type"] == "ResonanceError"
