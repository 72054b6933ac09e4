import json

import numpy as np
import pytest

from ksplap.cli import main
from ksplap.io import load_snapshots


def test_example1_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "ex1"
    code = main(["example1", "--n", "16", "--t-end", "0.05", "--output-dir", str(out)])
    assert code == 0
    for name in ("config.toml", "summary.json", "report.json", "snapshots/snapshots.json"):
        assert (out / name).exists()
    report = json.loads((out / "report.json").read_text())
    assert report["passed"]
    centers, snaps = load_snapshots(out / "snapshots")
    assert centers.shape == (256, 2) and snaps[-1][0] == 0.05
    assert len(list((out / "snapshots").glob("*.vtk"))) == len(snaps)
    assert "PASS" in capsys.readouterr().out


def test_run_from_config(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("preset = example2, nx = 8, ny = 8\n[time]\nt_end = 0.1\n")
    assert main(["run", "--config", str(cfg), "--output-dir", str(tmp_path / "o")]) == 0
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["t"][-1] == 0.1


def test_configuration_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("preset = example1\np = 1.5\n")
    assert main(["run", "--config", str(cfg)]) == 1
    assert "p" in capsys.readouterr().err


def test_solver_abort_exit_code(tmp_path, capsys):
    out = tmp_path / "bad"
    code = main(["example1", "--n", "32", "--t-end", "0.2", "--drift", "full_upwind",
                 "--output-dir", str(out), "--no-vtk"])
    assert code == 2
    assert (out / "abort_state.csv").exists()
    assert "aborted" in capsys.readouterr().err


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("KSPLAP_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["example2", "--n", "8", "--t-end", "0.05", "--no-vtk"]) == 0
    assert (tmp_path / "env" / "summary.json").exists()
    # the flag beats the environment
    assert main(["example2", "--n", "8", "--t-end", "0.05", "--no-vtk",
                 "--output-dir", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "summary.json").exists()


def test_heat_verify_and_convergence(capsys):
    assert main(["heat-verify", "--n", "16"]) == 0
    assert "L2 error" in capsys.readouterr().out
    assert main(["convergence", "--levels", "8,16,32"]) == 0
    rows = [ln.split() for ln in capsys.readouterr().out.splitlines()[1:]]
    assert [int(r[0]) for r in rows] == [8, 16, 32]
    orders = [float(r[2]) for r in rows[1:]]
    assert all(o > 1.5 for o in orders)


def test_osc_probe(tmp_path, capsys):
    out = tmp_path / "ex1"
    assert main(["example1", "--n", "32", "--t-end", "0.1", "--output-dir", str(out)]) == 0
    capsys.readouterr()
    code = main(["osc-probe", "--snapshot-dir", str(out / "snapshots"), "--center", "0.2,0,0.1",
                 "--radii", "0.4,0.2,0.1"])
    assert code == 0
    text = capsys.readouterr().out
    assert "holder fit" in text
    assert len([ln for ln in text.splitlines() if ln.strip()[:1].isdigit()]) == 3


def test_missing_subcommand():
    with pytest.raises(SystemExit):
        main([])
