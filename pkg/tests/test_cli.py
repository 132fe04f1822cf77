import os

import numpy as np
import pytest

from cdgrmhd.cli import (EXIT_AUDIT, EXIT_CONFIG, EXIT_OK, EXIT_PHYSICS, main)
from cdgrmhd.io_config import read_snapshot_1d


def test_run_rp1_profile(tmp_path, capsys):
    out = str(tmp_path / "rp1")
    code = main(["run", f"out={out}", "problem=rp1", "n=64", "t_end=0.05"])
    assert code == EXIT_OK
    path = os.path.join(out, "rp1_final.csv")
    x, data = read_snapshot_1d(path)
    assert len(x) == 64
    assert (data[:, 0] > 0).all()
    assert os.path.exists(os.path.join(out, "run_config.ini"))


def test_run_alfven_reports_error(tmp_path, capsys):
    out = str(tmp_path / "alf")
    code = main(["run", f"out={out}", "problem=alfven1d", "n=20", "t_end=0.1"])
    assert code == EXIT_OK
    text = capsys.readouterr().out
    assert "errors[v2]" in text


def test_config_error_exit():
    assert main(["run", "problem=unknown"]) == EXIT_CONFIG
    assert main(["run", "k=7"]) == EXIT_CONFIG
    assert main(["convergence", "--problem", "rp1"]) == EXIT_CONFIG


def test_physics_failure_exit(tmp_path):
    out = str(tmp_path / "fail")
    code = main(["run", f"out={out}", "problem=blast", "ba=2000",
                 "bp_limiter=off", "nx=40", "ny=40", "t_end=1.0"])
    assert code == EXIT_PHYSICS


def test_audit_quick_and_corrupt(tmp_path, capsys):
    assert main(["audit", "--quick"]) == EXIT_OK
    text = capsys.readouterr().out
    assert "PASS" in text and "samples=" in text
    assert main(["audit", "--quick", "--corrupt-df"]) == EXIT_AUDIT


def test_reference_cli(tmp_path):
    out = str(tmp_path / "ref")
    code = main(["reference", "--problem", "rp1", "--cells", "400",
                 f"out={out}", "t_end=0.1"])
    assert code == EXIT_OK
    x, data = read_snapshot_1d(os.path.join(out, "rp1_reference.csv"))
    assert len(x) == 400


def test_convergence_cli(tmp_path, capsys):
    out = str(tmp_path / "conv")
    code = main(["convergence", "--problem", "alfven1d", "--meshes", "8,16",
                 f"out={out}", "t_end=0.05"])
    assert code == EXIT_OK
    csv = os.path.join(out, "convergence_alfven1d.csv")
    rows = open(csv).read().splitlines()
    assert rows[0].startswith("n,l1")
    assert len(rows) == 3


def test_ms3_integrator_smoke(tmp_path):
    out = str(tmp_path / "ms3")
    code = main(["run", f"out={out}", "problem=alfven1d", "n=16",
                 "t_end=0.2", "integrator=ms3"])
    assert code == EXIT_OK
