import json
import subprocess
import sys

import pytest

from satctl.cli import RunConfig, run_cli
from satctl.errors import SatCtlError
from satctl.io import CSV_COLUMNS, CSVFormatError, read_trajectory_csv


def test_simulate_writes_csv(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    assert run_cli(["simulate", "--option", "2", "--p0", "2", "--t-final", "1", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1002
    d = read_trajectory_csv(out)
    assert d["p"][0] == 2.0 and d["t"][-1] == pytest.approx(1.0)
    assert "1001 records" in capsys.readouterr().out


def test_certify_pass_and_report(tmp_path):
    out = tmp_path / "r.json"
    assert run_cli(["certify", "--option", "1", "--grid", "41", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["pass"] is True and doc["region"]["grid_n"] == 41


def test_certify_option2_without_beta_sweeps(tmp_path):
    out = tmp_path / "r.json"
    assert run_cli(["certify", "--grid", "31", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["config"]["betas"] == [0.1, 0.3, 0.5, 0.7, 0.9]


def test_certify_fault_exits_one(capsys):
    assert run_cli(["certify", "--option", "1", "--grid", "41", "--fault-w", "1.01"]) == 1
    out = capsys.readouterr().out
    assert "FAIL  Vdot identity" in out and "overall: FAIL" in out


def test_bad_beta_exits_two(capsys):
    assert run_cli(["certify", "--beta", "1.5", "--grid", "11"]) == 2
    assert "beta" in capsys.readouterr().err


def test_usage_error_exits_two():
    assert run_cli(["certify", "--option", "3"]) == 2
    assert run_cli([]) == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"option": 1, "grid": 21, "k_sigma": 2.0}))
    out = tmp_path / "r.json"
    assert run_cli(["certify", "--config", str(cfg), "--k-sigma", "3", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["config"]["k_sigma"] == 3.0 and doc["region"]["grid_n"] == 21


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"gain": 1}))
    assert run_cli(["certify", "--config", str(cfg)]) == 2
    assert "gain" in capsys.readouterr().err


def test_config_unreadable(tmp_path):
    assert run_cli(["certify", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert run_cli(["certify", "--config", str(bad)]) == 2


def test_merge_validates_shapes():
    with pytest.raises(SatCtlError):
        RunConfig.merge({"region": [0, 1]}, {})
    cfg = RunConfig.merge({"box": [-1, 1, -1, 1]}, {"seed": 4})
    assert cfg.box == (-1.0, 1.0, -1.0, 1.0) and cfg.seed == 4


def test_sweep_command(tmp_path, capsys):
    out = tmp_path / "s.json"
    assert run_cli(["sweep", "--count", "4", "--seed", "3", "--dt", "0.01", "--t-final", "60",
                    "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["converged"] == 4 and len(doc["runs"]) == 4
    assert "4/4 converged" in capsys.readouterr().out


def test_props_command(tmp_path):
    out = tmp_path / "p.json"
    assert run_cli(["props", "--option", "1", "--samples", "2001", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["pass"] is True
    assert [r["subject"] for r in doc["reports"]][-1] == "gradient check"


def test_plot_command(tmp_path):
    csv = tmp_path / "t.csv"
    svg = tmp_path / "t.svg"
    assert run_cli(["simulate", "--t-final", "2", "--dt", "0.01", "--out", str(csv)]) == 0
    assert run_cli(["plot", "--csv", str(csv), "--out", str(svg)]) == 0
    first = svg.read_bytes()
    assert first.startswith(b"<?xml") and b"<svg" in first
    assert run_cli(["plot", "--csv", str(csv), "--out", str(svg)]) == 0
    assert svg.read_bytes() == first


def test_plot_needs_paths():
    assert run_cli(["plot"]) == 2


def test_plot_malformed_csv(tmp_path, capsys):
    csv = tmp_path / "bad.csv"
    csv.write_text("t,p,v,u,V,W\n0,1,2,3,4,5\n0,1,x,3,4,5\n")
    assert run_cli(["plot", "--csv", str(csv), "--out", str(tmp_path / "o.svg")]) == 2
    assert "line 3" in capsys.readouterr().err


def test_csv_reader_errors(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("t,p,v,u,V\n")
    with pytest.raises(CSVFormatError, match="missing column"):
        read_trajectory_csv(p)
    p.write_text("")
    with pytest.raises(CSVFormatError, match="empty"):
        read_trajectory_csv(p)
    p.write_text("t,p,v,u,V,W\n1,2\n")
    with pytest.raises(CSVFormatError, match="line 2"):
        read_trajectory_csv(p)


def test_io_error_exits_one(tmp_path):
    assert run_cli(["simulate", "--t-final", "0.01", "--dt", "0.01", "--out", str(tmp_path / "no" / "x.csv")]) == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "satctl", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for sub in ("simulate", "certify", "sweep", "props", "plot"):
        assert sub in res.stdout
