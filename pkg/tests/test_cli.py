import csv
import json
import os
import subprocess
import sys

from oldroyd_spectral.cli import main
from oldroyd_spectral.config import OUTPUT_ENV


def write_cfg(tmp_path, extra=""):
    p = tmp_path / "run.cfg"
    p.write_text(f"grid.N = 16\nintegration.T = 0.2\noutput.dir = {tmp_path / 'out'}\n{extra}")
    return str(p)


def test_run_clean(tmp_path, capsys):
    assert main(["run", write_cfg(tmp_path)]) == 0
    assert "completed" in capsys.readouterr().out
    assert json.load(open(tmp_path / "out" / "summary.json"))["exit_code"] == 0


def test_run_monitor_trip(tmp_path):
    assert main(["run", write_cfg(tmp_path), "--set", "init.epsilon=2", "--set", "integration.T=5"]) == 2


def test_config_errors(tmp_path, capsys):
    assert main(["run", write_cfg(tmp_path, "grid.N = 7\n")]) == 4
    assert "grid" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.cfg")]) == 4
    assert main(["run", write_cfg(tmp_path), "--set", "oops"]) == 4


def test_output_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    assert main(["run", write_cfg(tmp_path)]) == 0
    assert (tmp_path / "env" / "timeseries.csv").exists()
    assert not (tmp_path / "out").exists()


def test_resume(tmp_path):
    cfg = write_cfg(tmp_path, "output.checkpoint_every = 10\n")
    assert main(["run", cfg]) == 0
    ck = tmp_path / "out" / "checkpoint_00000010.ckpt"
    assert main(["resume", str(ck), "--set", f"output.dir={tmp_path / 'again'}"]) == 0
    assert (tmp_path / "again" / "final.ckpt").exists()


def test_sweep_dispersion(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep-dispersion", "--n", "3", "--ximin", "0.015625", "--ximax", "64",
                 "--samples", "64", "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 64 and all(r["flag"] == "0" for r in rows)
    assert main(["sweep-dispersion", "--n", "2", "--ximin", "2", "--ximax", "1"]) == 4


def test_verify_small(capsys):
    assert main(["verify", "--samples", "3"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 6


def test_console_script_entry(tmp_path):
    r = subprocess.run([sys.executable, "-m", "oldroyd_spectral.cli", "sweep-dispersion", "--n", "2",
                        "--samples", "4", "--out", str(tmp_path / "s.csv")], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert os.path.exists(tmp_path / "s.csv")
