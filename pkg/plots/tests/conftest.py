import json
import subprocess
import sys

import pytest

ANALYTIC_PT = {
    "model": {"model": "pt", "nu": 0.0,
              "kappa": {"kind": "constant", "value": 0.0},
              "lambda": {"kind": "constant", "value": 1.0}},
    "time": {"t0": 0.0, "t1": 1.4, "output_grid_points": 141},
    "oracle": {"step": 1e-3},
}


def run_rau(*argv):
    """Invoke the simulator CLI as a black box (its public interface)."""
    proc = subprocess.run([sys.executable, "-m", "rau.cli", *argv],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


@pytest.fixture(scope="session")
def analytic_run(tmp_path_factory):
    """CSV + JSON summary for the pole-free analytic run."""
    root = tmp_path_factory.mktemp("analytic")
    cfg = root / "config.json"
    cfg.write_text(json.dumps(ANALYTIC_PT))
    csv_path = root / "run.csv"
    out = run_rau("simulate", str(cfg), "--csv", str(csv_path))
    summary = json.loads(out.strip().splitlines()[-1])
    return csv_path, summary


@pytest.fixture(scope="session")
def pole_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("pole")
    doc = dict(ANALYTIC_PT)
    doc["time"] = {"t0": 0.0, "t1": 2.0, "output_grid_points": 2001}
    cfg = root / "config.json"
    cfg.write_text(json.dumps(doc))
    csv_path = root / "run.csv"
    out = run_rau("simulate", str(cfg), "--csv", str(csv_path))
    summary = json.loads(out.strip().splitlines()[-1])
    return csv_path, summary


@pytest.fixture(scope="session")
def phase_scan_50(tmp_path_factory):
    """50x50 phase scan at fixed r = 1."""
    root = tmp_path_factory.mktemp("scan")
    out_path = root / "scan.csv"
    run_rau("phase-scan", "--r-min", "1", "--r-max", "1", "--r-points", "1",
            "--s-min", "0.02", "--s-max", "1.5", "--s-points", "50",
            "--theta-points", "50", "--out", str(out_path))
    return out_path
