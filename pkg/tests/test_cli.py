"""End-to-end CLI runs: golden outputs, determinism, exit codes."""

import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from ertl.cli import main

GOLDEN = Path(__file__).parent / "golden"

DISCRETE = '{"kind":"discrete","nodes":[1.0,2.0],"weights":[1.0,1.0],"p":[0,0],"q":[0,0]}'
DISCRETE_PQ = ('{"kind":"discrete","nodes":[0.4,0.9,1.5,2.3,3.4,5.0],'
               '"weights":[1.0,0.8,1.2,0.9,1.1,0.7],"p":[1,0],"q":[2,0]}')


def body(path):
    return [ln for ln in Path(path).read_text().splitlines()
            if not ln.startswith("#")]


def run_cli(args, capsys=None):
    code = main(args)
    return code


def test_oracle_example1_golden(tmp_path):
    out = tmp_path / "o.csv"
    assert main(["oracle", "example1", "--delta", "1", "--q", "2",
                 "--t", "0", "--N", "4", "--out", str(out)]) == 0
    assert body(out) == body(GOLDEN / "oracle_example1.csv")
    # beta column is sqrt(2) everywhere
    for ln in body(out)[1:]:
        assert ln.split(",")[1] == "1.4142135623730951"


def test_oracle_example2_runs(tmp_path):
    out = tmp_path / "o2.csv"
    assert main(["oracle", "example2", "--delta", "1", "--q", "1",
                 "--t", "0", "--N", "3", "--out", str(out)]) == 0
    rows = [ln.split(",") for ln in body(out)[1:]]
    assert float(rows[0][1]) == pytest.approx(0.8)
    assert float(rows[1][3]) == pytest.approx(0.45)


def test_moments_golden(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["moments", "--measure", DISCRETE, "--t", "0", "--K", "2",
                 "--out", str(out)]) == 0
    assert body(out) == body(GOLDEN / "moments_discrete.csv")


def test_from_measure_golden(tmp_path):
    out = tmp_path / "fm.csv"
    assert main(["from-measure", "--measure", DISCRETE_PQ, "--t", "0.0",
                 "--N", "4", "--out", str(out)]) == 0
    assert body(out) == body(GOLDEN / "from_measure_discrete.csv")


def test_from_measure_dump_poly(tmp_path):
    out = tmp_path / "fm.csv"
    dump = tmp_path / "poly.json"
    assert main(["from-measure", "--measure", DISCRETE_PQ, "--t", "0.0",
                 "--N", "3", "--out", str(out), "--dump-poly", str(dump)]) == 0
    data = json.loads(dump.read_text())
    entry = data[next(iter(data))]
    assert entry["N"] == 3
    assert entry["rows"][2][2] == [1.0, 0.0]  # monic leading coefficient
    assert entry["conventions"]["alpha_1"] == 0


def test_simulate_stationary_single_site(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["simulate", "--system", "ertl", "--p", "1,0", "--q", "2,0",
                 "--t-end", "1", "--init", '{"beta":[[1,0]],"alpha":[]}',
                 "--out", str(out)]) == 0
    rows = [ln.split(",") for ln in body(out)[1:]]
    assert rows[0][2] == rows[-1][2] == "1"


def test_simulate_golden_and_determinism(tmp_path):
    args = ["simulate", "--system", "rtl2", "--p", "1,0", "--q", "0,0",
            "--t-end", "0.5", "--t-out", "0.25,0.5",
            "--init", '{"beta":[[1,0],[2,0],[1.5,0]],"alpha":[[0.5,0],[0.25,0]]}']
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert body(out1) == body(out2)
    assert body(out1) == body(GOLDEN / "simulate_rtl2.csv")


def test_simulate_cd_and_schur(tmp_path):
    out = tmp_path / "cd.csv"
    assert main(["simulate", "--system", "cd", "--q", "0.5,0", "--t-end", "0.3",
                 "--init", '{"c":[0,0,0,0],"d":[0,0.25,0.25,0.25]}',
                 "--out", str(out)]) == 0
    rows = [ln.split(",") for ln in body(out)[1:]]
    assert rows[0][2] == "0"  # c stays 0 under real q from symmetric start
    out2 = tmp_path / "schur.csv"
    assert main(["simulate", "--system", "schur", "--q", "0.5,0", "--t-end", "0.3",
                 "--init", '{"a":[[0.2,0],[0.1,0],[0.05,0]]}',
                 "--out", str(out2)]) == 0
    rows2 = [ln.split(",") for ln in body(out2)[1:]]
    assert max(abs(float(r[2])) for r in rows2) < 1.0


def test_verify_lax_report(capsys):
    assert main(["verify-lax", "--N", "8", "--p", "1,0", "--q", "2,0",
                 "--seed", "7"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["pass"] is True
    assert report["residual"] < 1e-12


def test_verify_lax_sweep_with_threads(capsys, monkeypatch):
    monkeypatch.setenv("ERTL_THREADS", "2")
    assert main(["verify-lax", "--N", "5", "--p", "0.7,0.3", "--q", "1.1,-0.4",
                 "--seed", "11", "--count", "6"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["count"] == 6
    assert all(r < 1e-12 for r in report["residuals"])


def test_spectrum_from_trajectory(tmp_path):
    traj = tmp_path / "traj.csv"
    assert main(["simulate", "--system", "ertl", "--p", "1,0", "--q", "1,0",
                 "--t-end", "0.5", "--t-out", "0.25,0.5",
                 "--init", '{"beta":[[1,0],[2,0]],"alpha":[[1,0]]}',
                 "--out", str(traj)]) == 0
    out = tmp_path / "spec.csv"
    assert main(["spectrum", "--traj", str(traj), "--out", str(out)]) == 0
    rows = [ln.split(",") for ln in body(out)[1:]]
    assert len(rows) == 6  # 3 times x 2 eigenvalues
    by_t = {}
    for r in rows:
        by_t.setdefault(r[0], []).append(complex(float(r[2]), float(r[3])))
    specs = list(by_t.values())
    for s in specs[1:]:  # isospectral within integration tolerance
        assert max(abs(a - b) for a, b in zip(s, specs[0])) < 1e-7


def test_circle_subcommands(tmp_path, capsys):
    out = tmp_path / "v.csv"
    assert main(["circle", "verblunsky", "--q", "0.5,0", "--N", "6",
                 "--t", "0.3", "--out", str(out)]) == 0
    rows = [ln.split(",") for ln in body(out)[1:]]
    assert len(rows) == 6 and float(rows[0][1]) < 0

    out2 = tmp_path / "cd.csv"
    assert main(["circle", "cd", "--q", "0.5,0", "--N", "6", "--t", "0.2",
                 "--out", str(out2)]) == 0
    assert body(out2) == body(GOLDEN / "circle_cd.csv")

    out3 = tmp_path / "k.csv"
    assert main(["circle", "kernel", "--q", "0.5,0", "--N", "5", "--t", "0.2",
                 "--w", "1,0", "--out", str(out3)]) == 0
    rows3 = [ln.split(",") for ln in body(out3)[1:]]
    assert len(rows3) == 5

    assert main(["circle", "schur-check", "--q", "0.5,0", "--N", "8",
                 "--t", "0.25"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["pass"] is True
    assert report["max_err_n_ge_1"] < 1e-5


def test_exit_code_validation_error(capsys):
    assert main(["simulate", "--system", "cd", "--q", "1,0", "--t-end", "1"]) == 1
    err = json.loads(capsys.readouterr().err)
    assert "error" in err


def test_exit_code_numerical_breakdown(capsys):
    # blow-up of the flow: detected singular denominator maps to exit 2
    code = main(["simulate", "--system", "rtl1", "--q", "1,0", "--t-end", "2",
                 "--init", '{"beta":[[0.5,0],[1,0]],"alpha":[[-1,0]]}'])
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] in ("SingularDenominator", "StepUnderflow")


def test_console_script_installed():
    proc = subprocess.run([sys.executable, "-m", "ertl.cli", "oracle", "example1",
                           "--delta", "1", "--q", "2", "--t", "1", "--N", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "1.4142135623730951" in proc.stdout
