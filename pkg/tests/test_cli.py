"""CLI behavior: determinism, exit codes, formats."""
import json
import subprocess
import sys

import numpy as np

from vertex_telegraph.cli import main


def run_cli(args):
    proc = subprocess.run([sys.executable, "-m", "vertex_telegraph", *args],
                          capture_output=True, text=True)
    return proc.returncode, proc.stdout, proc.stderr


def test_shape_dw_q0_prints_one_third(capsys):
    rc = main(["shape", "--kind", "dw-q0", "--s", "0.25", "--x", "1", "--y", "1"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["value"] == 1.0 / 3.0
    assert doc["provenance"]["source"] == "formula"


def test_sample_deterministic_bytes(tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    args = ["sample", "--b1", "0.99", "--b2", "0.98", "--X", "32", "--Y", "32",
            "--boundary", "domain-wall", "--seed", "7"]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    text = out1.read_text()
    assert text.splitlines()[0] == "x,y,value"


def test_solve_discrete_methods_agree(tmp_path):
    rng = np.random.default_rng(0)
    X = Y = 12
    chi = rng.uniform(-1, 1, X + 1)
    psi = rng.uniform(-1, 1, Y + 1)
    psi[0] = chi[0]
    (tmp_path / "chi.csv").write_text("\n".join(repr(float(v)) for v in chi))
    (tmp_path / "psi.csv").write_text("\n".join(repr(float(v)) for v in psi))
    outs = {}
    for method in ("recursive", "riemann"):
        out = tmp_path / f"{method}.csv"
        rc = main(["solve-discrete", "--b1", "0.7", "--b2", "0.5",
                   "--chi", str(tmp_path / "chi.csv"), "--psi", str(tmp_path / "psi.csv"),
                   "--method", method, "--out", str(out)])
        assert rc == 0
        outs[method] = np.array([float(line.split(",")[2])
                                 for line in out.read_text().splitlines()[1:]])
    assert np.abs(outs["recursive"] - outs["riemann"]).max() < 1e-9


def test_fk_json_fields(tmp_path, capsys):
    rc = main(["fk", "--mode", "continuous", "--beta1", "1", "--beta2", "2",
               "--chi", "expr:x", "--psi", "expr:0.0*y", "--X", "1", "--Y", "1",
               "--samples", "500", "--seed", "3"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) == {"estimate", "std_error", "n", "provenance"}
    assert doc["n"] == 500


def test_verify_fourpoint_exit_zero(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"params": {"beta1": 1.0, "beta2": 2.0, "L": 16},
                               "lattice": {"X": 10, "Y": 10},
                               "samples": 600, "seed": 3}))
    rc = main(["verify", "--suite", "fourpoint", "--config", str(cfg),
               "--out", str(tmp_path / "rep")])
    assert rc == 0
    rep = json.loads((tmp_path / "rep" / "report.json").read_text())
    assert rep["passed"] is True
    assert rep["suites"]["fourpoint"]["worst_integrated_residual"] < 1e-10


def test_unknown_flag_exits_one():
    rc, _, err = run_cli(["sample", "--nonsense", "1"])
    assert rc == 1
    assert "usage" in err.lower() or "error" in err.lower()


def test_invalid_value_exits_one(capsys):
    rc = main(["sample", "--b1", "0.5", "--b2", "0.5", "--X", "4", "--Y", "4"])
    assert rc == 1


def test_solve_telegraph_quadrature_and_picard_agree(tmp_path):
    common = ["solve-telegraph", "--beta1", "1", "--beta2", "2",
              "--domain", "1,1", "--grid", "64,64",
              "--chi", "expr:cos(x)", "--psi", "expr:1.0+0.0*y"]
    a = tmp_path / "q.csv"
    b = tmp_path / "p.csv"
    assert main(common + ["--method", "quadrature", "--out", str(a)]) == 0
    assert main(common + ["--method", "picard", "--out", str(b)]) == 0
    va = np.array([float(l.split(",")[2]) for l in a.read_text().splitlines()[1:]])
    vb = np.array([float(l.split(",")[2]) for l in b.read_text().splitlines()[1:]])
    assert np.abs(va - vb).max() < 5e-4  # 64^2 grid: trapezoid-limited


def test_numerical_failure_exits_two(capsys):
    # contracting cells cannot form on an 8x8 grid with huge coefficients
    rc = main(["solve-telegraph", "--beta1", "40", "--beta2", "80",
               "--domain", "1,1", "--grid", "8,8", "--chi", "expr:0.0*x",
               "--psi", "expr:0.0*y", "--method", "picard"])
    assert rc == 2


def test_csv_provenance_sidecar(tmp_path):
    out = tmp_path / "h.csv"
    rc = main(["sample", "--b1", "0.9", "--b2", "0.8", "--X", "4", "--Y", "4",
               "--boundary", "domain-wall", "--seed", "1", "--out", str(out)])
    assert rc == 0
    side = json.loads((tmp_path / "h.csv.provenance.json").read_text())
    assert side["provenance"]["source"] == "monte-carlo"
    assert len(side["provenance"]["config_sha256"]) == 64
