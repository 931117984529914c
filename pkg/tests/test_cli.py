import subprocess
import sys

import numpy as np

from matrix_alps.cli import main
from matrix_alps.harness import parse_table, write_pgm


def test_toy_reports_exact_recovery(capsys):
    assert main(["toy"]) == 0
    out = capsys.readouterr().out
    for algo in ("alps2", "admira", "svp", "alps1"):
        assert f"{algo}: exact" in out


def test_probe_rip_identity(capsys):
    assert main(["probe-rip", "--operator", "identity", "--m", "6", "--n", "5", "--trials", "20"]) == 0
    assert "delta=0" in capsys.readouterr().out


def test_arm_benchmark_writes_csv(tmp_path, capsys):
    out = tmp_path / "t.csv"
    argv = ["arm", "--m", "32", "--n", "32", "--k", "2", "--sr", "0.4", "--trials", "2",
            "--algo", "alps2", "--algo", "alps1", "--out", str(out), "--format", "csv"]
    assert main(argv) == 0
    rows = parse_table(out.read_text())
    assert [r["algorithm"] for r in rows] == ["alps2", "alps1"]
    assert all(r["median_err"] <= 1e-3 for r in rows)
    assert capsys.readouterr().out == out.read_text()


def test_mc_benchmark_with_solver_flags(capsys):
    argv = ["mc", "--m", "30", "--n", "40", "--k", "2", "--sr", "0.5", "--trials", "1", "--proj", "rand", "--q", "1",
            "--momentum", "constant", "--tau", "0.25", "--union", "raw", "--projmode", "left", "--tol", "1e-6",
            "--max-iters", "400"]
    assert main(argv) == 0
    assert "alps2" in capsys.readouterr().out


def test_invalid_input_exit_code(capsys):
    assert main(["mc", "--k", "0", "--trials", "1"]) == 1
    assert "error" in capsys.readouterr().err


def test_divergence_exit_code():
    assert main(["arm", "--m", "32", "--n", "32", "--k", "2", "--sr", "0.3", "--trials", "1", "--algo", "svp"]) == 2


def test_denoise_command(tmp_path, capsys):
    rng = np.random.default_rng(0)
    L = rng.uniform(0, 1, (48, 3)) @ rng.uniform(0, 1, (3, 64))
    src, dst = tmp_path / "in.pgm", tmp_path / "out.pgm"
    write_pgm(src, 255 * L / L.max())
    assert main(["denoise", str(src), "--k", "3", "--observe", "0.6", "--output", str(dst), "--rank-k-reference"]) == 0
    assert "SNR" in capsys.readouterr().out
    assert dst.read_bytes().startswith(b"P5")


def test_denoise_malformed_image(tmp_path):
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P6\n1 1\n255\n\x00")
    assert main(["denoise", str(bad), "--k", "1"]) == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "matrix_alps.cli", "toy", "--algo", "svp"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and "svp: exact" in res.stdout
