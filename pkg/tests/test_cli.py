import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from structmat import textio
from structmat.cli import BENCH_COLUMNS, bench, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_tsolve_oracle(capsys):
    rep = report(capsys, "tsolve", "--n", "512", "--seed", "7", "--eps", "1e-8", "--oracle")
    assert rep["residual"] <= 1e-5 and rep["error"] <= 1e-5
    assert rep["command"].startswith("structmat tsolve")


def test_unknown_flag_exit_1(capsys):
    code, _, err = run(capsys, "tsolve", "--bogus")
    assert code == 1 and "usage" in err


def test_unknown_verb_exit_1(capsys):
    assert run(capsys, "frobnicate")[0] == 1


def test_bad_values_exit_1(capsys):
    assert run(capsys, "cvmatvec", "--n", "0")[0] == 1
    assert run(capsys, "cvmatvec", "--eps", "-1")[0] == 1
    assert run(capsys, "cvmatvec", "--knots", "file:/nonexistent/knots.txt")[0] == 1
    assert run(capsys, "cvmatvec", "--knots", "spiral")[0] == 1


def test_cvsolve_clustered_exit_2(capsys):
    code, _, err = run(capsys, "cvsolve", "--n", "64", "--knots", "clustered")
    assert code == 2
    assert err.splitlines()[0].startswith("error: ill-conditioned:")


def test_singular_tsolve_exit_2(tmp_path, capsys):
    col = tmp_path / "col.txt"
    textio.write_vector(np.ones(16), str(col))
    code, _, err = run(capsys, "tsolve", "--n", "16", "--col", str(col))
    assert code == 2 and err.startswith("error: singular:")


def test_collision_exit_2(tmp_path, capsys):
    path = tmp_path / "knots.txt"
    textio.write_vector(np.exp(2j * np.pi * np.arange(32) / 32), str(path))
    code, _, err = run(capsys, "cvmatvec", "--n", "32", "--knots", f"file:{path}")
    assert code == 2 and err.startswith("error: knot-collision:")


def test_deterministic_payload(capsys):
    args = ("cvmatvec", "--n", "256", "--seed", "3", "--knots", "annulus", "--oracle")
    a, b = report(capsys, *args), report(capsys, *args)
    a.pop("wall_time")
    b.pop("wall_time")
    assert a == b


@pytest.mark.parametrize("argv", [
    ("gen", "--n", "16", "--class", "cauchy"),
    ("solve", "--class", "toeplitz", "--n", "64", "--oracle"),
    ("solve", "--class", "hankel", "--n", "64", "--oracle"),
    ("solve", "--class", "cauchy", "--n", "64", "--oracle"),
    ("solve", "--class", "vandermonde", "--n", "32", "--knots", "perturbed", "--oracle"),
    ("matvec", "--class", "vandermonde", "--n", "32", "--oracle"),
    ("eval", "--n", "64", "--oracle"),
    ("eval", "--n", "32", "--degree", "80", "--oracle"),
    ("interp", "--n", "64", "--oracle"),
    ("vmatvec", "--n", "64", "--oracle"),
    ("vmatvec", "--n", "64", "--oracle", "--transpose"),
    ("vsolve", "--n", "64", "--oracle", "--knots", "perturbed"),
    ("vsolve", "--n", "64", "--oracle", "--transpose"),
    ("cvmatvec", "--n", "128", "--oracle"),
    ("cvsolve", "--n", "128", "--oracle"),
    ("logkernel", "--n", "32", "--oracle"),
    ("logkernel", "--n", "32", "--points", "32", "--coefficients", "--oracle"),
    ("transform", "--map", "tc-dft", "--n", "16", "--oracle"),
    ("hss-report", "--n", "256"),
    ("hss-report", "--n", "256", "--fcf"),
])
def test_verbs_succeed(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    if argv[0] == "gen" and "--out" not in argv:
        assert textio.read_generator(io.StringIO(out)).n == 16
        return
    rep = json.loads(out)
    for key in ("error", "residual"):
        if key in rep:
            assert rep[key] <= 1e-5, rep


def test_gen_round_trip_through_files(tmp_path, capsys):
    g = tmp_path / "gen.txt"
    u = tmp_path / "u.txt"
    y = tmp_path / "y.txt"
    report(capsys, "gen", "--n", "32", "--out", str(g))
    textio.write_vector(np.arange(32) + 1j, str(u))
    rep = report(capsys, "matvec", "--gen", str(g), "--input", str(u), "--out", str(y), "--oracle")
    assert rep["error"] <= 1e-12
    gen = textio.read_generator(str(g))
    from structmat.displacement import recover_dense
    assert np.allclose(textio.read_vector(str(y)), recover_dense(gen) @ (np.arange(32) + 1j))


def test_hss_report_dump(tmp_path, capsys):
    out = tmp_path / "dump.txt"
    rep = report(capsys, "hss-report", "--n", "512", "--out", str(out))
    lines = out.read_text().splitlines()
    assert lines[0] == "level sector rows cols rank theta delta bound"
    assert len(lines) == rep["blocks"] + 1
    assert rep["max_bound"] <= 1e-8


def test_bench_csv(capsys, tmp_path):
    code, out, _ = run(capsys, "bench", "--sizes", "64,128", "--trials", "3")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert tuple(rows[0].keys()) == BENCH_COLUMNS
    assert [int(r["n"]) for r in rows] == [64, 128]
    assert all(r["trials"] == "3" for r in rows)
    assert run(capsys, "bench", "--sizes", "100")[0] == 1


def test_bench_function_single_size():
    rows = bench([256], 1e-8, 3)
    assert len(rows) == 1 and set(rows[0]) == set(BENCH_COLUMNS)
    assert rows[0]["median_seconds"] > 0 and rows[0]["max_rank"] > 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "structmat", "eval", "--n", "16"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["n"] == 16
