import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from rieszlab import PointSet, fibonacci_sphere, flat_torus, sphere
from rieszlab.cli import (cli_dispatch, format_pointset, load_pointset,
                          parse_pointset, parse_rate_config, save_pointset)
from rieszlab.errors import InputError


def run_cli(args, capsys):
    code = cli_dispatch(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ----------------------------------------------------------------------
# point-set files
# ----------------------------------------------------------------------

def test_roundtrip_full_precision(tmp_path):
    X = fibonacci_sphere(64)
    path = str(tmp_path / "pts.txt")
    save_pointset(X, path)
    Y = load_pointset(path)
    assert np.array_equal(X.coords, Y.coords)
    assert Y.manifold == X.manifold


def test_roundtrip_torus(tmp_path):
    from rieszlab import kronecker_torus
    X = kronecker_torus(2, 33)
    path = str(tmp_path / "pts.txt")
    save_pointset(X, path)
    Y = load_pointset(path)
    assert np.array_equal(X.coords, Y.coords)


def test_parse_rejects_wrong_row_count():
    text = "# rieszlab pointset format=1\n# manifold=flat-torus dim=1\n# n=3\n0.1\n0.2\n"
    with pytest.raises(InputError):
        parse_pointset(text)


def test_parse_rejects_bad_row():
    text = "# manifold=flat-torus dim=1\n# n=1\nnot-a-number\n"
    with pytest.raises(InputError):
        parse_pointset(text)


def test_parse_rejects_missing_header():
    with pytest.raises(InputError):
        parse_pointset("0.1 0.2\n")


def test_load_warns_on_drift(capsys):
    text = "# manifold=sphere dim=2\n# n=1\n1.000001 0 0\n"
    X = parse_pointset(text)
    err = capsys.readouterr().err
    assert "warning" in err
    assert np.linalg.norm(X.coords[0]) == pytest.approx(1.0, abs=1e-12)


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def test_generate_then_energy(tmp_path, capsys):
    pts = str(tmp_path / "fib.txt")
    code, _, _ = run_cli(["generate", "--manifold", "sphere", "--dim", "2",
                          "--gen", "fibonacci", "--n", "100", "--out", pts], capsys)
    assert code == 0
    code, out, _ = run_cli(["energy", "--in", pts, "--s", "1"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["energy_continuous"] == pytest.approx(0.9259685259912329, abs=1e-9)
    assert payload["n"] == 100
    assert payload["version"]
    assert payload["provenance"]["generator"] == "fibonacci"


def test_separation_antipodal(tmp_path, capsys):
    X = PointSet(sphere(2), [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
    pts = str(tmp_path / "anti.txt")
    save_pointset(X, pts)
    code, out, _ = run_cli(["separation", "--in", pts], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["min_distance"] == pytest.approx(math.pi, abs=1e-12)


def test_discrepancy_equally_spaced(tmp_path, capsys):
    ang = 2 * math.pi * np.arange(10) / 10
    X = PointSet(sphere(1), np.column_stack([np.cos(ang), np.sin(ang)]))
    pts = str(tmp_path / "circ.txt")
    save_pointset(X, pts)
    code, out, _ = run_cli(["discrepancy", "--in", pts, "--extra-centers", "0"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["value"] == pytest.approx(0.1, abs=1e-9)
    assert payload["center_set"]["extra_centers"] == 0


def test_verify_lemmas_json(tmp_path, capsys):
    code, out, _ = run_cli(["verify-lemmas", "--manifold", "torus", "--dim", "2",
                            "--s", "1.0", "--seed", "3"], capsys)
    assert code == 0
    payload = json.loads(out)
    names = [c["check"] for c in payload["checks"]]
    assert "ball-volume-flatness" in names
    assert "packing-bound" in names
    assert all(c["passed"] for c in payload["checks"])


def test_rate_command(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("manifold=sphere\ndim=2\ns=1.0\ngenerator=fibonacci\n"
                   "ns=32,64,128\nextra_centers=0\nseed=1\n")
    csv_path = str(tmp_path / "out.csv")
    json_path = str(tmp_path / "out.json")
    code, _, err = run_cli(["rate", "--config", str(cfg),
                            "--out-csv", csv_path, "--out-json", json_path], capsys)
    assert code == 0
    lines = open(csv_path).read().strip().splitlines()
    assert lines[0] == "N,energy_discrete,energy_continuous,gap,disc_estimate,separation,gamma_hat"
    assert len(lines) == 4
    payload = json.loads(open(json_path).read())
    assert payload["config"]["seed"] == 1
    assert len(payload["rows"]) == 3


def test_rate_config_parsing_errors(tmp_path):
    with pytest.raises(InputError):
        parse_rate_config("manifold=sphere\ndim=2\ns=1.0\n")  # no generator
    with pytest.raises(InputError):
        parse_rate_config("manifold=sphere\ndim=2\ns=1.0\ngenerator=fibonacci\n"
                          "ns=32\nbogus_key=1\n")
    cfg = parse_rate_config("manifold=torus\ndim=1\ns=0.5\ngenerator=kronecker\n"
                            "n_min=32\nn_max=128\n# comment\n")
    assert cfg.ns == [32, 64, 128]


# ----------------------------------------------------------------------
# exit codes
# ----------------------------------------------------------------------

def test_unknown_subcommand_exits_one(capsys):
    code, _, err = run_cli(["frobnicate"], capsys)
    assert code == 1
    assert "usage" in err


def test_unknown_flag_exits_one(capsys):
    code, _, err = run_cli(["generate", "--bogus", "1"], capsys)
    assert code == 1
    assert "usage" in err


def test_no_subcommand_exits_one(capsys):
    code, _, err = run_cli([], capsys)
    assert code == 1


def test_missing_file_exits_one(capsys):
    code, _, err = run_cli(["energy", "--in", "/nonexistent/file.txt", "--s", "1"], capsys)
    assert code == 1


def test_bad_exponent_exits_two(tmp_path, capsys):
    pts = str(tmp_path / "p.txt")
    save_pointset(fibonacci_sphere(8), pts)
    code, _, err = run_cli(["energy", "--in", pts, "--s", "5.0"], capsys)
    assert code == 2
    assert "domain" in err


def test_coincident_points_exit_two(tmp_path, capsys):
    X = PointSet(flat_torus(1), [[0.25], [0.25], [0.75]])
    pts = str(tmp_path / "dup.txt")
    save_pointset(X, pts)
    code, _, err = run_cli(["energy", "--in", pts, "--s", "0.5"], capsys)
    assert code == 2


def test_generator_mismatch_exits_one(capsys):
    code, _, _ = run_cli(["generate", "--manifold", "torus", "--dim", "2",
                          "--gen", "fibonacci", "--n", "10"], capsys)
    assert code == 1


# ----------------------------------------------------------------------
# determinism across worker threads
# ----------------------------------------------------------------------

def cli_bytes(args, threads, cwd):
    env = dict(os.environ, RIESZ_THREADS=str(threads))
    proc = subprocess.run([sys.executable, "-m", "rieszlab.cli"] + args,
                          capture_output=True, env=env, cwd=cwd)
    assert proc.returncode == 0, proc.stderr.decode()
    return proc.stdout


def test_reports_byte_identical_across_threads(tmp_path):
    pts = str(tmp_path / "pts.txt")
    save_pointset(fibonacci_sphere(300), pts)
    for args in (["energy", "--in", pts, "--s", "1"],
                 ["discrepancy", "--in", pts, "--extra-centers", "50", "--seed", "4"],
                 ["separation", "--in", pts]):
        outputs = {cli_bytes(args, t, str(tmp_path)) for t in (1, 2, 8)}
        assert len(outputs) == 1
