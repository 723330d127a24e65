import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from wcps import cli
from wcps.cli import main
from wcps.exactnum import format_quad, parse_quad


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(text.splitlines()))


# generate --------------------------------------------------------------------
def test_generate_fibonacci_counts(capsys):
    code, out, _ = run(capsys, "generate", "--T", "30")
    assert code == 0
    r = rows(out)
    # exact enumeration on [0, 30]: 22 points (density tau/sqrt5 ~ 0.7236)
    assert len(r) == 22
    assert r[0]["direct"] == "0" and r[0]["mass"] == "1"
    assert list(r[0]) == ["direct", "direct_float", "internal", "internal_float", "mass"]
    code, out, _ = run(capsys, "generate", "--T", "1/2")
    assert code == 0 and len(rows(out)) == 1


def test_generate_weighted(capsys):
    code, out, _ = run(capsys, "generate", "--T", "5", "--weight", "hat")
    assert code == 0
    h = cli.parse_weight("hat", cli.load_scheme("fibonacci"))
    assert [r["mass"] for r in rows(out)] == [format_quad(h(parse_quad(r["internal"]))) for r in rows(out)]


def test_bad_json_reports_byte_offset(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"basis": [[1, 2], oops]}')
    code, _, err = run(capsys, "generate", "--scheme", str(bad), "--T", "10")
    assert code == 2
    # "oops" starts at byte 19
    assert "byte 19" in err


def test_parse_errors(capsys):
    assert run(capsys, "generate", "--T", "abc")[0] == 2
    assert run(capsys, "generate", "--T", "10", "--scheme", "no_such_file.json")[0] == 2
    assert run(capsys, "scan", "--precision", "20")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


# scan ----------------------------------------------------------------------------
@pytest.mark.parametrize("scheme,weight,verdict", [
    ("fibonacci", None, "consistent_with_bd"),
    ("fibonacci-half", None, "inconsistent"),
    ("fibonacci", "hat", "consistent_with_bd"),
])
def test_scan_verdicts(tmp_path, capsys, scheme, weight, verdict):
    argv = ["scan", "--scheme", scheme, "--out", str(tmp_path / "run")]
    if weight:
        argv += ["--weight", weight]
    code, out, _ = run(capsys, *argv)
    assert code == 0 and out.strip() == f"verdict: {verdict}"
    rep = json.loads((tmp_path / "run_verdict.json").read_text())
    assert rep["verdict"] == verdict
    assert (tmp_path / "run_trace.csv").exists()


def test_scan_unsupported_weight(capsys):
    assert run(capsys, "scan", "--weight", "sawtooth")[0] == 3


def test_scan_byte_identical(tmp_path, capsys):
    for k in (1, 2):
        assert run(capsys, "scan", "--checkpoints", "100,1000,10000", "--out", str(tmp_path / f"r{k}"))[0] == 0
    for suffix in ("_verdict.json", "_trace.csv"):
        assert (tmp_path / f"r1{suffix}").read_bytes() == (tmp_path / f"r2{suffix}").read_bytes()


# cfrac -----------------------------------------------------------------------------
def test_cfrac_outputs(capsys):
    code, out, _ = run(capsys, "cfrac", "1/2+1/2*sqrt(5)", "--terms", "5")
    assert code == 0 and out.splitlines()[0] == "[1;(1)]"
    r = rows("\n".join(out.splitlines()[1:]))
    assert [int(x["q"]) for x in r] == [1, 1, 2, 3, 5, 8]
    assert float(r[0]["S"]) == 1 and float(r[1]["S"]) == 3
    code, out, _ = run(capsys, "cfrac", "1+1*sqrt(2)", "--terms", "3")
    assert code == 0 and out.splitlines()[0] == "[2;(2)]"
    assert run(capsys, "cfrac", "3/4")[0] == 3


# brs ---------------------------------------------------------------------------------
def _sups(text):
    return [float(r["running_sup"]) for r in rows(text)]


def test_brs_square_zero_and_rhombus_bounded(capsys):
    code, out, _ = run(capsys, "brs", "--region", "square", "--T", "10000")
    assert code == 0 and max(_sups(out)) < 1e-6
    code, out, _ = run(capsys, "brs", "--region", "rhombus", "--T", "100000")
    s = _sups(out)
    assert code == 0 and s[-1] <= 1.2 * s[3]


def test_brs_strip_grows(capsys):
    code, out, _ = run(capsys, "brs", "--region", "strip:1/4", "--alpha=-1/2+1/2*sqrt(5)", "--T", "100000")
    s = _sups(out)
    assert code == 0 and s[-1] >= s[2] + 1
    assert list(rows(out)[0]) == ["t", "delta", "running_sup", "events_since_last"]


def test_brs_region_outside_square(capsys):
    code, _, err = run(capsys, "brs", "--region", '{"vertices": [[0, 0], [2, 0], [0, 1]]}', "--T", "10")
    assert code == 3


def test_brs_tolerance_failure(monkeypatch, capsys):
    real = cli.delta_sup_scan

    def broken(*a, **k):
        tr = real(*a, **k)
        tr.values = tr.values + 0.5
        return tr

    monkeypatch.setattr(cli, "delta_sup_scan", broken)
    assert run(capsys, "brs", "--region", "rhombus", "--T", "100")[0] == 4


def test_brs_jobs_independent(tmp_path, capsys):
    for j in (1, 4):
        assert run(capsys, "brs", "--T", "300000", "--jobs", str(j), "--out", str(tmp_path / f"j{j}"))[0] == 0
    assert (tmp_path / "j1_delta.csv").read_bytes() == (tmp_path / "j4_delta.csv").read_bytes()


# compare ------------------------------------------------------------------------------
def test_compare_lattice(capsys):
    code, out, _ = run(capsys, "compare", "--against", "lattice:5/2-1/2*sqrt(5)", "--T", "1000")
    assert code == 0
    rep = json.loads(out)
    assert rep["C"] >= rep["sampled_max"]
    code, out, _ = run(capsys, "compare", "--T", "1000", "--seed", "3")
    rep = json.loads(out)
    assert rep["seed"] == 3 and np.isclose(rep["C"], 1.4466830922677)


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "wcps", "cfrac", "1/2+1/2*sqrt(5)", "--terms", "2"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.splitlines()[0] == "[1;(1)]"
