import csv
import io
import json
import math

import pytest

from curvlab.cli import parse_triple, run_command, to_csv


def run(capsys, *argv):
    code = run_command(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_identities_json(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "identities", "--samples", "2000", "--seed", "7")
    assert code == 0
    report = json.loads(out)
    assert report["suite"] == "identities" and report["seed"] == 7
    names = [c["name"] for c in report["checks"]]
    assert {"melnikov_k0", "split_re_k0", "split_im_k0", "phase_invariance:linX"} <= set(names)
    for c in report["checks"]:
        assert set(c) == {"name", "samples", "max_residual", "tolerance", "pass"}
        assert c["pass"] and c["samples"] == 2000


def test_verify_closedform_and_failure_exit(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "closedform", "--samples", "500", "--h", "x")
    assert code == 0 and all(c["pass"] for c in json.loads(out)["checks"])
    code, out, _ = run(capsys, "verify", "--suite", "identities", "--samples", "500", "--tol", "0")
    assert code == 1


def test_verify_csv(capsys):
    code, out, _ = run(capsys, "verify", "--samples", "100", "--format", "csv", "--h", "linY")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows[0]["name"] == "melnikov_k0" and rows[0]["pass"] == "true"
    assert list(rows[0]) == ["name", "samples", "max_residual", "tolerance", "pass"]


def test_eval_example(capsys):
    code, out, _ = run(capsys, "eval", "--kernel", "kh", "--part", "re", "--h", "x",
                       "--triple", "0,0;2,0;1,1", "--form", "both")
    rep = json.loads(out)
    assert code == 0
    assert rep["residual"] <= 1e-12 and rep["brute_force"] == pytest.approx(rep["closed_form"], rel=1e-12)


@pytest.mark.parametrize("kernel, part", [("k0", "full"), ("k0", "im"), ("kh", "full"), ("kh", "im"), ("kh-star", "full")])
def test_eval_kernels(capsys, kernel, part):
    code, out, _ = run(capsys, "eval", "--kernel", kernel, "--part", part, "--h", "y*x",
                       "--triple", "0.5,-1;2,0.25;1e0,1.5", "--mode", "reduced", "--compensated")
    assert code == 0 and json.loads(out)["pass"]


def test_eval_collinear_and_brute_only(capsys):
    code, out, _ = run(capsys, "eval", "--h", "x", "--part", "re", "--triple", "0,0;2,0;1,0")
    assert code == 0 and json.loads(out)["closed_form"] == pytest.approx(0.5893250261153364, rel=1e-12)
    code, out, _ = run(capsys, "eval", "--kernel", "kh-star", "--part", "re", "--h", "x",
                       "--triple", "0,0;2,0;1,1", "--format", "csv")
    row = next(csv.DictReader(io.StringIO(out)))
    assert code == 0 and row["closed_form"] == "" and float(row["brute_force"])


def test_sweep_variant_c_csv(capsys):
    code, out, _ = run(capsys, "sweep", "remark-c", "--eps0", "1.5707963267948966", "--lambda", "1,0.1,0.01")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 3
    for row in rows:
        lam = float(row["lambda"])
        assert float(row["rh"]) == pytest.approx((1 + lam * lam) / (4 * lam), rel=1e-9)
        assert float(row["reference"]) == pytest.approx((1 + lam * lam) / lam, rel=1e-12)
    assert rows[1]["lambda"] == "0.10000000000000001"


def test_sweeps_other(capsys):
    code, out, _ = run(capsys, "sweep", "remark-d", "--eps0", "pi/4", "--lambda", "1", "--format", "json")
    assert code == 0 and json.loads(out)[0]["hfactor"] == pytest.approx(math.sqrt(2) / 2)
    code, out, _ = run(capsys, "sweep", "collapse", "--h", "linX", "--theta", "1e-1,1e-6")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and abs(float(rows[1]["E"]) - float(rows[1]["E_limit"])) <= 1e-4
    code, out, _ = run(capsys, "sweep", "collapse", "--h", "x", "--side", "h")
    assert code == 0 and "A_limit" in out.splitlines()[0]
    code, out, _ = run(capsys, "sweep", "deficit", "--h", "x", "--beta", "0.5", "--format", "json")
    assert code == 0 and json.loads(out)["max_deficit"] == pytest.approx(0.24837572414171097)


def test_search(capsys):
    code, out, _ = run(capsys, "search", "sign-change", "--h", "x", "--seed", "1", "--budget", "200000")
    rep = json.loads(out)
    assert code == 0 and rep["result"] == "SignChangeWitness"
    assert rep["half_plus_rh_pos"] > 0 > rep["half_plus_rh_neg"]
    code, out, _ = run(capsys, "search", "sign-change", "--h", "0", "--seed", "1", "--budget", "5000")
    assert code == 0 and json.loads(out)["result"] == "ConstantCertificate"


def test_probe(capsys):
    code, out, _ = run(capsys, "probe", "bound", "--h", "constPi5", "--samples", "2000", "--domain", "box:-2,2,-2,2")
    assert code == 0 and json.loads(out)["sup_abs_rh"] <= 1e-8


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["verify", "--bogus"],
    ["eval", "--triple", "1,2;3,4"],
    ["eval", "--h", "x +", "--triple", "0,0;1,0;0,1"],
    ["eval", "--h", "x", "--triple", "0,0;0,0;0,1"],
    ["sweep", "remark-c", "--eps0", "0.1"],
    ["sweep", "collapse", "--h", "x", "--theta", "2"],
    ["search", "sign-change", "--h", "x", "--budget", "10"],
    ["probe", "bound", "--h", "x", "--domain", "disk:0,0"],
    ["verify", "--samples", "10", "--out", "/nonexistent-dir/report.json"],
    ["search", "sign-change"],
])
def test_usage_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and err.startswith("curvlab: error:") and out == ""


def test_out_file_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(capsys, "verify", "--suite", "all", "--samples", "300", "--seed", "11", "--out", str(p))[0] == 0
    assert a.read_bytes() == b.read_bytes() and a.read_bytes()


def test_helpers():
    assert parse_triple("1e-3,2;-1,.5;3,4") == (complex(1e-3, 2), complex(-1, 0.5), complex(3, 4))
    assert to_csv([{"a": 0.1, "b": None}, {"a": True, "c": "s"}]) == "a,b,c\n0.10000000000000001,,\ntrue,,s\n"
