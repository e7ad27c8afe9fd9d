import json
import subprocess
import sys

import pytest

from scl import io
from scl.cli import EXIT_NUMERIC, EXIT_OK, EXIT_VALIDATION, main

NU = '{"node":"nu_k","k":1}'
GEO = '{"node":"nu_theta","theta":1.5707963267948966}'


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_classify_nu(capsys):
    code, out = run(["classify", "--curve", NU], capsys)
    rep = json.loads(out)
    assert code == EXIT_OK
    assert rep["command"] == "classify" and rep["results"]["label"] == "X_z_c"
    assert rep["results"]["endpoint"] == [-1.0, 0.0, 0.0, 0.0]
    assert rep["input_digest"] == io.digest(json.loads(NU))


def test_scan_and_lift_from_file(tmp_path, capsys):
    f = tmp_path / "c.json"
    f.write_text('{"node":"f1","s1":1.0,"s2":1.0}')
    code, out = run(["scan", "--curve", str(f), "--samples", "1024"], capsys)
    assert code == EXIT_OK and json.loads(out)["parameters"]["samples"] == 1024
    code, out = run(["lift", "--curve", str(f), "--out", str(tmp_path / "lift.json")], capsys)
    assert code == EXIT_OK
    rep = json.loads((tmp_path / "lift.json").read_text())
    assert rep["results"]["endpoint_snapped"] == [1.0, 0.0, 0.0, 0.0]


def test_validation_failures_exit_2(tmp_path, capsys):
    assert main(["classify", "--curve", '{"node":"nu_theta","theta":4.0}']) == EXIT_VALIDATION
    assert main(["classify", "--curve", str(tmp_path / "missing.json")]) == EXIT_VALIDATION
    assert main(["classify", "--curve", GEO]) == EXIT_VALIDATION
    assert "SchemaError" in capsys.readouterr().err


def test_numeric_failure_exits_3(capsys):
    assert main(["degree", "f1-lift", "--grid", "8", "--no-preimages", "--tol", "1e-9"]) == EXIT_NUMERIC
    assert "ResidualTooLarge" in capsys.readouterr().err


def test_graft_writes_the_curve(tmp_path, capsys):
    out = tmp_path / "g.json"
    code, text = run(["graft", "--curve", GEO, "--curve-out", str(out)], capsys)
    assert code == EXIT_OK
    assert json.loads(text)["results"]["plan"]["n"] >= 21
    assert io.load_curve(out).inner.laps % 2 == 0


def test_homotopy_frames(tmp_path, capsys):
    code, text = run(["homotopy", "push", "--curve", GEO, "--steps", "3", "--frames", str(tmp_path / "fr")], capsys)
    assert code == EXIT_OK and json.loads(text)["results"]["valid"]
    assert len(list((tmp_path / "fr").glob("push_*.svg"))) == 6


def test_render_to_file(tmp_path, capsys):
    out = tmp_path / "c.svg"
    assert main(["render", "--curve", NU, "--diagnostics", "--out", str(out)]) == EXIT_OK
    assert out.read_text().startswith("<svg")


@pytest.mark.parametrize("criteria, code", [(["1", "4"], EXIT_OK), (["2"], EXIT_VALIDATION)])
def test_suite_exit_status(tmp_path, capsys, criteria, code):
    assert main(["suite", "--out", str(tmp_path), "--criteria", *criteria]) == code
    rep = json.loads((tmp_path / "report.json").read_text())
    assert [c["number"] for c in rep["results"]["criteria"]] == [int(c) for c in criteria]


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "scl.cli", "scan", "--curve", NU, "--samples", "512"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["results"]["counts"]["double_points"] == 0
