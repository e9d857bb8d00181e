import json
import subprocess
import sys

import pytest

from mrleq.cli import argv_from_config, run

UNIFORM = '{"kind": "uniform", "a": 0, "b": 1}'
EXP1 = '{"kind": "exponential", "rate": 1}'
EXP2 = '{"kind": "exponential", "rate": 2}'


def _run_json(argv, capsys):
    code = run(argv)
    return code, json.loads(capsys.readouterr().out)


def test_poa(capsys):
    code, doc = _run_json(["poa", "--n", "4"], capsys)
    assert code == 0 and doc["poa"] == 1.25
    assert doc["schema_version"] == "1.0" and doc["exit_code"] == 0


def test_solve_uniform(capsys):
    code, doc = _run_json(["solve", "--dist", UNIFORM], capsys)
    assert code == 0
    assert doc["result"]["r_star"] == pytest.approx(1 / 3, abs=1e-8)
    assert doc["config"]["dist"] == json.loads(UNIFORM)


def test_fundamentals_with_given_price(capsys):
    code, doc = _run_json(["fundamentals", "--r-star", "0.3333333333333333", "--alpha", "1"], capsys)
    assert code == 0 and doc["result"]["ratio"] == pytest.approx(1.0)


def test_parse_error_carries_pointer(capsys):
    assert run(["solve", "--dist", '{"kind": "exponential", "rate": -1}']) == 2
    err = capsys.readouterr().err
    assert "/dist/rate" in err
    assert run(["solve", "--dist", "{not json"]) == 2
    assert run(["solve"]) == 2
    assert run(["no-such-command"]) == 2


def test_check_property_exit_codes(capsys):
    assert run(["check-property", "--dist", UNIFORM, "--property", "DGMRL"]) == 0
    sin = '{"kind": "sinusoid", "omega": 3.141592653589793, "kappa": 0.8, "phi": 1.2}'
    assert run(["check-property", "--dist", sin, "--property", "DMRL"]) == 2
    capsys.readouterr()


def test_check_order(capsys):
    code, doc = _run_json(["check-order", "--dist", EXP2, "--dist2", EXP1, "--order", "hr"], capsys)
    assert code == 0 and doc["result"]["hr"]["holds"]
    assert run(["check-order", "--dist", EXP1, "--dist2", EXP2, "--order", "hr"]) == 2
    capsys.readouterr()


def test_out_file_and_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["experiment", "--name", "scale", "--dist", EXP1]
    assert run(argv + ["--out", str(a)]) == 0
    assert run(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert not [p for p in tmp_path.iterdir() if p.name not in ("a.json", "b.json")]


def test_config_round_trip(tmp_path):
    out = tmp_path / "first.json"
    assert run(["experiment", "--name", "closure", "--dist", EXP2, "--dist2", EXP1,
                "--p", "0.5", "--out", str(out)]) == 0
    cfg = json.loads(out.read_text())["config"]
    again = tmp_path / "second.json"
    assert run(argv_from_config(cfg) + ["--out", str(again)]) == 0
    assert out.read_bytes() == again.read_bytes()


def test_profile_csv(capsys):
    assert run(["profile", "--dist", UNIFORM, "--grid-points", "10", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "r,mrl,gmrl,hazard,gfr" and len(lines) == 11


def test_counterexample_writes_artifacts(tmp_path):
    # exit 3: r*_F is outside the reference tolerance (see case b)
    assert run(["counterexample", "--out", str(tmp_path)]) == 3
    doc = json.loads((tmp_path / "counterexample.json").read_text())
    assert doc["exit_code"] == 3
    failed = [c["case_id"] for c in doc["result"]["cases"] if c["status"] == "fail"]
    assert failed == ["counterexample/b-r-star-F"]
    assert (tmp_path / "counterexample_curves.csv").exists()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mrleq", "poa", "--n", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["poa"] == 1.5
