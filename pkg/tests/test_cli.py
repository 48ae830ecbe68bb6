import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from socert.cli import run

ROOT = Path(__file__).resolve().parent.parent
SCHEMA = json.loads((ROOT / "schema" / "report.schema.json").read_text())


def _run(args, tmp_path, name="out.json"):
    out = tmp_path / name
    code = run(list(args) + ["--out", str(out)])
    report = json.loads(out.read_text()) if out.exists() else None
    if report is not None:
        jsonschema.validate(report, SCHEMA)
    return code, report, out


def fx(name):
    return str(ROOT / "fixtures" / name)


def test_certify_ex1_exit_zero(tmp_path):
    code, rep, _ = _run(
        ["certify", "--problem", fx("ex1.json"), "--point", "0,0", "--theorem", "local2", "--dirs", "256", "--seed", "7"],
        tmp_path,
    )
    assert code == 0
    assert rep["result"]["verdict"] == "CertifiedOnSamples"
    assert rep["config"]["seed"] == 7
    assert rep["config"]["certify"]["dirs"] == 256
    assert rep["config"]["deriv"]["max_steps"] == 80


def test_oracle_counterexample_exit_one(tmp_path):
    code, rep, _ = _run(["oracle", "--problem", fx("counterexample.json"), "--point", "0", "--kind", "weak"], tmp_path)
    assert code == 1
    assert rep["result"]["witness"] == [1.0]


def test_falsify_lvp_exit_one(tmp_path):
    code, rep, _ = _run(
        ["falsify", "--problem", fx("lvp.json"), "--point", "0,0", "--property", "strictly-2-pseudoconvex:objective:1"],
        tmp_path,
    )
    assert code == 1
    assert rep["result"]["witness"]["y"] == [0.0, 1.0]


def test_not_falsified_and_supported_exit_zero(tmp_path):
    code, _, _ = _run(["falsify", "--problem", fx("lvp.json"), "--point", "0,0", "--property", "2-pseudoconvex:objective:1"], tmp_path)
    assert code == 0
    code, _, _ = _run(["oracle", "--problem", fx("lvp.json"), "--point", "0,0", "--kind", "weak"], tmp_path)
    assert code == 0


def test_quasiinvex_uses_problem_eta(tmp_path):
    code, rep, _ = _run(
        ["falsify", "--problem", fx("counterexample.json"), "--point", "0", "--property", "quasiinvex:objective:1"], tmp_path
    )
    assert code == 0 and rep["result"]["status"] == "not_falsified"


def test_inconclusive_exit_two(tmp_path):
    prob = tmp_path / "osc.json"
    prob.write_text(json.dumps({"n": 1, "objectives": ["if x1 != 0 then x1^2*sin(1/x1) else 0"], "box": [[-1, 1]]}))
    code, rep, _ = _run(["certify", "--problem", str(prob), "--point", "0", "--theorem", "local2", "--dirs", "4"], tmp_path)
    assert code == 2
    assert rep["result"]["verdict"] == "Inconclusive"


def test_deriv_diagnostics(tmp_path):
    code, rep, _ = _run(
        ["deriv", "--problem", fx("ex1.json"), "--point", "0,0", "--function", "objective:1", "--direction", "-1,0"], tmp_path
    )
    assert code == 0
    res = rep["result"]
    assert res["gradient"] == [0.0, 1.0]
    assert res["hadamard"]["kind"] == "nolimit"
    assert res["gradient_stability"]["bounded"] is False
    assert abs(res["second_dp"]["value"]) <= 1e-3


def test_gap_demo_command(tmp_path):
    code, rep, _ = _run(["harness", "--demo", "santos-gap", "--problem", fx("counterexample.json"), "--point", "0"], tmp_path)
    assert code == 1
    assert rep["result"]["violation_count"] == 1


def test_harness_small(tmp_path):
    code, rep, _ = _run(["harness", "--n", "3", "--seed", "2"], tmp_path)
    assert code == 0
    assert rep["result"]["instances"] == 3


@pytest.mark.parametrize(
    "args",
    [
        [],
        ["bogus"],
        ["certify", "--point", "0,0", "--theorem", "local2"],
        ["certify", "--problem", "x.json", "--point", "0,0", "--theorem", "nope"],
        ["certify", "--problem", "x.json", "--point", "0,0", "--theorem", "local2", "--dirs", "many"],
        ["falsify", "--problem", "LVP", "--point", "0,0", "--property", "convex:objective:1"],
        ["certify", "--problem", "LVP", "--point", "0,0", "--theorem", "local2", "--threads", "0"],
    ],
)
def test_usage_errors(args, capsys):
    args = [fx("lvp.json") if a == "LVP" else a for a in args]
    assert run(args) == 64
    assert "usage error" in capsys.readouterr().err


def test_input_data_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"n": 1, "objectives": ["x1"], "box": [[-1, 1]], "colour": 1}))
    syntax = tmp_path / "syntax.json"
    syntax.write_text(json.dumps({"n": 1, "objectives": ["x1 +"], "box": [[-1, 1]]}))
    badbox = tmp_path / "badbox.json"
    badbox.write_text(json.dumps({"n": 1, "objectives": ["x1"], "box": [[1, -1]]}))
    cases = [
        ["certify", "--problem", str(tmp_path / "missing.json"), "--point", "0", "--theorem", "local2"],
        ["certify", "--problem", str(bad), "--point", "0", "--theorem", "local2"],
        ["certify", "--problem", str(unknown), "--point", "0", "--theorem", "local2"],
        ["certify", "--problem", str(syntax), "--point", "0", "--theorem", "local2"],
        ["certify", "--problem", str(badbox), "--point", "0", "--theorem", "local2"],
        ["certify", "--problem", fx("lvp.json"), "--point", "0", "--theorem", "local2"],
        ["certify", "--problem", fx("lvp.json"), "--point", "0,-1", "--theorem", "local2"],
        ["oracle", "--problem", fx("lvp.json"), "--point", "0,-1", "--kind", "weak"],
        ["falsify", "--problem", fx("lvp.json"), "--point", "0,0", "--property", "quasiconvex:objective:3"],
        ["falsify", "--problem", fx("lvp.json"), "--point", "0,0", "--property", "quasiinvex:objective:1"],
    ]
    for args in cases:
        assert run(args) == 65, args
        assert "input error" in capsys.readouterr().err


def test_bad_config_is_input_error(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"deriv": {"rho": 3.0}}))
    assert run(["certify", "--problem", fx("lvp.json"), "--point", "0,0", "--theorem", "local2", "--config", str(cfg)]) == 65
    cfg.write_text(json.dumps({"deriv": {"speed": 3.0}}))
    assert run(["certify", "--problem", fx("lvp.json"), "--point", "0,0", "--theorem", "local2", "--config", str(cfg)]) == 65


def test_config_file_overrides(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"certify": {"dirs": 12}, "tolerances": {"tau_strict": 1e-6}}))
    code, rep, _ = _run(
        ["certify", "--problem", fx("lvp.json"), "--point", "0,0", "--theorem", "kkt-weak", "--config", str(cfg)], tmp_path
    )
    assert code == 0
    assert rep["config"]["certify"]["dirs"] == 12
    assert rep["config"]["tolerances"]["tau_strict"] == 1e-6


def test_report_round_trips_through_its_config_snapshot(tmp_path):
    args = ["certify", "--problem", fx("ex1.json"), "--point", "0,0", "--theorem", "local2", "--seed", "3"]
    _, first, out = _run(args + ["--dirs", "40"], tmp_path, "first.json")
    _, again, _ = _run(args + ["--config", str(out)], tmp_path, "again.json")
    assert json.dumps(first["result"], sort_keys=True) == json.dumps(again["result"], sort_keys=True)


def test_reports_are_byte_identical(tmp_path):
    args = ["certify", "--problem", fx("lvp.json"), "--point", "0,0", "--theorem", "kkt-weak", "--seed", "5"]
    outs = []
    for i, threads in enumerate(("1", "1", "4")):
        _, _, out = _run(args + ["--threads", threads], tmp_path, f"r{i}.json")
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_stdout_and_console_script(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "socert.cli", "oracle", "--problem", fx("counterexample.json"), "--point", "0", "--kind", "weak"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 1
    rep = json.loads(proc.stdout)
    jsonschema.validate(rep, SCHEMA)
    assert rep["input_digest"].startswith("sha256:")


def test_negative_point_values(tmp_path):
    code, rep, _ = _run(["oracle", "--problem", fx("lvp.json"), "--point", "-1,0", "--kind", "weak"], tmp_path)
    assert code == 0
    assert rep["command"]["args"]["point"] == "-1,0"
