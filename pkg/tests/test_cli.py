import csv
import io
import json

import numpy as np
from pytest import approx, mark

from hopf_lab.classifier import TRANSCRITICAL
from hopf_lab.config import parse_config
from hopf_lab.main import main, run_command
from hopf_lab.report import SWEEP_HEADER, _float, dumps


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_analyze_degenerate_case(capsys):
    code, out = run(capsys, "analyze", "--system", "example21-case3", "--window", "-1", "1")
    assert code == 0
    report = json.loads(out)
    (point,) = report["points"]
    assert point["classification"]["tag"] == TRANSCRITICAL
    assert point["coefficients"]["h11"] == approx(-3.0, abs=1e-8)
    assert point["coefficients"]["h22_formula"] == approx(2.0, abs=1e-8)
    assert point["tangent"]["eta"] == approx(np.sqrt(1.5))
    assert set(point["conditions"]) == {"F1", "F2", "F3", "F4", "F5", "F6", "F7"}
    assert point["tolerances"]["tau_trans"] == 1e-3


def test_analyze_without_candidate_exits_4(capsys):
    code, out = run(capsys, "analyze", "--system", "example21-case1", "--window", "0.2", "0.9")
    assert code == 4
    assert out == ""


def test_unknown_system_exits_2(capsys):
    code, _ = run(capsys, "analyze", "--system", "example99")
    assert code == 2


def test_bad_config_file_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"command": "analyze", "system": "example21-case1", "window": [1]}')
    code, _ = run(capsys, "analyze", "--config", str(path))
    assert code == 2
    code, _ = run(capsys, "analyze", "--config", str(tmp_path / "missing.json"))
    assert code == 2


def test_config_file_and_output(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"command": "analyze", "system": "example21-case2"}))
    target = tmp_path / "report.json"
    code, out = run(capsys, "analyze", "--config", str(config), "--output", str(target))
    assert code == 0
    assert out == ""
    (point,) = json.loads(target.read_text())["points"]
    assert point["classification"]["tag"] == "DegenerateNoBifurcation"


def test_reports_are_deterministic(capsys):
    first = run(capsys, "analyze", "--system", "forced-tangency", "--seed", "3")
    second = run(capsys, "analyze", "--system", "forced-tangency", "--seed", "3")
    assert first[0] == 0
    assert first == second
    (point,) = json.loads(first[1])["points"]
    assert point["kind"] == "tangency"
    assert run(capsys, "analyze", "--system", "forced-tangency", "--seed", "4")[1] != first[1]


def test_malformed_polynomial_exits_2(tmp_path, capsys):
    path = tmp_path / "poly.json"
    path.write_text('{\n  "command": "analyze",\n  "polynomial": {\n    "dim": 2,\n'
                    '    "terms": [{"exponents": [1, 0], "coefficients": [1]}]\n  }\n}')
    code = main(["analyze", "--config", str(path)])
    captured = capsys.readouterr()
    assert code == 2
    assert captured.out == ""
    assert "line 5: polynomial term 0" in captured.err


def test_predprey_report(capsys):
    ell = 2 * np.sqrt(119) / 7
    code, out = run(capsys, "predprey", "--d1", "1", "--d2", "3", "--k", "17", "--theta", "4",
                    "--n", "1", "--ell", repr(float(ell)))
    assert code == 0
    report = json.loads(out)
    assert report["analysis"]["coefficients"]["h11"] == approx(0.14597, abs=1e-3)
    assert [p["lam"] for p in report["geometry"]["hopf_points"]] == [approx(1.0), approx(3.5), approx(8.0)]
    assert report["conditions"]["olddd"] is True
    assert report["geometry"]["lambda_star"] == approx(2.0)


def test_predprey_needs_parameters(capsys):
    code, _ = run(capsys, "predprey", "--n", "1")
    assert code == 2


def test_sweep_without_bifurcation(capsys, monkeypatch):
    monkeypatch.setenv("HOPF_LAB_THREADS", "1")
    code, out = run(capsys, "sweep", "--system", "example21-case2", "--grid", "-0.3", "0.3", "7")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert tuple(rows[0]) == SWEEP_HEADER
    assert len(rows) == 8
    assert {row[-1] for row in rows[1:]} == {"no-cycle"}
    assert all(row[1] == "" for row in rows[1:])


def test_sweep_needs_grid():
    config = parse_config(json.dumps({"command": "sweep", "system": "example21-case3"}))
    assert run_command(config) == (2, None)


@mark.slow
def test_cycle_report(capsys):
    code, out = run(capsys, "cycle", "--system", "example21-case3", "--lam", "0.2")
    assert code == 0
    report = json.loads(out)
    assert report["floquet"]["mu2"] == approx(-0.08, rel=0.15)
    assert report["amplitude_r"] == approx(0.2 / np.sqrt(1.5), rel=0.05)
    assert len(report["samples"]) == len(report["phase_grid"]) == 256
    assert report["direction"] == "backward"


def test_floats_keep_seventeen_digits():
    assert _float(0.1) == "0.10000000000000001"
    assert float(_float(2 / 3)) == 2 / 3
    assert dumps({"x": 1 / 3, "z": 1 + 2j, "missing": None}) == (
        '{\n  "x": 0.33333333333333331,\n  "z": {\n    "re": 1,\n    "im": 2\n  },\n  "missing": null\n}\n')
