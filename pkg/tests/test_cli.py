import csv
import io
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from heisenflow.cli import main
from heisenflow.checks import Check
from heisenflow.runner import HEADER, RunReport, emit_report, run_scenario
from heisenflow.scenario import parse_scenario

SCENARIOS = Path(__file__).parent.parent / "scenarios"


@pytest.fixture
def runner():
    return CliRunner()


def _write(tmp_path, name, doc):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(doc))
    return path


def test_single_scenario_passes(runner):
    res = runner.invoke(main, ["--scenario", str(SCENARIOS / "game-stage1-qubit.json")])
    assert res.exit_code == 0
    assert "result: PASS (6 checks, 0 failed)" in res.output
    assert res.output.rstrip().endswith("summary: 1 scenarios, 6 checks, 0 failed")


def test_whole_suite_passes(runner):
    res = runner.invoke(main, ["--suite", str(SCENARIOS), "--format", "csv"])
    assert res.exit_code == 0, res.output
    rows = list(csv.reader(io.StringIO(res.output)))
    assert tuple(rows[0]) == HEADER
    assert all(r[4] == "true" for r in rows[1:])
    names = [r[0].split("/")[0] for r in rows[1:]]
    assert names == sorted(names)


def test_golden_stage2_rows(runner):
    res = runner.invoke(main, ["--scenario", str(SCENARIOS / "game-stage2-thirds.json"), "--format", "csv"])
    rows = {r[0]: r for r in csv.reader(io.StringIO(res.output))}
    assert rows["game-stage2-thirds/value-vs-weighted-mean"] == [
        "game-stage2-thirds/value-vs-weighted-mean", "0.666666666667", "0.666666666667", "0", "true"]
    assert rows["game-stage2-thirds/value-vs-oracle"][1:3] == ["0.666666666667", "0.666666666667"]
    assert [name.split("/")[1] for name in list(rows)[1:6]] == [
        "coarse-unitarity", "control-unchanged", "record-matches-control",
        "branches-equal-weight", "register-acts-fix-system"]


def test_failed_check_exits_one(runner):
    res = runner.invoke(main, ["--scenario", str(SCENARIOS / "game-stage3-irrational.json"),
                               "--tolerance", "1e-30", "--format", "csv"])
    assert res.exit_code == 1
    assert any(r[4] == "false" for r in csv.reader(io.StringIO(res.output)) if r[0] != "check")


@pytest.mark.parametrize("args", [
    [],
    ["--scenario", "missing.json"],
    ["--suite", "no-such-dir"],
    ["--scenario", str(SCENARIOS / "algebra-n4.json"), "--tolerance", "0"],
])
def test_input_errors_exit_two(runner, args):
    res = runner.invoke(main, args)
    assert res.exit_code == 2
    assert "error:" in res.output


def test_invalid_scenario_exits_two(runner, tmp_path):
    path = _write(tmp_path, "bad", {"kind": "game-value", "stage": "2", "spectrum": [0, 1],
                                    "multiplicities": [1, 2], "M": 5})
    res = runner.invoke(main, ["--scenario", str(path)])
    assert res.exit_code == 2
    assert "bad.json: multiplicity sum mismatch" in res.output


def test_duplicate_names_rejected(runner, tmp_path):
    for stem in ("a", "b"):
        _write(tmp_path, stem, {"name": "same", "kind": "algebra-check", "n": 2})
    res = runner.invoke(main, ["--suite", str(tmp_path)])
    assert res.exit_code == 2
    assert "duplicate scenario names: same" in res.output


def test_empty_suite(runner, tmp_path):
    res = runner.invoke(main, ["--suite", str(tmp_path)])
    assert res.exit_code == 2


def test_empty_report_renders():
    assert emit_report([], "csv") == ",".join(HEADER) + "\n"
    assert emit_report([], "text") == "summary: 0 scenarios, 0 checks, 0 failed\n"


def test_single_passing_check_is_one_row():
    report = RunReport("one", "game-value", (Check.compare("value", 0.5, 0.5, 1e-9),), ())
    rows = list(csv.reader(io.StringIO(emit_report(report, "csv"))))
    assert rows == [list(HEADER), ["one/value", "0.5", "0.5", "0", "true"]]


def test_minimal_game_document_runs():
    s = parse_scenario(json.dumps({"kind": "game-value", "stage": "3", "spectrum": [0, 1],
                                   "weights": [0.5, 0.5]}))
    report = run_scenario(s)
    assert report.passed
    assert report.checks[-1].value == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("name", ["game-stage3-irrational", "game-stage4-1-unsharp", "measure-perfect-n3"])
def test_csv_reparses_to_same_checks(name):
    s = parse_scenario((SCENARIOS / f"{name}.json").read_text())
    report = run_scenario(s)
    rows = list(csv.DictReader(io.StringIO(emit_report(report, "csv"))))
    assert [r["check"] for r in rows] == [f"{s.name}/{c.name}" for c in report.checks]
    assert len({r["check"] for r in rows}) == len(rows)
    assert [r["pass"] == "true" for r in rows] == [c.passed for c in report.checks]
    for r, c in zip(rows, report.checks):
        for key, expected in (("value", c.value), ("oracle", c.oracle), ("deviation", c.deviation)):
            if expected is None:
                assert r[key] == ""
            else:
                assert float(r[key]) == pytest.approx(expected, rel=1e-11, abs=1e-300)


def test_report_is_byte_identical_across_runs(runner, tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"run{i}.csv"
        res = runner.invoke(main, ["--suite", str(SCENARIOS), "--seed", "7", "--format", "csv", "--out", str(out)])
        assert res.exit_code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_timing_line_only_on_request(runner):
    path = str(SCENARIOS / "game-stage1-qubit.json")
    assert "elapsed:" not in runner.invoke(main, ["--scenario", path]).output
    assert "elapsed:" in runner.invoke(main, ["--scenario", path, "--timing"]).output
