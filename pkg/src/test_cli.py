import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from cli import cli
from config import SEED_ENV

SCHEMA = json.loads((Path(__file__).resolve().parents[1] / "schema" / "report.schema.json").read_text())


@pytest.fixture
def runner():
    return CliRunner()


def run_to_file(runner, tmp_path, *args, env=None, name="report.json"):
    out = tmp_path / name
    result = runner.invoke(cli, [*args, "--out", str(out)], env=env)
    report = json.loads(out.read_text()) if out.exists() else None
    return result, report


def assert_matches_schema(report):
    assert set(SCHEMA["required"]) <= set(report)
    section_keys = SCHEMA["properties"]["sections"]["items"]["required"]
    check_keys = SCHEMA["properties"]["sections"]["items"]["properties"]["checks"]["items"]["required"]
    for section in report["sections"]:
        assert set(section_keys) <= set(section)
        for check in section["checks"]:
            assert set(check_keys) <= set(check)


def test_lhv_check(runner, tmp_path):
    result, report = run_to_file(runner, tmp_path, "lhv-check")
    assert result.exit_code == 0
    assert_matches_schema(report)
    assert report["status"] == "pass"
    assert [s["name"] for s in report["sections"]] == ["lhv"]
    assert "wall_time" not in report["sections"][0]


def test_verify_correlations(runner, tmp_path):
    result, report = run_to_file(runner, tmp_path, "verify-correlations", "--rotations", "5")
    assert result.exit_code == 0
    assert_matches_schema(report)


def test_tight_tolerance_fails_the_rotation_rows(runner, tmp_path):
    result, report = run_to_file(runner, tmp_path, "verify-correlations", "--tol", "1e-15")
    assert result.exit_code == 1
    assert report["status"] == "fail"
    failed = [c["claim"] for c in report["sections"][0]["checks"] if not c["passed"]]
    assert any("over rotations" in claim for claim in failed)


def test_correlation_report_rows(runner, tmp_path):
    _, report = run_to_file(runner, tmp_path, "verify-correlations", "--rotations", "5")
    claims = {c["claim"]: c for c in report["sections"][0]["checks"]}
    assert claims["max |sum of the nine outcome probabilities - 1|"]["passed"]
    assert claims["max spread over rotations"]["tolerance"] == 1e-10


def test_simulate_single_round(runner, tmp_path):
    result, report = run_to_file(runner, tmp_path, "simulate", "--rounds", "1")
    assert result.exit_code == 0
    assert report["sections"][0]["parameters"]["rounds"] == 1


def test_simulate_reports_frequencies(runner, tmp_path):
    _, report = run_to_file(runner, tmp_path, "simulate", "--rounds", "2000", "--seed", "5")
    rows = {row["pair"]: row for row in report["sections"][0]["tables"]["frequencies"]}
    assert set(rows) == {"FF", "FG", "GF", "GG"}
    assert rows["FF"]["+1,+1"] == 0.0


def test_usage_errors_exit_with_two(runner):
    assert runner.invoke(cli, ["simulate", "--rounds", "0"]).exit_code == 2
    assert runner.invoke(cli, ["verify-distinguish", "--grid", "50"]).exit_code == 2
    assert runner.invoke(cli, ["lhv-check", "--format", "xml"]).exit_code == 2


def test_optimize_hardy(runner, tmp_path):
    result, report = run_to_file(runner, tmp_path, "optimize-hardy", "--starts", "4")
    assert result.exit_code == 0
    assert report["metadata"]["config"]["starts"] == 4
    notes = report["sections"][0]["notes"]
    assert any("one-dimensional feasible set" in note for note in notes)


def test_optimize_hardy_free_angles(runner, tmp_path):
    result, report = run_to_file(runner, tmp_path, "optimize-hardy", "--free-angles", "--starts", "16")
    assert result.exit_code == 0
    claims = [c["claim"] for c in report["sections"][0]["checks"]]
    assert "max P(G_A=1,G_B=1) over both angles" in claims
    assert "max P(G_A=1,G_B=1) with F and G fixed" not in claims


def test_text_format_with_timings(runner):
    result = runner.invoke(cli, ["lhv-check", "--format", "text", "--timings"])
    assert result.exit_code == 0
    assert "== lhv: PASS (" in result.output
    assert "overall: PASS" in result.output


def test_seed_from_the_environment(runner, tmp_path):
    result, report = run_to_file(runner, tmp_path, "lhv-check", env={SEED_ENV: "42"})
    assert result.exit_code == 0
    assert report["metadata"]["seed"] == 42


def test_unwritable_output_is_an_error(runner, tmp_path):
    result = runner.invoke(cli, ["lhv-check", "--out", str(tmp_path / "missing" / "report.json")])
    assert result.exit_code == 3


def test_same_seed_same_report(runner, tmp_path):
    args = ("simulate", "--rounds", "2000", "--seed", "5")
    _, first = run_to_file(runner, tmp_path, *args, name="a.json")
    _, second = run_to_file(runner, tmp_path, *args, name="b.json")
    assert first == second


@pytest.mark.slow
def test_report_all(runner, tmp_path):
    result, report = run_to_file(runner, tmp_path, "report-all")
    assert result.exit_code == 0
    assert_matches_schema(report)
    assert [s["name"] for s in report["sections"]] == ["correlations", "simulate", "decoherence", "distinguish", "hardy", "lhv"]
