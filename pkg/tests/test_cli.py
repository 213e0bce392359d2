"""End-to-end tests for the dy-verify command line."""

from __future__ import annotations

import json

import pytest
from typer.testing import CliRunner

from cli import app
from src.suites.config import ENVIRONMENT

runner = CliRunner()

SMALL = ["--hbar-order", "2", "--window", "3", "--depth", "1", "--workers", "2"]


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    for var in ENVIRONMENT.values():
        monkeypatch.delenv(var, raising=False)
    monkeypatch.setenv("DYV_CACHE_DIR", str(tmp_path / "cache"))


def _run(*args: str):
    return runner.invoke(app, ["run", *args])


def test_suites_listing():
    result = runner.invoke(app, ["suites"])
    assert result.exit_code == 0
    for name in ("catalog", "fock", "presentation", "negative-controls"):
        assert name in result.output


def test_list_suites_flag():
    result = _run("--list-suites")
    assert result.exit_code == 0
    assert "serre" in result.output


def test_empty_suite_list_passes(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"suites": []}))
    out = tmp_path / "report.json"
    result = _run("--config", str(config), "--out", str(out))
    assert result.exit_code == 0
    report = json.loads(out.read_text())
    assert report["entries"] == []
    assert report["config"]["suites"] == []


@pytest.mark.parametrize("args", [
    ["--level", "one"],
    ["--hbar-order", "0"],
    ["--suite", "nonsense"],
    ["--report", "html"],
    ["--gcm", "A9"],
])
def test_configuration_errors_exit_2(args):
    result = _run(*args)
    assert result.exit_code == 2
    assert "Error" in result.output


def test_catalog_suite_passes_and_is_deterministic(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert _run("--suite", "catalog", *SMALL, "--out", str(first)).exit_code == 0
    # second run is served from the cache; a third bypasses it
    assert _run("--suite", "catalog", *SMALL, "--out", str(second)).exit_code == 0
    third = tmp_path / "c.json"
    assert _run("--suite", "catalog", *SMALL, "--no-cache", "--out", str(third)).exit_code == 0

    bodies = []
    for path in (first, second, third):
        data = json.loads(path.read_text())
        for entry in data["entries"]:
            entry.pop("runtime_ms")
        bodies.append(data)
    assert bodies[0] == bodies[1] == bodies[2]
    assert all(e["status"] == "pass" for e in bodies[0]["entries"])
    assert {e["anchor"] for e in bodies[0]["entries"]} >= {"log-two-terms", "sing-res-fact"}


def test_markdown_report(tmp_path):
    out = tmp_path / "report.md"
    result = _run("--suite", "heisenberg", *SMALL, "--report", "md", "--out", str(out))
    assert result.exit_code == 0
    text = out.read_text()
    assert text.startswith("# dy-verify")
    assert "| heisenberg |" in text


def test_negative_controls_fail_with_witnesses(tmp_path):
    out = tmp_path / "report.json"
    result = _run("--suite", "negative-controls", "--hbar-order", "2", "--window", "3", "--depth", "2",
                  "--out", str(out))
    assert result.exit_code == 1
    entries = json.loads(out.read_text())["entries"]
    assert entries
    assert all(e["status"] == "fail" and e["witness"] for e in entries)
    assert {e["check"] for e in entries} == {
        "control.perturbed_gamma", "control.perturbed_zero_mode", "control.perturbed_serre",
    }


def test_catalog_command():
    result = runner.invoke(app, ["catalog", "log_two_terms", "--param", "m=2"])
    assert result.exit_code == 0
    assert "pass" in result.output


def test_catalog_command_bad_param():
    result = runner.invoke(app, ["catalog", "log_two_terms", "--param", "m"])
    assert result.exit_code == 2


def test_catalog_command_unknown_entry():
    result = runner.invoke(app, ["catalog", "no_such_identity"])
    assert result.exit_code == 2


def test_gcm_command_on_file(tmp_path):
    path = tmp_path / "a2.json"
    path.write_text(json.dumps({"labels": ["1", "2"], "matrix": [[2, -1], [-1, 2]]}))
    result = runner.invoke(app, ["gcm", str(path)])
    assert result.exit_code == 0
    assert "finite type" in result.output and "not of finite type" not in result.output


def test_gcm_command_rejects_asymmetric(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"matrix": [[2, -1], [0, 2]]}))
    assert runner.invoke(app, ["gcm", str(path)]).exit_code == 2
