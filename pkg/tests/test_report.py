"""Tests for report entries, summaries and rendering."""

from __future__ import annotations

import json
from fractions import Fraction

import pytest

from src.errors import KernelError, RuleError, WindowError, check_result, guarded
from src.suites.registry import control_entry
from src.suites.report import VERSION, Report, make_entry, plain


def _entry(check: str, passed: bool, witness=None, ms: float = 1.0, **extra):
    return make_entry("catalog", "log-two-terms", {"m": "2"},
                      check_result(check, passed, "ok" if passed else "differs", witness, **extra), ms)


def test_plain_renders_fractions_and_tuples():
    assert plain({(0, 2): Fraction(1, 2), "xs": (1, 2), "s": {3, 1}}) == {
        "(0, 2)": "1/2", "xs": [1, 2], "s": [1, 3],
    }


def test_failing_entry_always_has_witness():
    entry = _entry("c", False)
    assert entry["status"] == "fail"
    assert entry["witness"] == {"message": "differs"}


def test_extra_result_fields_become_details():
    entry = _entry("c", True, energy=Fraction(3, 2))
    assert entry["details"] == {"energy": "3/2"}
    assert entry["params"] == {"m": "2"}


def test_unknown_status_rejected():
    with pytest.raises(ValueError, match="unknown status"):
        make_entry("s", "log-two-terms", {}, {"check": "c", "status": "maybe"}, 0.0)


def test_summary_and_exit_code():
    report = Report(VERSION, {"gcm": "A1"}, [_entry("a", True), _entry("b", False, {"key": [1]})])
    assert report.counts == {"pass": 1, "fail": 1, "precondition-failed": 0, "out-of-window": 0}
    assert not report.passed and report.exit_code == 1
    assert [e["check"] for e in report.failures()] == ["b"]
    assert Report(VERSION, {}, []).exit_code == 0


def test_body_ignores_runtimes():
    fast = Report(VERSION, {"gcm": "A1"}, [_entry("a", True, ms=1.0)])
    slow = Report(VERSION, {"gcm": "A1"}, [_entry("a", True, ms=250.0)])
    assert fast.body() == slow.body()
    assert fast.to_json() != slow.to_json()
    assert "runtime_ms" not in json.loads(fast.body())["entries"][0]


def test_markdown_lists_witnesses(tmp_path):
    report = Report(VERSION, {"gcm": "A1"}, [_entry("a", True), _entry("b", False, {"key": [1]})])
    text = report.render("md")
    assert text.startswith(f"# dy-verify {VERSION} report")
    assert "| catalog | b | log-two-terms | m=2 | fail |" in text
    assert '## Witnesses' in text and '{"key": [1]}' in text

    path = report.write(tmp_path / "out" / "report.json", "json")
    assert json.loads(path.read_text())["summary"]["fail"] == 1


@pytest.mark.parametrize("error", [KernelError("factor (w-z+2ħ)^-1 has no expansion direction"),
                                   RuleError("missing exchange rule")])
def test_guarded_fails_one_check_on_kernel_and_rule_errors(error):
    def run():
        raise error

    result = guarded("layer0.x+x+", run)
    assert result["status"] == "fail"
    assert result["witness"]["error"] == type(error).__name__
    entry = make_entry("presentation", "classical-layer", {}, result, 0.0)
    assert entry["witness"]["message"] == str(error)


def test_guarded_maps_window_errors_and_propagates_others():
    def out_of_window():
        raise WindowError("derived window is empty")

    def broken():
        raise ZeroDivisionError

    assert guarded("c", out_of_window)["status"] == "out-of-window"
    with pytest.raises(ZeroDivisionError):
        guarded("c", broken)


def test_control_entry_carries_the_first_caught_check():
    results = [check_result("a", True, "ok"),
               {"check": "b", "status": "precondition-failed", "message": "relation fails", "witness": None},
               check_result("c", False, "differs", {"degree": 2})]
    entry = control_entry("control.x", results)
    assert entry["status"] == "fail"
    assert entry["witness"]["caught_by"] == "b"
    assert entry["witness"]["caught"] == 2


def test_control_entry_passes_when_nothing_is_caught():
    entry = control_entry("control.x", check_result("a", True, "ok"))
    assert entry["status"] == "pass"
    assert "undetected" in entry["message"]
