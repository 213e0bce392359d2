"""Tests for run configuration loading and validation."""

from __future__ import annotations

import json
from fractions import Fraction

import pytest

from src.errors import ConfigError
from src.suites.config import ENVIRONMENT, RunConfig, load_config, parse_level


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for var in ENVIRONMENT.values():
        monkeypatch.delenv(var, raising=False)


def test_defaults():
    config = load_config()
    assert config == RunConfig()
    assert config.level == 1 and config.hbar_order == 3 and config.suites is None


@pytest.mark.parametrize("text, value", [("1", Fraction(1)), ("3/2", Fraction(3, 2)),
                                         (" -1/2 ", Fraction(-1, 2)), (2, Fraction(2))])
def test_parse_level(text, value):
    assert parse_level(text) == value


@pytest.mark.parametrize("text", ["abc", "1/0", "1.2.3", None, True])
def test_parse_level_rejects(text):
    with pytest.raises(ConfigError, match="level"):
        parse_level(text)


@pytest.mark.parametrize("field, value", [
    ("hbar_order", 0), ("depth", -1), ("window", 0), ("seed", -3), ("workers", 0),
    ("report", "html"), ("suites", "catalog"), ("hbar_order", "3"),
])
def test_invalid_fields_are_named(field, value):
    with pytest.raises(ConfigError, match=field):
        RunConfig(**{field: value})


def test_precedence_env_file_flags(tmp_path, monkeypatch):
    monkeypatch.setenv("DYV_GCM", "A2")
    monkeypatch.setenv("DYV_HBAR_ORDER", "4")
    monkeypatch.setenv("DYV_WINDOW", "7")
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"hbar_order": 2, "level": "1/2", "suites": ["catalog"]}))

    config = load_config(path, level="3", seed=None)
    assert config.gcm == "A2"                # environment
    assert config.window == 7                # environment
    assert config.hbar_order == 2            # file beats environment
    assert config.level == 3                 # flag beats file
    assert config.suites == ("catalog",)
    assert config.seed == 0                  # None overrides are ignored


def test_environment_integer_must_parse(monkeypatch):
    monkeypatch.setenv("DYV_DEPTH", "deep")
    with pytest.raises(ConfigError, match="DYV_DEPTH"):
        load_config()


def test_file_syntax_error_names_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "gcm": "A1",\n  "level": \n}')
    with pytest.raises(ConfigError, match="line 4"):
        load_config(path)


def test_file_unknown_field(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"gcm": "A1", "colour": "blue"}))
    with pytest.raises(ConfigError, match="colour"):
        load_config(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="config file"):
        load_config(tmp_path / "nowhere.json")


def test_echo_excludes_operational_fields():
    a = RunConfig(workers=1, cache=False, out="x.json").echo()
    b = RunConfig(workers=8, cache_dir="/tmp/elsewhere").echo()
    assert a == b
    assert a["level"] == "1" and a["suites"] is None
