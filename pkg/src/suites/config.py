"""
Config — the run configuration, assembled from defaults, environment, a JSON file and flags.

Precedence, highest first: explicit overrides (CLI flags), the --config
JSON file, DYV_* environment variables (a .env file is honored), defaults.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from pathlib import Path
from typing import Any

from dotenv import load_dotenv

from src.errors import ConfigError

load_dotenv()

logger = logging.getLogger(__name__)

REPORT_FORMATS = ("json", "md")

# field -> environment variable
ENVIRONMENT = {
    "gcm": "DYV_GCM",
    "level": "DYV_LEVEL",
    "hbar_order": "DYV_HBAR_ORDER",
    "window": "DYV_WINDOW",
    "depth": "DYV_DEPTH",
    "seed": "DYV_SEED",
    "cache_dir": "DYV_CACHE_DIR",
    "workers": "DYV_WORKERS",
}

INT_FIELDS = ("hbar_order", "window", "depth", "seed", "workers")


def parse_level(text: Any) -> Fraction:
    """A rational level from "p/q", an integer or a Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool) or not isinstance(text, (int, str)):
        raise ConfigError(f"level: expected a rational string 'p/q', got {text!r}")
    try:
        value = Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"level: {text!r} is not a rational 'p/q' ({exc})") from exc
    return value


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on; equal configs give identical report bodies."""

    gcm: str = "A1"
    level: Fraction = Fraction(1)
    hbar_order: int = 3
    window: int = 5
    depth: int = 3
    suites: tuple[str, ...] | None = None
    seed: int = 0
    report: str = "json"
    out: str | None = None
    cache: bool = True
    cache_dir: str = ".dyv-cache"
    workers: int = 4

    def __post_init__(self) -> None:
        object.__setattr__(self, "level", parse_level(self.level))
        for name in INT_FIELDS:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{name}: expected an integer, got {value!r}")
        if self.hbar_order < 1:
            raise ConfigError(f"hbar_order: N must be at least 1, got {self.hbar_order}")
        if self.depth < 0:
            raise ConfigError(f"depth: D must be nonnegative, got {self.depth}")
        if self.window < 1:
            raise ConfigError(f"window: half-width must be at least 1, got {self.window}")
        if self.seed < 0:
            raise ConfigError(f"seed: must be a nonnegative integer, got {self.seed}")
        if self.workers < 1:
            raise ConfigError(f"workers: must be at least 1, got {self.workers}")
        if self.report not in REPORT_FORMATS:
            raise ConfigError(f"report: expected one of {REPORT_FORMATS}, got {self.report!r}")
        if self.suites is not None:
            if isinstance(self.suites, str) or not all(isinstance(s, str) for s in self.suites):
                raise ConfigError(f"suites: expected a list of suite names, got {self.suites!r}")
            object.__setattr__(self, "suites", tuple(self.suites))

    def echo(self) -> dict[str, Any]:
        """The fields that determine report bodies, as plain JSON values."""
        return {
            "gcm": self.gcm,
            "level": str(self.level),
            "hbar_order": self.hbar_order,
            "window": self.window,
            "depth": self.depth,
            "suites": None if self.suites is None else list(self.suites),
            "seed": self.seed,
        }

    def to_json(self) -> dict[str, Any]:
        data = asdict(self)
        data["level"] = str(self.level)
        data["suites"] = None if self.suites is None else list(self.suites)
        return data


_FIELDS = {f.name for f in fields(RunConfig)}


def _coerce(name: str, value: Any, source: str) -> Any:
    if name in INT_FIELDS and isinstance(value, str):
        try:
            return int(value)
        except ValueError as exc:
            raise ConfigError(f"{name}: {source} value {value!r} is not an integer") from exc
    if name == "cache" and isinstance(value, str):
        return value.strip().lower() not in ("0", "false", "no", "off")
    if name == "suites" and isinstance(value, str):
        return tuple(s.strip() for s in value.split(",") if s.strip())
    return value


def from_environment() -> dict[str, Any]:
    """DYV_* variables that are set, by field."""
    out = {}
    for name, var in ENVIRONMENT.items():
        value = os.getenv(var)
        if value:
            out[name] = _coerce(name, value, var)
    return out


def from_file(path: str | Path) -> dict[str, Any]:
    """Fields from a JSON config file; errors name the line or the field."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"config file {path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path}, line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path}: expected a JSON object")
    unknown = sorted(set(data) - _FIELDS)
    if unknown:
        raise ConfigError(f"config file {path}: unknown field(s) {', '.join(unknown)}")
    return {name: _coerce(name, value, str(path)) for name, value in data.items()}


def load_config(path: str | Path | None = None, **overrides: Any) -> RunConfig:
    """Merge defaults, environment, the JSON file and non-None overrides."""
    merged: dict[str, Any] = {}
    merged.update(from_environment())
    if path is not None:
        merged.update(from_file(path))
    merged.update({k: _coerce(k, v, "flag") for k, v in overrides.items() if v is not None})
    unknown = sorted(set(merged) - _FIELDS)
    if unknown:
        raise ConfigError(f"unknown configuration field(s) {', '.join(unknown)}")
    config = RunConfig(**merged)
    logger.debug("config: %s", config.to_json())
    return config

