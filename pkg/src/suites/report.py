"""
Report — run results as canonical JSON, with a markdown view derived from it.

The body (version, config echo, entries without runtimes) is a pure
function of the configuration; runtimes ride along in the full document.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from src.errors import PASS, STATUSES

logger = logging.getLogger(__name__)

VERSION = "0.1.0"

ENTRY_KEYS = ("suite", "check", "anchor", "params", "status", "message", "witness")


def plain(value: Any) -> Any:
    """A JSON-ready copy with Fractions and tuples rendered deterministically."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted(plain(v) for v in value)
    if isinstance(value, Fraction):
        return str(value)
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    return str(value)


def make_entry(suite: str, anchor: str, params: dict[str, str], result: dict[str, Any],
               runtime_ms: float) -> dict[str, Any]:
    """One report entry; a non-passing entry always carries a witness."""
    status = result.get("status")
    if status not in STATUSES:
        raise ValueError(f"check {result.get('check')!r} returned unknown status {status!r}")
    witness = result.get("witness")
    if status != PASS and witness is None:
        witness = {"message": result.get("message", "")}
    details = {k: v for k, v in result.items() if k not in (*ENTRY_KEYS, "anchor", "params")}
    entry = {
        "suite": suite,
        "check": result.get("check", ""),
        "anchor": anchor,
        "params": {**params, **plain(result.get("params", {}))},
        "status": status,
        "message": result.get("message", ""),
        "witness": plain(witness),
        "runtime_ms": round(runtime_ms, 3),
    }
    if details:
        entry["details"] = plain(details)
    return entry


@dataclass
class Report:
    version: str
    config: dict[str, Any]
    entries: list[dict[str, Any]] = field(default_factory=list)

    @property
    def counts(self) -> dict[str, int]:
        tally = Counter(e["status"] for e in self.entries)
        return {s: tally.get(s, 0) for s in STATUSES}

    @property
    def passed(self) -> bool:
        return all(e["status"] == PASS for e in self.entries)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def failures(self) -> list[dict[str, Any]]:
        return [e for e in self.entries if e["status"] != PASS]

    def to_dict(self, timings: bool = True) -> dict[str, Any]:
        entries = self.entries if timings else [
            {k: v for k, v in e.items() if k != "runtime_ms"} for e in self.entries
        ]
        return {
            "tool": "dy-verify",
            "version": self.version,
            "config": self.config,
            "summary": self.counts,
            "entries": entries,
        }

    def body(self) -> str:
        """Canonical JSON without runtimes: identical for identical configs."""
        return json.dumps(self.to_dict(timings=False), sort_keys=True, indent=2, ensure_ascii=False)

    def to_json(self, timings: bool = True) -> str:
        return json.dumps(self.to_dict(timings), sort_keys=True, indent=2, ensure_ascii=False)

    def to_markdown(self) -> str:
        data = self.to_dict()
        lines = [
            f"# dy-verify {data['version']} report",
            "",
            "| setting | value |",
            "|---|---|",
            *(f"| {k} | {v} |" for k, v in sorted(data["config"].items())),
            "",
            " · ".join(f"{status}: {n}" for status, n in data["summary"].items()),
            "",
            "| suite | check | anchor | params | status | ms |",
            "|---|---|---|---|---|---|",
        ]
        for e in data["entries"]:
            params = ", ".join(f"{k}={v}" for k, v in sorted(e["params"].items()))
            lines.append(f"| {e['suite']} | {e['check']} | {e['anchor']} | {params} | "
                         f"{e['status']} | {e['runtime_ms']} |")
        failing = [e for e in data["entries"] if e["status"] != PASS]
        if failing:
            lines += ["", "## Witnesses", ""]
            for e in failing:
                lines.append(f"- **{e['suite']} / {e['check']}** ({e['status']}): {e['message']}")
                lines.append(f"  `{json.dumps(e['witness'], sort_keys=True, ensure_ascii=False)}`")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_markdown() if fmt == "md" else self.to_json()

    def write(self, path: str | Path, fmt: str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render(fmt), encoding="utf-8")
        logger.info("report written to %s", path)
        return path
