"""
Series codec — canonical JSON form of HSeries for the cache and reports.

    {"vars": [...], "hmin": int, "hmax": int,
     "window": {var: [lo, hi]},
     "terms": [[hpow, [e1, ..., ek], "p/q"], ...],
     "support": {var: [lo|null, hi|null]}}

Terms are sorted, coefficients are rational strings, and the canonical
text uses sorted keys with compact separators so equal series hash equally.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from typing import Any

from src.errors import ConfigError
from src.series.hseries import HSeries
from src.series.window import INF, Window


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _bound_out(x: float) -> int | None:
    return None if x in (INF, -INF) else int(x)


def _bound_in(x: int | None, default: float) -> float:
    return default if x is None else int(x)


def series_to_json(s: HSeries) -> dict[str, Any]:
    data = {
        "vars": list(s.vars),
        "hmin": s.window.hmin,
        "hmax": s.window.hmax,
        "window": {v: [lo, hi] for v, lo, hi in s.window.bounds},
        "terms": [[h, list(e), str(c)] for (h, e), c in sorted(s.terms.items())],
    }
    support = {}
    for v, (lo, hi) in s.support.items():
        if lo > hi:
            support[v] = [1, 0]
        elif (lo, hi) != (-INF, INF):
            support[v] = [_bound_out(lo), _bound_out(hi)]
    if support:
        data["support"] = support
    return data


def series_from_json(data: dict[str, Any]) -> HSeries:
    try:
        variables = [str(v) for v in data["vars"]]
        window = Window(
            tuple((v, int(data["window"][v][0]), int(data["window"][v][1])) for v in variables),
            int(data["hmin"]),
            int(data["hmax"]),
        )
        terms = {}
        for hpow, exps, coef in data["terms"]:
            terms[(int(hpow), tuple(int(e) for e in exps))] = Fraction(coef)
        support = {}
        for v, (lo, hi) in data.get("support", {}).items():
            support[v] = (INF, -INF) if (lo, hi) == (1, 0) else (
                _bound_in(lo, -INF), _bound_in(hi, INF),
            )
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"malformed series JSON: {e}") from e
    return HSeries(variables, terms, window, support)


def dumps(s: HSeries) -> str:
    return canonical_json(series_to_json(s))


def loads(text: str) -> HSeries:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid series JSON at line {e.lineno}: {e.msg}") from e
    return series_from_json(data)


def digest(s: HSeries) -> str:
    return sha256_hex(dumps(s))
