"""
Window — exactness regions of truncated series.

A Window fixes, per variable, the degree interval on which a series is
known exactly, together with the ħ-order interval [hmin, hmax). The lower
ħ bound doubles as a floor: the underlying series has no term of lower
ħ-order. window_after implements the margin algebra every series
operation uses to decide where its output is still exact.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from math import comb
from typing import Any

from src.errors import WindowError

INF = float("inf")

Interval = tuple[int, int]
Bound = tuple[float, float]


def generalized_binomial(n: int, k: int) -> int:
    """C(n, k) for any integer n and k ≥ 0."""
    if k < 0:
        return 0
    if n >= 0:
        return comb(n, k)
    # C(-m, k) = (-1)^k C(m + k - 1, k)
    return (-1) ** k * comb(-n + k - 1, k)


def falling_factorial(n: int, k: int) -> int:
    result = 1
    for j in range(k):
        result *= n - j
    return result


@dataclass(frozen=True)
class Window:
    """Per-variable degree intervals plus the ħ-order interval [hmin, hmax)."""

    bounds: tuple[tuple[str, int, int], ...]
    hmin: int = 0
    hmax: int = 1

    # ── Constructors ─────────────────────────────────────────

    @classmethod
    def of(cls, intervals: Mapping[str, Interval], hmax: int, hmin: int = 0) -> Window:
        return cls(tuple((v, lo, hi) for v, (lo, hi) in intervals.items()), hmin, hmax)

    @classmethod
    def symmetric(
        cls, variables: Sequence[str], half_width: int, hmax: int, hmin: int = 0,
    ) -> Window:
        return cls(tuple((v, -half_width, half_width) for v in variables), hmin, hmax)

    # ── Queries ──────────────────────────────────────────────

    @property
    def vars(self) -> tuple[str, ...]:
        return tuple(v for v, _, _ in self.bounds)

    def interval(self, var: str) -> Interval:
        for v, lo, hi in self.bounds:
            if v == var:
                return lo, hi
        raise WindowError(f"variable {var!r} not in window {self.vars}")

    @property
    def is_empty(self) -> bool:
        return self.hmin >= self.hmax or any(lo > hi for _, lo, hi in self.bounds)

    def require_nonempty(self, what: str = "operation") -> Window:
        if self.is_empty:
            raise WindowError(f"{what}: derived window is empty ({self.describe()})")
        return self

    def contains(self, hpow: int, exps: Sequence[int]) -> bool:
        if not self.hmin <= hpow < self.hmax:
            return False
        return all(lo <= e <= hi for e, (_, lo, hi) in zip(exps, self.bounds))

    def describe(self) -> str:
        parts = [f"{v}∈[{lo},{hi}]" for v, lo, hi in self.bounds]
        parts.append(f"ħ∈[{self.hmin},{self.hmax})")
        return ", ".join(parts)

    # ── Derived windows ──────────────────────────────────────

    def with_interval(self, var: str, lo: int, hi: int) -> Window:
        self.interval(var)
        return Window(
            tuple((v, lo, hi) if v == var else (v, a, b) for v, a, b in self.bounds),
            self.hmin, self.hmax,
        )

    def with_hbar(self, hmin: int, hmax: int) -> Window:
        return Window(self.bounds, hmin, hmax)

    def drop(self, var: str) -> Window:
        self.interval(var)
        return Window(tuple(b for b in self.bounds if b[0] != var), self.hmin, self.hmax)

    def add_var(self, var: str, lo: int, hi: int) -> Window:
        if var in self.vars:
            raise WindowError(f"variable {var!r} already in window")
        return Window(self.bounds + ((var, lo, hi),), self.hmin, self.hmax)

    def reorder(self, variables: Sequence[str]) -> Window:
        if sorted(variables) != sorted(self.vars):
            raise WindowError(f"cannot reorder {self.vars} as {tuple(variables)}")
        return Window(tuple((v, *self.interval(v)) for v in variables), self.hmin, self.hmax)

    def widen(self, margin: int) -> Window:
        return Window(
            tuple((v, lo - margin, hi + margin) for v, lo, hi in self.bounds),
            self.hmin, self.hmax,
        )

    def intersect(self, other: Window) -> Window:
        if self.vars != other.vars:
            raise WindowError(f"mismatched variables {self.vars} vs {other.vars}")
        return Window(
            tuple(
                (v, max(lo, other.interval(v)[0]), min(hi, other.interval(v)[1]))
                for v, lo, hi in self.bounds
            ),
            min(self.hmin, other.hmin),
            min(self.hmax, other.hmax),
        )

    def to_json(self) -> dict[str, Any]:
        return {
            "window": {v: [lo, hi] for v, lo, hi in self.bounds},
            "hmin": self.hmin,
            "hmax": self.hmax,
        }


# ── Margin algebra ───────────────────────────────────────────


def _bound(support: Mapping[str, Bound] | None, var: str) -> Bound:
    if support is None or var not in support:
        return -INF, INF
    return support[var]


def longest_run(candidates: Iterable[int], ok: Callable[[int], bool]) -> Interval:
    """Longest contiguous run of candidates satisfying ok; (1, 0) when none."""
    best: Interval = (1, 0)
    start: int | None = None
    for d in candidates:
        if ok(d):
            if start is None:
                start = d
            if d - start > best[1] - best[0]:
                best = (start, d)
        else:
            start = None
    return best


def product_interval(wa: Interval, sa: Bound, wb: Interval, sb: Bound) -> Interval:
    """Degrees d at which Σ_{e+f=d} a_e b_f only reads exact coefficients."""

    def ok(d: int) -> bool:
        lo = max(sa[0], d - sb[1])
        hi = min(sa[1], d - sb[0])
        if lo > hi:
            return True
        return lo >= max(wa[0], d - wb[1]) and hi <= min(wa[1], d - wb[0])

    return longest_run(range(min(wa[0], wb[0]), max(wa[1], wb[1]) + 1), ok)


def reads_interval(
    window: Interval, support: Bound, candidates: Iterable[int],
    needed: Callable[[int], Iterable[int]],
) -> Interval:
    """Degrees whose output only reads input degrees inside the window or outside the support."""

    def ok(d: int) -> bool:
        for e in needed(d):
            if window[0] <= e <= window[1]:
                continue
            if e < support[0] or e > support[1]:
                continue
            return False
        return True

    return longest_run(candidates, ok)


def window_after(
    op: str,
    windows: Sequence[Window],
    supports: Sequence[Mapping[str, Bound] | None] | None = None,
    **params: Any,
) -> Window:
    """
    Largest window on which the output of `op` is exact.

    Args:
        op: one of add, mul, derive, shift, expand, residue, sing, reg,
            delta, substitute_equal, op_apply
        windows: input windows (one or two)
        supports: per input, per variable degree bounds of the true series
        params: op-specific parameters (var, order, v_from, v_to, orders)

    Returns:
        the derived Window, possibly empty
    """
    supports = list(supports or [None] * len(windows))
    w = windows[0]

    if op == "add":
        out = w
        for other in windows[1:]:
            out = out.intersect(other)
        return out

    if op == "mul":
        a, b = windows
        if a.vars != b.vars:
            raise WindowError(f"mul: mismatched variables {a.vars} vs {b.vars}")
        bounds = []
        for v in a.vars:
            lo, hi = product_interval(
                a.interval(v), _bound(supports[0], v), b.interval(v), _bound(supports[1], v),
            )
            bounds.append((v, lo, hi))
        return Window(
            tuple(bounds), a.hmin + b.hmin, min(a.hmax + b.hmin, b.hmax + a.hmin),
        )

    if op == "derive":
        var = params["var"]
        d = params.get("order", 1)
        lo, hi = w.interval(var)
        return w.with_interval(var, lo - d, hi - d)

    if op == "shift":
        var = params["var"]
        span = w.hmax - 1 - w.hmin
        lo, hi = w.interval(var)

        def needed(e: int) -> Iterable[int]:
            return (e + k for k in range(span + 1) if generalized_binomial(e + k, k) != 0)

        lo2, hi2 = reads_interval((lo, hi), _bound(supports[0], var), range(lo, hi + 1), needed)
        return w.with_interval(var, lo2, hi2)

    if op == "op_apply":
        var = params["var"]
        orders = sorted(set(params["orders"]))
        lo, hi = w.interval(var)
        dmax = orders[-1] if orders else 0

        def needed_op(e: int) -> Iterable[int]:
            return (e + d for d in orders if falling_factorial(e + d, d) != 0)

        lo2, hi2 = reads_interval(
            (lo, hi), _bound(supports[0], var), range(lo - dmax, hi + 1), needed_op,
        )
        return w.with_interval(var, lo2, hi2)

    if op == "residue":
        var = params["var"]
        lo, hi = w.interval(var)
        if not lo <= -1 <= hi:
            return w.with_interval(var, 1, 0)
        return w.drop(var)

    if op == "substitute_equal":
        v_from, v_to = params["v_from"], params["v_to"]
        lo, hi = product_interval(
            w.interval(v_from), _bound(supports[0], v_from),
            w.interval(v_to), _bound(supports[0], v_to),
        )
        return w.drop(v_from).with_interval(v_to, lo, hi)

    if op in ("expand", "sing", "reg", "delta"):
        return w

    raise WindowError(f"unknown op-descriptor {op!r}")
