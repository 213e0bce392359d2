"""
Operator series — constant-coefficient differential operators in ∂_v.

An OperatorSeries is Σ_k ħ^k P_k(∂_v), known for ħ-offsets k < K. The
named operators are the F, G, L, q-power and q-bracket series of the
exponential current calculus:

    G(x) = (q^x - q^{-x}) / x          q = e^ħ
    F(x) = 1 / G(x)                    carries ħ^{-1}
    L(x) = (e^x - 1) / x
    [m]_{q^x} = (q^{mx} - q^{-mx}) / (q^x - q^{-x})
"""

from __future__ import annotations

from collections.abc import Mapping
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Any

from src.errors import ConfigError, WindowError
from src.series.hseries import HSeries, Key, Scalar, to_scalar
from src.series.window import falling_factorial, window_after

Table = dict[int, dict[int, Fraction]]

OPERATOR_NAMES = ("F", "G", "Gm", "L", "qpow", "qbracket", "identity")


@lru_cache(maxsize=None)
def inverse_sinhc(n: int) -> Fraction:
    """Coefficient of y^{2n} in y / sinh(y)."""
    if n == 0:
        return Fraction(1)
    return -sum(
        (inverse_sinhc(n - j) / factorial(2 * j + 1) for j in range(1, n + 1)),
        Fraction(0),
    )


class OperatorSeries:
    """Σ_k ħ^k Σ_d c_{k,d} ∂_var^d, exact for ħ-offsets below `order`."""

    __slots__ = ("var", "table", "order", "kmin")

    def __init__(self, var: str, table: Mapping[int, Mapping[int, Scalar]], order: int,
                 kmin: int = 0) -> None:
        self.var = var
        self.order = order
        self.kmin = kmin
        clean: Table = {}
        for k, poly in table.items():
            if k < kmin:
                raise WindowError(f"ħ-offset {k} below declared minimum {kmin}")
            if k >= order:
                continue
            row = {d: to_scalar(c) for d, c in poly.items() if to_scalar(c)}
            if any(d < 0 for d in row):
                raise WindowError("∂-degrees must be nonnegative")
            if row:
                clean[k] = row
        self.table = clean

    # ── Algebra ──────────────────────────────────────────────

    def _check(self, other: OperatorSeries) -> None:
        if self.var != other.var:
            raise WindowError(f"operators act on different variables {self.var} / {other.var}")

    def __add__(self, other: OperatorSeries) -> OperatorSeries:
        self._check(other)
        table: Table = {k: dict(row) for k, row in self.table.items()}
        for k, row in other.table.items():
            target = table.setdefault(k, {})
            for d, c in row.items():
                target[d] = target.get(d, Fraction(0)) + c
        return OperatorSeries(
            self.var, table, min(self.order, other.order), min(self.kmin, other.kmin),
        )

    def __neg__(self) -> OperatorSeries:
        return self.scale(-1)

    def __sub__(self, other: OperatorSeries) -> OperatorSeries:
        return self + (-other)

    def scale(self, c: Scalar, hpow: int = 0) -> OperatorSeries:
        """Multiply by c·ħ^hpow."""
        c = to_scalar(c)
        table = {k + hpow: {d: c * x for d, x in row.items()} for k, row in self.table.items()}
        return OperatorSeries(self.var, table, self.order + hpow, self.kmin + hpow)

    def compose(self, other: OperatorSeries) -> OperatorSeries:
        self._check(other)
        order = min(self.order + other.kmin, other.order + self.kmin)
        table: Table = {}
        for ka, ra in self.table.items():
            for kb, rb in other.table.items():
                k = ka + kb
                if k >= order:
                    continue
                target = table.setdefault(k, {})
                for da, ca in ra.items():
                    for db, cb in rb.items():
                        target[da + db] = target.get(da + db, Fraction(0)) + ca * cb
        return OperatorSeries(self.var, table, order, self.kmin + other.kmin)

    __matmul__ = compose

    def difference_witness(self, other: OperatorSeries, order: int | None = None
                           ) -> tuple[int, int] | None:
        """First (ħ-offset, ∂-degree) where the two operators differ below `order`."""
        self._check(other)
        bound = min(self.order, other.order) if order is None else order
        keys = sorted(
            {(k, d) for k, row in self.table.items() for d in row}
            | {(k, d) for k, row in other.table.items() for d in row}
        )
        for k, d in keys:
            if k >= bound:
                continue
            a = self.table.get(k, {}).get(d, Fraction(0))
            b = other.table.get(k, {}).get(d, Fraction(0))
            if a != b:
                return k, d
        return None

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, OperatorSeries):
            return NotImplemented
        return self.var == other.var and self.difference_witness(other) is None

    __hash__ = None  # type: ignore[assignment]

    @property
    def orders(self) -> list[int]:
        return sorted({d for row in self.table.values() for d in row})

    def __repr__(self) -> str:
        parts = [
            f"{c}·ħ^{k}∂^{d}" for k, row in sorted(self.table.items())
            for d, c in sorted(row.items())
        ]
        return f"OperatorSeries[{self.var}]({' + '.join(parts[:6]) or '0'} mod ħ^{self.order})"

    # ── Application ──────────────────────────────────────────

    def apply(self, a: HSeries, var: str | None = None) -> HSeries:
        """Apply to `a` in variable `var` (defaults to the operator's own)."""
        var = var or self.var
        if var not in a.vars:
            raise WindowError(f"op_apply: {var!r} not among {a.vars}")
        i = a.vars.index(var)
        orders = self.orders or [0]
        window = window_after("op_apply", [a.window], [a.support], var=var, orders=orders)
        n_out = min(a.window.hmax + self.kmin, self.order + a.window.hmin)
        window = window.with_hbar(a.window.hmin + self.kmin, n_out)
        window.require_nonempty("op_apply")

        terms: dict[Key, Fraction] = {}
        for (h, e), c in a.terms.items():
            for k, row in self.table.items():
                if h + k >= n_out:
                    continue
                for d, x in row.items():
                    f = falling_factorial(e[i], d)
                    if f:
                        key = (h + k, e[:i] + (e[i] - d,) + e[i + 1:])
                        terms[key] = terms.get(key, Fraction(0)) + c * x * f
        support = dict(a.support)
        lo, hi = support[var]
        if lo <= hi:
            support[var] = (lo - orders[-1], hi - orders[0])
        return HSeries(a.vars, terms, window, support)


# ── Named operators ──────────────────────────────────────────


def identity(order: int, var: str = "x") -> OperatorSeries:
    return OperatorSeries(var, {0: {0: 1}}, order)


def _g_table(m: Fraction, order: int) -> Table:
    table: Table = {}
    n = 0
    while 2 * n + 1 < order:
        c = 2 * m ** (2 * n + 1) / factorial(2 * n + 1)
        if c:
            table[2 * n + 1] = {2 * n: c}
        n += 1
    return table


def op_make(name: str, order: int, var: str = "x", **params: Any) -> OperatorSeries:
    """
    Build a named operator series exact below ħ^order.

    Args:
        name: F, G, Gm (param m), L (param c, meaning L(c·ħ·∂)),
              qpow (param c, meaning e^{cħ∂}), qbracket (param m), identity
        order: ħ truncation order of the operator table
        var: derivation variable

    Returns:
        the OperatorSeries
    """
    if name == "identity":
        return identity(order, var)

    if name == "G":
        return OperatorSeries(var, _g_table(Fraction(1), order), order, kmin=1)

    if name == "Gm":
        m = to_scalar(params["m"])
        return OperatorSeries(var, _g_table(m, order), order, kmin=1)

    if name == "F":
        table: Table = {}
        n = 0
        while 2 * n - 1 < order:
            table[2 * n - 1] = {2 * n: inverse_sinhc(n) / 2}
            n += 1
        return OperatorSeries(var, table, order, kmin=-1)

    if name == "L":
        c = to_scalar(params.get("c", 1))
        # L(cħ∂) = Σ_{n≥1} (cħ∂)^{n-1} / n!
        table = {n - 1: {n - 1: c ** (n - 1) / factorial(n)} for n in range(1, order + 1)}
        return OperatorSeries(var, table, order)

    if name == "qpow":
        c = to_scalar(params.get("c", 1))
        table = {k: {k: c ** k / factorial(k)} for k in range(order)}
        return OperatorSeries(var, table, order)

    if name == "qbracket":
        m = to_scalar(params["m"])
        if m.denominator == 1:
            total = OperatorSeries(var, {}, order)
            size = abs(m.numerator)
            for j in range(size):
                total = total + op_make("qpow", order, var, c=size - 1 - 2 * j)
            return total if m >= 0 else -total
        # F has ħ-offset -1, so G_m is needed one order further
        return op_make("F", order, var).compose(op_make("Gm", order + 1, var, m=m))

    raise ConfigError(f"unknown operator {name!r}; expected one of {', '.join(OPERATOR_NAMES)}")


def op_apply(op: OperatorSeries, a: HSeries, var: str | None = None) -> HSeries:
    return op.apply(a, var)


def compose(a: OperatorSeries, b: OperatorSeries) -> OperatorSeries:
    return a.compose(b)
