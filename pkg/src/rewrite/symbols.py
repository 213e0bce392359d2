"""
Current symbols — letters, words and linear combinations of current words.

A term of a CurrentExpr is a word of letters S(v + sħ), a tuple of δ
constraints v = u + cħ that have already been imposed, and a coefficient.
Coefficients stay symbolic (KernelSum) as long as possible; additive
brackets produce windowed HSeries coefficients, and a product of the two
kinds is expanded on the series window.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Union

from src.errors import ConfigError, KernelError, OutOfWindowError, RuleError
from src.kernels.expand import expand
from src.kernels.factors import IotaKernel, KernelSum, as_sum
from src.series.hseries import HSeries, Scalar, to_scalar
from src.series.window import Window

CURRENT = "current"
ADDITIVE = "additive"
GROUPLIKE = "grouplike"
GROUPLIKE_INVERSE = "grouplike-inverse"

KINDS = (CURRENT, ADDITIVE, GROUPLIKE, GROUPLIKE_INVERSE)

Coefficient = Union[KernelSum, HSeries]


def _shift_text(shift: Fraction) -> str:
    if not shift:
        return ""
    return f"{'+' if shift > 0 else '-'}{abs(shift)}ħ"


@dataclass(frozen=True)
class CurrentSymbol:
    """A generating current; `partner` names the inverse of a grouplike symbol."""

    name: str
    kind: str = CURRENT
    rank: int = 0
    node: int | None = None
    partner: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"symbol {self.name}: kind {self.kind!r} not in {KINDS}")
        if self.kind == GROUPLIKE_INVERSE and not self.partner:
            raise ConfigError(f"symbol {self.name}: a grouplike inverse needs its partner")

    @property
    def grouplike(self) -> bool:
        return self.kind in (GROUPLIKE, GROUPLIKE_INVERSE)

    def to_json(self) -> dict:
        return {
            "name": self.name, "kind": self.kind, "rank": self.rank,
            "node": self.node, "partner": self.partner,
        }


@dataclass(frozen=True)
class Letter:
    """S(var + shift·ħ), optionally processed by a named operator series in var."""

    symbol: CurrentSymbol
    var: str
    shift: Fraction = Fraction(0)
    op: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "shift", to_scalar(self.shift))

    @property
    def name(self) -> str:
        return self.symbol.name

    def moved(self, var: str, target: str, shift: Fraction) -> Letter:
        if self.var != var:
            return self
        return replace(self, var=target, shift=self.shift + shift)

    def rename(self, mapping: Mapping[str, str]) -> Letter:
        return replace(self, var=mapping.get(self.var, self.var))

    def describe(self) -> str:
        text = f"{self.symbol.name}({self.var}{_shift_text(self.shift)})"
        return f"{self.op}·{text}" if self.op else text


@dataclass(frozen=True)
class Delta:
    """Imposed support elim = keep + shift·ħ; elim no longer occurs in the term."""

    elim: str
    keep: str
    shift: Fraction

    def describe(self) -> str:
        return f"δ({self.elim}={self.keep}{_shift_text(self.shift)})"


Word = tuple[Letter, ...]
TermKey = tuple[Word, tuple[Delta, ...]]


def describe_key(key: TermKey) -> str:
    word, deltas = key
    parts = [letter.describe() for letter in word] + [d.describe() for d in deltas]
    return " ".join(parts) or "1"


# ── Coefficients ─────────────────────────────────────────────


def as_coefficient(value: Coefficient | IotaKernel | Scalar) -> Coefficient:
    if isinstance(value, HSeries):
        return value
    return as_sum(value)


def coefficient_is_zero(c: Coefficient) -> bool:
    return c.is_zero() if isinstance(c, HSeries) else c.is_zero


def in_order(series: HSeries, variables: Sequence[str]) -> HSeries:
    """The same series with its variables listed in `variables` order."""
    wanted = tuple(v for v in variables if v in series.vars)
    if wanted == series.vars:
        return series
    window = Window(
        tuple((v, *series.window.interval(v)) for v in wanted),
        series.window.hmin, series.window.hmax,
    )
    return series.extend(window)


def _lifted(a: Coefficient, b: Coefficient) -> tuple[Coefficient, Coefficient]:
    if isinstance(a, KernelSum) and isinstance(b, KernelSum):
        return a, b
    if isinstance(a, KernelSum):
        return expand(a, b.window), b
    if isinstance(b, KernelSum):
        return a, expand(b, a.window)
    return a, in_order(b, a.vars)


def coefficient_add(a: Coefficient, b: Coefficient) -> Coefficient:
    a, b = _lifted(a, b)
    return a + b


def coefficient_mul(a: Coefficient, b: Coefficient) -> Coefficient:
    a, b = _lifted(a, b)
    return a * b


def coefficient_substitute(c: Coefficient, delta: Delta) -> Coefficient:
    """Evaluate the coefficient on the support of `delta`."""
    if isinstance(c, KernelSum):
        try:
            return c.substitute(delta.elim, delta.keep, delta.shift)
        except KernelError as exc:
            raise OutOfWindowError(f"{delta.describe()} meets a pole: {exc}") from exc
    if delta.elim not in c.vars:
        return c
    return c.shift(delta.elim, delta.shift).substitute_equal(delta.elim, delta.keep)


def coefficient_rename(c: Coefficient, mapping: Mapping[str, str]) -> Coefficient:
    return c.rename(mapping)


def describe_coefficient(c: Coefficient) -> str:
    return c.describe() if isinstance(c, KernelSum) else repr(c)


# ── δ constraints ────────────────────────────────────────────


def constrain(key: TermKey, coefficient: Coefficient, a: str, b: str, shift: Scalar,
              order: Sequence[str]) -> tuple[TermKey, Coefficient]:
    """
    Impose a = b + shift·ħ on a term.

    The variable declared later in `order` is eliminated everywhere: in
    letters, in the coefficient and in earlier constraints.
    """
    shift = to_scalar(shift)
    if a == b:
        raise RuleError(f"δ constraint on a single variable {a}")
    if order.index(a) > order.index(b):
        delta = Delta(a, b, shift)
    else:
        delta = Delta(b, a, -shift)
    word, deltas = key
    moved = tuple(letter.moved(delta.elim, delta.keep, delta.shift) for letter in word)
    kept = [
        Delta(d.elim, delta.keep, d.shift + delta.shift) if d.keep == delta.elim else d
        for d in deltas
    ]
    kept.append(delta)
    kept.sort(key=lambda d: order.index(d.elim))
    return (moved, tuple(kept)), coefficient_substitute(coefficient, delta)


# ── Expressions ──────────────────────────────────────────────


class CurrentExpr:
    """Linear combination of words over the declared variables."""

    __slots__ = ("variables", "_terms")

    def __init__(self, variables: Sequence[str],
                 terms: Iterable[tuple[TermKey, Coefficient]] = ()) -> None:
        self.variables: tuple[str, ...] = tuple(variables)
        merged: dict[TermKey, Coefficient] = {}
        for key, coef in terms:
            for letter in key[0]:
                if letter.var not in self.variables:
                    raise ConfigError(f"letter {letter.describe()} uses undeclared variable")
            coef = as_coefficient(coef)
            merged[key] = coefficient_add(merged[key], coef) if key in merged else coef
        self._terms = {k: c for k, c in merged.items() if not coefficient_is_zero(c)}

    @classmethod
    def zero(cls, variables: Sequence[str]) -> CurrentExpr:
        return cls(variables)

    @classmethod
    def word(cls, variables: Sequence[str], *letters: Letter,
             coefficient: Coefficient | IotaKernel | Scalar = 1) -> CurrentExpr:
        return cls(variables, [((tuple(letters), ()), as_coefficient(coefficient))])

    @classmethod
    def delta_word(cls, variables: Sequence[str], letters: Sequence[Letter],
                   support: tuple[str, str, Scalar],
                   coefficient: Coefficient | IotaKernel | Scalar = 1) -> CurrentExpr:
        """letters · coefficient · δ(a = b + cħ) for support (a, b, c)."""
        a, b, c = support
        key, coef = constrain((tuple(letters), ()), as_coefficient(coefficient), a, b, c,
                              tuple(variables))
        return cls(variables, [(key, coef)])

    @property
    def terms(self) -> dict[TermKey, Coefficient]:
        return dict(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    # ── Algebra ──────────────────────────────────────────────

    def _aligned(self, other: CurrentExpr) -> tuple[str, ...]:
        extra = tuple(v for v in other.variables if v not in self.variables)
        return self.variables + extra

    def __add__(self, other: CurrentExpr) -> CurrentExpr:
        variables = self._aligned(other)
        return CurrentExpr(variables, [*self._terms.items(), *other._terms.items()])

    def __neg__(self) -> CurrentExpr:
        return self.scale(-1)

    def __sub__(self, other: CurrentExpr) -> CurrentExpr:
        return self + (-other)

    def scale(self, c: Coefficient | IotaKernel | Scalar) -> CurrentExpr:
        c = as_coefficient(c)
        return CurrentExpr(
            self.variables, [(k, coefficient_mul(v, c)) for k, v in self._terms.items()],
        )

    def __mul__(self, other: CurrentExpr) -> CurrentExpr:
        """Concatenation of words; at most one factor of each product may carry δ constraints."""
        variables = self._aligned(other)
        out = []
        for (wa, da), ca in self._terms.items():
            for (wb, db), cb in other._terms.items():
                if da and db:
                    raise RuleError("product of two δ-constrained terms")
                out.append(((wa + wb, da + db), coefficient_mul(ca, cb)))
        return CurrentExpr(variables, out)

    def rename(self, mapping: Mapping[str, str]) -> CurrentExpr:
        """
        Rename variables simultaneously (a permutation of the declared ones).

        δ constraints are re-imposed in canonical form. A series coefficient
        whose constraint would change its eliminated variable is not
        re-expressible here and raises RuleError.
        """
        out: list[tuple[TermKey, Coefficient]] = []
        for (word, deltas), coef in self._terms.items():
            letters = tuple(letter.rename(mapping) for letter in word)
            value = coefficient_rename(coef, mapping)
            if isinstance(value, HSeries):
                renamed = tuple(
                    Delta(mapping.get(d.elim, d.elim), mapping.get(d.keep, d.keep), d.shift)
                    for d in deltas
                )
                if any(self.variables.index(d.elim) < self.variables.index(d.keep) for d in renamed):
                    raise RuleError("renaming flips the elimination order of a series coefficient")
                order = sorted(renamed, key=lambda d: self.variables.index(d.elim))
                out.append(((letters, tuple(order)), in_order(value, self.variables)))
                continue
            key: TermKey = (letters, ())
            for d in deltas:
                key, value = constrain(
                    key, value, mapping.get(d.elim, d.elim), mapping.get(d.keep, d.keep),
                    d.shift, self.variables,
                )
            out.append((key, value))
        return CurrentExpr(self.variables, out)

    # ── Rendering ────────────────────────────────────────────

    def sorted_terms(self) -> list[tuple[TermKey, Coefficient]]:
        return sorted(self._terms.items(), key=lambda item: describe_key(item[0]))

    def describe(self) -> str:
        parts = [f"[{describe_coefficient(c)}]·{describe_key(k)}" for k, c in self.sorted_terms()]
        return " + ".join(parts) or "0"

    def __repr__(self) -> str:
        return f"CurrentExpr({self.describe()})"
