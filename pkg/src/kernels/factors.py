"""
Kernel factors — symbolic rational kernels built from linear factors.

A LinearFactor is (left - right + c·ħ)^e, or (left + c·ħ)^e for a single
variable. An IotaKernel is scale·ħ^p·Π factors; each negative pair factor
carries the name of its "large" variable, which fixes the ι-expansion
direction. Two negative factors on the same base whose directions disagree
merge into a factor with no direction: such a kernel can still be
multiplied and compared symbolically but refuses to expand.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any

import sympy

from src.errors import KernelError
from src.series.hseries import Scalar, to_scalar

HBAR = sympy.Symbol("hbar")

Base = tuple[str, str | None, Fraction]


@dataclass(frozen=True)
class LinearFactor:
    """(left - right + shift·ħ)^exp, or (left + shift·ħ)^exp when right is None."""

    left: str
    right: str | None
    shift: Fraction
    exp: int
    large: str | None = None

    def __post_init__(self) -> None:
        if self.exp == 0:
            raise KernelError("linear factor with exponent 0")
        if self.left == self.right:
            raise KernelError(f"degenerate factor ({self.left} - {self.right})")
        object.__setattr__(self, "shift", to_scalar(self.shift))
        if self.large is not None and self.large not in (self.left, self.right):
            raise KernelError(f"direction {self.large!r} is not a variable of {self.describe()}")

    @property
    def base(self) -> Base:
        return self.left, self.right, self.shift

    @property
    def variables(self) -> tuple[str, ...]:
        return (self.left,) if self.right is None else (self.left, self.right)

    @property
    def is_pair(self) -> bool:
        return self.right is not None

    @property
    def small(self) -> str | None:
        if self.large is None or self.right is None:
            return None
        return self.right if self.large == self.left else self.left

    def sort_key(self) -> tuple[str, str, Fraction]:
        return self.left, self.right or "", self.shift

    def to_sympy(self, symbols: Mapping[str, sympy.Symbol]) -> sympy.Expr:
        expr = symbols[self.left] + sympy.Rational(self.shift.numerator, self.shift.denominator) * HBAR
        if self.right is not None:
            expr -= symbols[self.right]
        return expr ** self.exp

    def describe(self) -> str:
        inner = self.left if self.right is None else f"{self.left}-{self.right}"
        if self.shift:
            inner += f"{'+' if self.shift > 0 else '-'}{abs(self.shift)}ħ"
        text = f"({inner})"
        if self.exp != 1:
            text += f"^{self.exp}"
        if self.exp < 0 and self.large and self.right is not None:
            text += f"[{self.large}]"
        return text


def pair(left: str, right: str, shift: Scalar = 0, exp: int = 1,
         large: str | None = None) -> LinearFactor:
    """(left - right + shift·ħ)^exp; negative factors default to left large."""
    if exp < 0 and large is None:
        large = left
    return LinearFactor(left, right, to_scalar(shift), exp, large if exp < 0 else None)


def single(var: str, shift: Scalar = 0, exp: int = 1) -> LinearFactor:
    return LinearFactor(var, None, to_scalar(shift), exp)


def _merge_direction(parts: Sequence[LinearFactor], total: int) -> str | None:
    if total >= 0:
        return None
    directions = {f.large for f in parts if f.exp < 0}
    if len(directions) == 1:
        return directions.pop()
    return None


@dataclass(frozen=True)
class IotaKernel:
    """scale · ħ^hpow · Π factors, in canonical form."""

    scale: Fraction
    hpow: int = 0
    factors: tuple[LinearFactor, ...] = field(default=())

    @classmethod
    def make(cls, scale: Scalar = 1, hpow: int = 0,
             factors: Iterable[LinearFactor] = ()) -> IotaKernel:
        """Canonicalize: order pair variables, merge equal bases, fold constants."""
        scale = to_scalar(scale)
        grouped: dict[Base, list[LinearFactor]] = {}
        for f in factors:
            if f.right is not None and f.left > f.right:
                if f.exp % 2:
                    scale = -scale
                f = LinearFactor(f.right, f.left, -f.shift, f.exp, f.large)
            grouped.setdefault(f.base, []).append(f)
        merged: list[LinearFactor] = []
        for (left, right, shift), parts in grouped.items():
            total = sum(f.exp for f in parts)
            if total == 0:
                continue
            large = _merge_direction(parts, total) if right is not None else None
            merged.append(LinearFactor(left, right, shift, total, large))
        merged.sort(key=LinearFactor.sort_key)
        if scale == 0:
            return cls(Fraction(0), 0, ())
        return cls(scale, hpow, tuple(merged))

    @classmethod
    def one(cls) -> IotaKernel:
        return cls(Fraction(1))

    @classmethod
    def constant(cls, value: Scalar, hpow: int = 0) -> IotaKernel:
        return cls.make(value, hpow)

    # ── Queries ──────────────────────────────────────────────

    @property
    def variables(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for f in self.factors:
            for v in f.variables:
                seen[v] = None
        return tuple(seen)

    @property
    def is_zero(self) -> bool:
        return self.scale == 0

    @property
    def shape(self) -> tuple[int, tuple[LinearFactor, ...]]:
        return self.hpow, self.factors

    @property
    def poles(self) -> tuple[LinearFactor, ...]:
        return tuple(f for f in self.factors if f.exp < 0)

    @property
    def directed(self) -> bool:
        """Every negative pair factor has an expansion direction."""
        return all(f.large is not None for f in self.poles if f.is_pair)

    def depends_on(self, var: str) -> bool:
        return any(var in f.variables for f in self.factors)

    # ── Algebra ──────────────────────────────────────────────

    def __mul__(self, other: IotaKernel | Scalar) -> IotaKernel:
        if not isinstance(other, IotaKernel):
            return IotaKernel.make(self.scale * to_scalar(other), self.hpow, self.factors)
        return IotaKernel.make(
            self.scale * other.scale, self.hpow + other.hpow, self.factors + other.factors,
        )

    __rmul__ = __mul__

    def __neg__(self) -> IotaKernel:
        return self * -1

    def inverse(self, order: Sequence[str] | None = None) -> IotaKernel:
        """1/k; new poles take their direction from `order` when given."""
        if self.scale == 0:
            raise KernelError("inverse of the zero kernel")
        flipped = []
        for f in self.factors:
            large = None
            if f.is_pair and f.exp > 0 and order is not None:
                large = min(f.variables, key=order.index)
            flipped.append(LinearFactor(f.left, f.right, f.shift, -f.exp, large))
        return IotaKernel.make(1 / self.scale, -self.hpow, flipped)

    def with_direction(self, order: Sequence[str]) -> IotaKernel:
        """Assign every negative pair factor the variable earliest in `order` as large."""
        factors = [
            replace(f, large=min(f.variables, key=order.index)) if f.is_pair and f.exp < 0 else f
            for f in self.factors
        ]
        return IotaKernel(self.scale, self.hpow, tuple(factors))

    def substitute(self, var: str, target: str | None, shift: Scalar = 0) -> IotaKernel:
        """
        Replace var by target + shift·ħ (target None means the constant shift·ħ).

        A factor that becomes ħ-only folds into scale and hpow; a pole hit
        exactly raises KernelError.
        """
        shift = to_scalar(shift)
        scale, hpow = self.scale, self.hpow
        out: list[LinearFactor] = []
        for f in self.factors:
            if var not in f.variables:
                out.append(f)
                continue
            if f.right is None:
                if target is None:
                    c = f.shift + shift
                    scale, hpow = _fold_constant(scale, hpow, c, f.exp, f)
                else:
                    out.append(LinearFactor(target, None, f.shift + shift, f.exp))
                continue
            if f.left == var:
                left, right, c = target, f.right, f.shift + shift
            else:
                left, right, c = f.left, target, f.shift - shift
            large = f.large
            if large == var:
                large = target
            if left is None:
                # (-right + cħ)^e = (-1)^e (right - cħ)^e
                if f.exp % 2:
                    scale = -scale
                out.append(LinearFactor(right, None, -c, f.exp))
            elif right is None:
                out.append(LinearFactor(left, None, c, f.exp))
            elif left == right:
                scale, hpow = _fold_constant(scale, hpow, c, f.exp, f)
            else:
                out.append(LinearFactor(left, right, c, f.exp, large if f.exp < 0 else None))
        return IotaKernel.make(scale, hpow, out)

    def shift(self, var: str, c: Scalar) -> IotaKernel:
        return self.substitute(var, var, c)

    def rename(self, mapping: Mapping[str, str]) -> IotaKernel:
        factors = [
            LinearFactor(
                mapping.get(f.left, f.left),
                None if f.right is None else mapping.get(f.right, f.right),
                f.shift, f.exp,
                None if f.large is None else mapping.get(f.large, f.large),
            )
            for f in self.factors
        ]
        return IotaKernel.make(self.scale, self.hpow, factors)

    # ── Rendering ────────────────────────────────────────────

    def to_sympy(self, symbols: Mapping[str, sympy.Symbol] | None = None) -> sympy.Expr:
        symbols = dict(symbols or {})
        for v in self.variables:
            symbols.setdefault(v, sympy.Symbol(v))
        expr = sympy.Rational(self.scale.numerator, self.scale.denominator) * HBAR ** self.hpow
        for f in self.factors:
            expr *= f.to_sympy(symbols)
        return expr

    def describe(self) -> str:
        head = str(self.scale)
        if self.hpow:
            head += f"·ħ^{self.hpow}"
        return "·".join([head, *(f.describe() for f in self.factors)])

    def to_json(self) -> dict[str, Any]:
        return {
            "scale": str(self.scale),
            "hpow": self.hpow,
            "factors": [
                [f.left, f.right, str(f.shift), f.exp, f.large] for f in self.factors
            ],
        }


def _fold_constant(scale: Fraction, hpow: int, c: Fraction, exp: int,
                   f: LinearFactor) -> tuple[Fraction, int]:
    if c == 0:
        if exp < 0:
            raise KernelError(f"substitution hits the pole of {f.describe()}")
        return Fraction(0), 0
    return scale * c ** exp, hpow + exp


class KernelSum:
    """Finite linear combination of IotaKernels, merged by shape."""

    __slots__ = ("_terms",)

    def __init__(self, kernels: Iterable[IotaKernel] = ()) -> None:
        terms: dict[tuple[int, tuple[LinearFactor, ...]], Fraction] = {}
        for k in kernels:
            if k.is_zero:
                continue
            terms[k.shape] = terms.get(k.shape, Fraction(0)) + k.scale
        self._terms = {s: c for s, c in terms.items() if c}

    @classmethod
    def of(cls, *kernels: IotaKernel) -> KernelSum:
        return cls(kernels)

    @property
    def kernels(self) -> list[IotaKernel]:
        return [
            IotaKernel(c, hpow, factors)
            for (hpow, factors), c in sorted(
                self._terms.items(), key=lambda item: (item[0][0], [f.sort_key() for f in item[0][1]])
            )
        ]

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def variables(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for k in self.kernels:
            for v in k.variables:
                seen[v] = None
        return tuple(seen)

    def depends_on(self, var: str) -> bool:
        return any(k.depends_on(var) for k in self.kernels)

    def __add__(self, other: KernelSum | IotaKernel) -> KernelSum:
        other = as_sum(other)
        return KernelSum(self.kernels + other.kernels)

    def __neg__(self) -> KernelSum:
        return KernelSum(-k for k in self.kernels)

    def __sub__(self, other: KernelSum | IotaKernel) -> KernelSum:
        return self + (-as_sum(other))

    def __mul__(self, other: KernelSum | IotaKernel | Scalar) -> KernelSum:
        if isinstance(other, (int, Fraction, str)):
            return KernelSum(k * to_scalar(other) for k in self.kernels)
        other = as_sum(other)
        return KernelSum(a * b for a in self.kernels for b in other.kernels)

    __rmul__ = __mul__

    def map(self, fn) -> KernelSum:
        return KernelSum(fn(k) for k in self.kernels)

    def substitute(self, var: str, target: str | None, shift: Scalar = 0) -> KernelSum:
        return self.map(lambda k: k.substitute(var, target, shift))

    def rename(self, mapping: Mapping[str, str]) -> KernelSum:
        return self.map(lambda k: k.rename(mapping))

    def with_direction(self, order: Sequence[str]) -> KernelSum:
        return self.map(lambda k: k.with_direction(order))

    def to_sympy(self, symbols: Mapping[str, sympy.Symbol] | None = None) -> sympy.Expr:
        return sympy.Add(*(k.to_sympy(symbols) for k in self.kernels))

    def __eq__(self, other: Any) -> bool:
        if isinstance(other, IotaKernel):
            other = as_sum(other)
        if not isinstance(other, KernelSum):
            return NotImplemented
        return self._terms == other._terms

    __hash__ = None  # type: ignore[assignment]

    def describe(self) -> str:
        return " + ".join(k.describe() for k in self.kernels) or "0"

    def __repr__(self) -> str:
        return f"KernelSum({self.describe()})"

    def to_json(self) -> list[dict[str, Any]]:
        return [k.to_json() for k in self.kernels]


def as_sum(value: KernelSum | IotaKernel | Scalar) -> KernelSum:
    if isinstance(value, KernelSum):
        return value
    if isinstance(value, IotaKernel):
        return KernelSum.of(value)
    return KernelSum.of(IotaKernel.constant(value))
