"""
Space — graded modules realized on sympy polynomial rings, truncated mod ħ^N.

A vector is a PolyElement over QQ in ħ and the creation generators of the
module. Generator monomials (ħ-exponent zero) form the basis; the weight of
a monomial is the sum of its generator weights. Every result is cut back
to ħ-order below N, so all arithmetic stays exact on the truncation.
"""

from __future__ import annotations

import logging
import re
from collections.abc import Iterator, Sequence
from fractions import Fraction

import sympy
from sympy import QQ
from sympy.polys.rings import PolyElement, ring

from src.errors import ConfigError, OutOfWindowError
from src.series.hseries import Scalar, to_scalar

logger = logging.getLogger(__name__)

Vector = PolyElement
Monom = tuple[int, ...]


def qq(value: Scalar) -> QQ:
    c = to_scalar(value)
    return QQ(c.numerator, c.denominator)


def to_fraction(value) -> Fraction:
    """A QQ (or sympy Rational) coefficient as a Fraction."""
    return Fraction(int(value.numerator), int(value.denominator))


def _symbol(text: str) -> str:
    return re.sub(r"\W", "_", text)


class GradedSpace:
    """Polynomial module on named generators of positive weight, cut at ħ^N."""

    def __init__(self, name: str, generators: Sequence[tuple[str, int]], N: int, depth: int) -> None:
        if N < 1:
            raise ConfigError(f"{name}: ħ-order N must be at least 1, got {N}")
        if depth < 0:
            raise ConfigError(f"{name}: depth must be nonnegative, got {depth}")
        self.name = name
        self.N = N
        self.depth = depth
        names = ["hbar", *(_symbol(g) for g, _ in generators)]
        self.ring, self.hbar, *gens = ring(names, QQ)
        self.gens: tuple[Vector, ...] = tuple(gens)
        self.weights: tuple[int, ...] = (0, *(w for _, w in generators))
        self.zero: Vector = self.ring.zero
        self.vacuum: Vector = self.ring.one

    # ── Scalars and vectors ──────────────────────────────────

    def scalar(self, c: Scalar, hpow: int = 0) -> Vector:
        """c·ħ^hpow as a ring element."""
        if hpow < 0:
            raise OutOfWindowError(f"{self.name}: negative ħ-power {hpow} is not representable")
        monom = (hpow,) + (0,) * len(self.gens)
        return self.ring.term_new(monom, qq(c))

    def hterm(self, c: QQ, hpow: int) -> Vector:
        """A ring coefficient c times ħ^hpow."""
        return self.ring.term_new((hpow,) + (0,) * len(self.gens), c)

    def vector(self, monom: Monom) -> Vector:
        return self.ring.term_new(monom, QQ(1))

    def truncate(self, v: Vector) -> Vector:
        if all(m[0] < self.N for m in v.keys()):
            return v
        return self.ring.from_dict({m: c for m, c in v.items() if m[0] < self.N})

    def split(self, v: Vector) -> Iterator[tuple[int, Monom, QQ]]:
        """(ħ-power, basis monomial, coefficient) for every term of v."""
        for m, c in v.items():
            yield m[0], (0,) + m[1:], c

    def weight(self, monom: Monom) -> int:
        return sum(w * e for w, e in zip(self.weights, monom))

    def max_weight(self, v: Vector) -> int:
        return max((self.weight(m) for m in v.keys()), default=0)

    def hbar_order(self, v: Vector) -> int | None:
        return min((m[0] for m in v.keys()), default=None)

    def divide_hbar(self, v: Vector, k: int) -> Vector:
        """v / ħ^k; raises when a term carries fewer than k powers of ħ."""
        if k <= 0:
            return v * self.scalar(1, -k) if k else v
        out = {}
        for m, c in v.items():
            if m[0] < k:
                raise OutOfWindowError(f"{self.name}: {self.describe(v)} is not divisible by ħ^{k}")
            out[(m[0] - k,) + m[1:]] = c
        return self.ring.from_dict(out)

    def describe(self, v: Vector) -> str:
        return str(v.as_expr()) if v else "0"

    # ── Basis ────────────────────────────────────────────────

    def monomials(self, max_weight: int | None = None) -> list[Monom]:
        """Basis monomials of weight ≤ max_weight (default: the depth), by weight."""
        bound = self.depth if max_weight is None else max_weight
        size = len(self.weights)
        out: list[Monom] = []

        def grow(i: int, left: int, exps: list[int]) -> None:
            if i == size:
                out.append(tuple(exps))
                return
            w = self.weights[i]
            for e in range(left // w + 1):
                exps[i] = e
                grow(i + 1, left - e * w, exps)
            exps[i] = 0

        grow(1, bound, [0] * size)
        out.sort(key=lambda m: (self.weight(m), tuple(-e for e in m)))
        return out

    def basis(self, max_weight: int | None = None) -> list[Vector]:
        return [self.vector(m) for m in self.monomials(max_weight)]

    def graded_dimensions(self, max_weight: int | None = None) -> list[int]:
        bound = self.depth if max_weight is None else max_weight
        dims = [0] * (bound + 1)
        for m in self.monomials(bound):
            dims[self.weight(m)] += 1
        return dims


def colored_partition_counts(colors: int, max_weight: int) -> list[int]:
    """Coefficients of Π_{n≥1} (1 - q^n)^{-colors} up to q^max_weight."""
    q = sympy.Symbol("q")
    product = sympy.prod([(1 - q ** n) ** (-colors) for n in range(1, max_weight + 1)])
    poly = sympy.series(product, q, 0, max_weight + 1).removeO()
    return [int(poly.coeff(q, d)) for d in range(max_weight + 1)]


class FockSpace(GradedSpace):
    """
    Symmetric algebra on x_{i,n} (i a GCM label, 1 ≤ n ≤ max_mode), weight n.

    The basis is cut at total weight `depth`; generators up to `max_mode`
    exist so that creation operators applied to basis vectors stay exact.
    """

    def __init__(self, labels: Sequence[str], N: int, depth: int, max_mode: int | None = None) -> None:
        self.labels = tuple(labels)
        self.max_mode = max_mode if max_mode is not None else depth + 2 * N + 12
        generators = [(f"x_{label}_{n}", n) for label in self.labels for n in range(1, self.max_mode + 1)]
        super().__init__(f"Fock[{','.join(self.labels)}]", generators, N, depth)
        logger.debug("%s: %d generators, N=%d, depth=%d", self.name, len(self.gens), N, depth)

    def index(self, i: int, n: int) -> int:
        """Position of x_{i,n} in a monomial tuple."""
        if not 1 <= n <= self.max_mode:
            raise OutOfWindowError(
                f"{self.name}: mode {n} outside the generator range 1..{self.max_mode}"
            )
        return 1 + i * self.max_mode + (n - 1)

    def gen(self, i: int, n: int) -> Vector:
        return self.gens[self.index(i, n) - 1]

    def top_mode(self, monom: Monom) -> int:
        """Largest n with some x_{i,n} present; 0 for the vacuum."""
        top = 0
        for pos in range(1, len(monom)):
            if monom[pos]:
                top = max(top, (pos - 1) % self.max_mode + 1)
        return top
