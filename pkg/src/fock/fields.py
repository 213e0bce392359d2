"""
Fields — operators a(x) ∈ Hom(W, W_ħ((x))) on a graded space, with exactness bookkeeping.

A field is known through `coefficient(s, v)`, the coefficient of x^s in
a(x)v (the mode a_m is the coefficient of x^{-m-1}). Every field also
certifies `lower(v)`, a degree below which a(x)v vanishes, and a fixed
`top` above which it vanishes (None when unbounded). Regular fields may
also carry a `grade`: a bound g with every x^s coefficient divisible by
ħ^{g-s}, which lets exponentials stop degree by degree. Products, exponentials
and Y_E products consult these bounds to turn infinite sums into finite
ones; a sum that cannot be made finite raises OutOfWindowError.

Coefficients are computed per basis monomial and memoized, so a field is
linear by construction and ħ-linear through the split of every vector.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Callable, Iterable
from fractions import Fraction
from math import comb, factorial

from src.errors import OutOfWindowError, PreconditionError, TruncationError
from src.fock.space import GradedSpace, Monom, Vector
from src.series.hseries import Scalar, to_scalar
from src.series.operators import OperatorSeries
from src.series.window import falling_factorial, generalized_binomial

logger = logging.getLogger(__name__)

# (mode m, coefficient c, ħ-power h): the term c·ħ^h·a_m
ModeTerm = tuple[int, Fraction, int]

EXP_LIMIT = 40


class Field(ABC):
    """Base class: memoized coefficients on basis monomials."""

    top: int | None = None
    regular: bool = False
    grade: int | None = None

    def __init__(self, name: str, space: GradedSpace, hval: int = 0) -> None:
        self.name = name
        self.space = space
        self.hval = hval
        self._coefficients: dict[tuple[int, Monom], Vector] = {}
        self._lowers: dict[Monom, int] = {}

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name})"

    @abstractmethod
    def _coefficient(self, s: int, monom: Monom) -> Vector:
        """x^s coefficient of a(x) applied to the basis monomial."""

    @abstractmethod
    def _lower(self, monom: Monom) -> int:
        """A degree below which a(x)·monom vanishes."""

    def coefficient(self, s: int, v: Vector) -> Vector:
        space = self.space
        if self.top is not None and s > self.top:
            return space.zero
        out = space.zero
        for h, monom, c in space.split(v):
            if h + self.hval >= space.N:
                continue
            key = (s, monom)
            piece = self._coefficients.get(key)
            if piece is None:
                piece = space.truncate(self._coefficient(s, monom))
                self._coefficients[key] = piece
            if piece:
                out += piece * space.hterm(c, h)
        return space.truncate(out)

    def mode(self, m: int, v: Vector) -> Vector:
        return self.coefficient(-m - 1, v)

    def lower(self, v: Vector) -> int | None:
        """Certified lowest degree of a(x)v; None for the zero vector."""
        best: int | None = None
        for h, monom, _ in self.space.split(v):
            if h + self.hval >= self.space.N:
                continue
            low = self._lowers.get(monom)
            if low is None:
                low = self._lowers[monom] = self._lower(monom)
            best = low if best is None else min(best, low)
        return best

    def expansion(self, v: Vector, lo: int, hi: int) -> dict[int, Vector]:
        """Nonzero coefficients of a(x)v on degrees [lo, hi]."""
        out = {}
        for s in range(lo, hi + 1):
            c = self.coefficient(s, v)
            if c:
                out[s] = c
        return out

    def vanishes_on(self, v: Vector) -> bool:
        """True when a(x)v is identically zero; needs a bounded field."""
        if self.top is None:
            raise OutOfWindowError(f"{self.name}: cannot certify vanishing of an unbounded field")
        low = self.lower(v)
        return low is None or not self.expansion(v, low, self.top)


# ── Primitive fields ─────────────────────────────────────────


class ModeField(Field):
    """A field given by its mode action on basis monomials."""

    def __init__(self, name: str, space: GradedSpace, act: Callable[[int, Monom], Vector],
                 lower: Callable[[Monom], int], top: int | None = None, regular: bool = False) -> None:
        super().__init__(name, space)
        self._act = act
        self._lower_fn = lower
        self.top = top
        self.regular = regular

    def _coefficient(self, s: int, monom: Monom) -> Vector:
        return self._act(-s - 1, monom)

    def _lower(self, monom: Monom) -> int:
        return self._lower_fn(monom)


class IdentityField(Field):
    """1_W: the constant field x^0·id."""

    top = 0
    regular = True
    grade = 0

    def __init__(self, space: GradedSpace) -> None:
        super().__init__("1", space)

    def _coefficient(self, s: int, monom: Monom) -> Vector:
        return self.space.vector(monom) if s == 0 else self.space.zero

    def _lower(self, monom: Monom) -> int:
        return 0


class ModeSum(Field):
    """
    Σ_m c_m(x)·a_m for x-dependent scalar coefficients.

    `terms_at(s)` lists the (m, c, h) contributing to the x^s coefficient.
    A regular sum lives in degrees ≥ 0; otherwise the lower bound is the
    base field's bound minus `slack`, and `top` bounds it from above.
    """

    def __init__(self, name: str, base: Field, terms_at: Callable[[int], Iterable[ModeTerm]],
                 regular: bool, top: int | None = None, slack: int = 0, hval: int = 0,
                 grade: int | None = None) -> None:
        super().__init__(name, base.space, hval)
        self.base = base
        self._terms_at = terms_at
        self.regular = regular
        self.top = top
        self.slack = slack
        self.grade = grade if regular else None

    def _coefficient(self, s: int, monom: Monom) -> Vector:
        if self.regular and s < 0:
            return self.space.zero
        v = self.space.vector(monom)
        out = self.space.zero
        for m, c, h in self._terms_at(s):
            if h < self.space.N and c:
                out += self.base.mode(m, v) * self.space.scalar(c, h)
        return out

    def _lower(self, monom: Monom) -> int:
        if self.regular:
            return 0
        low = self.base.lower(self.space.vector(monom))
        return (0 if low is None else min(low, 0)) - self.slack


def minus_part(a: Field, name: str | None = None) -> ModeSum:
    """Y^-(a, x) = Σ_{m≥0} a_m x^{-m-1}."""
    return ModeSum(name or f"{a.name}⁻", a, lambda s: [(-s - 1, Fraction(1), 0)] if s < 0 else [],
                   regular=False, top=-1)


def plus_part(a: Field, name: str | None = None) -> ModeSum:
    """Y^+(a, x) = Σ_{m<0} a_m x^{-m-1}."""
    return ModeSum(name or f"{a.name}⁺", a, lambda s: [(-s - 1, Fraction(1), 0)] if s >= 0 else [],
                   regular=True, grade=0)


def constant_mode(a: Field, m: int, c: Scalar = 1, hpow: int = 0) -> ModeSum:
    """The constant field c·ħ^hpow·a_m·x^0."""
    c = to_scalar(c)
    return ModeSum(f"{a.name}({m})", a, lambda s: [(m, c, hpow)] if s == 0 else [],
                   regular=True, top=0, hval=hpow, grade=hpow)


# ── Combinations ─────────────────────────────────────────────


class ScaledField(Field):
    """c·ħ^hpow·a(x)."""

    def __init__(self, base: Field, c: Scalar = 1, hpow: int = 0, name: str | None = None) -> None:
        self.c = to_scalar(c)
        label = name or (f"{self.c}ħ^{hpow}·{base.name}" if hpow else f"{self.c}·{base.name}")
        super().__init__(label, base.space, base.hval + hpow)
        self.base = base
        self.hpow = hpow
        self.top = base.top
        self.regular = base.regular
        self.grade = None if base.grade is None else base.grade + hpow

    def _coefficient(self, s: int, monom: Monom) -> Vector:
        if not self.c:
            return self.space.zero
        return self.base.coefficient(s, self.space.vector(monom)) * self.space.scalar(self.c, self.hpow)

    def _lower(self, monom: Monom) -> int:
        low = self.base.lower(self.space.vector(monom))
        return 0 if low is None else low


class SumField(Field):
    def __init__(self, *parts: Field, name: str | None = None) -> None:
        if not parts:
            raise ValueError("SumField needs at least one part")
        super().__init__(name or " + ".join(p.name for p in parts), parts[0].space,
                         min(p.hval for p in parts))
        self.parts = parts
        tops = [p.top for p in parts]
        self.top = None if None in tops else max(tops)
        self.regular = all(p.regular for p in parts)
        grades = [p.grade for p in parts]
        self.grade = None if None in grades else min(grades)

    def _coefficient(self, s: int, monom: Monom) -> Vector:
        v = self.space.vector(monom)
        out = self.space.zero
        for p in self.parts:
            out += p.coefficient(s, v)
        return out

    def _lower(self, monom: Monom) -> int:
        v = self.space.vector(monom)
        lows = [low for p in self.parts if (low := p.lower(v)) is not None]
        return min(lows, default=0)


class OperatorField(Field):
    """P(∂_x)·a(x) for an operator series P = Σ_k ħ^k Σ_d c_{k,d} ∂^d."""

    def __init__(self, base: Field, op: OperatorSeries, name: str | None = None) -> None:
        if op.kmin < 0:
            raise TruncationError(f"operator {op!r} has negative ħ-offsets")
        super().__init__(name or f"P(∂)·{base.name}", base.space, base.hval + op.kmin)
        self.base = base
        self.op = op
        self.top = base.top
        self.regular = base.regular
        self.dmax = max(op.orders, default=0)
        shift = min((k - d for k, row in op.table.items() for d in row), default=0)
        self.grade = None if base.grade is None else base.grade + shift

    def _coefficient(self, s: int, monom: Monom) -> Vector:
        v = self.space.vector(monom)
        out = self.space.zero
        for k, row in self.op.table.items():
            if k + self.base.hval >= self.space.N:
                continue
            for d, c in row.items():
                f = falling_factorial(s + d, d)
                if f:
                    piece = self.base.coefficient(s + d, v)
                    if piece:
                        out += piece * self.space.scalar(c * f, k)
        return out

    def _lower(self, monom: Monom) -> int:
        low = self.base.lower(self.space.vector(monom))
        if low is None:
            return 0
        return max(0, low - self.dmax) if low >= 0 else low - self.dmax


class ProductField(Field):
    """a(x)b(x) at one point; needs a regular left factor or a bounded right one."""

    def __init__(self, left: Field, right: Field, name: str | None = None) -> None:
        if not left.regular and right.top is None:
            raise OutOfWindowError(
                f"product {left.name}·{right.name} at one point is not a finite sum"
            )
        super().__init__(name or f"{left.name}·{right.name}", left.space, left.hval + right.hval)
        self.left = left
        self.right = right
        self.regular = left.regular and right.regular
        self.top = None if left.top is None or right.top is None else left.top + right.top
        if self.regular and left.grade is not None and right.grade is not None:
            self.grade = left.grade + right.grade

    def _inner(self, s: int, v: Vector) -> range:
        low = self.right.lower(v)
        if low is None:
            return range(0)
        high = s if self.left.regular else self.right.top
        if self.right.top is not None:
            high = min(high, self.right.top)
        return range(low, high + 1)

    def _coefficient(self, s: int, monom: Monom) -> Vector:
        v = self.space.vector(monom)
        out = self.space.zero
        for s2 in self._inner(s, v):
            b = self.right.coefficient(s2, v)
            if b:
                out += self.left.coefficient(s - s2, b)
        return out

    def _lower(self, monom: Monom) -> int:
        v = self.space.vector(monom)
        low = self.right.lower(v)
        if low is None:
            return 0
        if self.left.regular:
            return low
        best = None
        for s2 in range(low, self.right.top + 1):
            b = self.right.coefficient(s2, v)
            if b:
                inner = self.left.lower(b)
                if inner is not None:
                    best = s2 + inner if best is None else min(best, s2 + inner)
        return 0 if best is None else best


class ExpField(Field):
    """
    exp(a(x)) = Σ_k a(x)^k / k! at one point.

    The series stops where k·hval reaches N, degree by degree where a
    regular base has grade ≥ 1, or where a(x)^k kills the vector (bounded
    fields only); otherwise TruncationError.
    """

    def __init__(self, base: Field, name: str | None = None, limit: int = EXP_LIMIT) -> None:
        super().__init__(name or f"exp({base.name})", base.space)
        self.base = base
        self.limit = limit
        self.regular = base.regular
        if self.regular and base.grade is not None and base.grade >= 0:
            self.grade = 0
        if base.top is None:
            self.top = None
        else:
            self.top = max(0, base.top * limit) if base.top > 0 else 0
        self._powers: list[Field] = [IdentityField(base.space)]
        self._spans: dict[Monom, int] = {}

    def power(self, k: int) -> Field:
        while len(self._powers) <= k:
            self._powers.append(ProductField(self.base, self._powers[-1]))
        return self._powers[k]

    def _graded(self) -> bool:
        return self.base.regular and self.base.grade is not None and self.base.grade >= 1

    def span(self, monom: Monom) -> int:
        """Number of nonzero powers on the monomial, over all degrees."""
        if self.base.hval >= 1:
            return -(-self.space.N // self.base.hval)
        cached = self._spans.get(monom)
        if cached is not None:
            return cached
        if self.base.top is None:
            raise TruncationError(
                f"exp({self.base.name}) has no ħ factor and no bound to terminate on"
            )
        v = self.space.vector(monom)
        k = 1
        while not self.power(k).vanishes_on(v):
            if k > self.limit:
                raise TruncationError(
                    f"exp({self.base.name}) does not terminate on {self.space.describe(v)} "
                    f"within {self.limit} terms"
                )
            k += 1
        self._spans[monom] = k
        return k

    def order(self, monom: Monom, s: int) -> int:
        """Number of powers that can contribute to the x^s coefficient."""
        if self._graded():
            by_grade = max(1, (s + self.space.N - 1) // self.base.grade + 1)
            if self.base.hval >= 1:
                return min(by_grade, self.span(monom))
            return by_grade
        return self.span(monom)

    def _coefficient(self, s: int, monom: Monom) -> Vector:
        v = self.space.vector(monom)
        out = self.space.zero
        for k in range(self.order(monom, s)):
            piece = self.power(k).coefficient(s, v)
            if piece:
                out += piece * self.space.scalar(Fraction(1, factorial(k)))
        return out

    def _lower(self, monom: Monom) -> int:
        if self.regular:
            return 0
        v = self.space.vector(monom)
        lows = [low for k in range(self.span(monom)) if (low := self.power(k).lower(v)) is not None]
        return min(lows, default=0)


# ── Y_E products ─────────────────────────────────────────────


class YEProduct(Field):
    """
    (a_{(n)}b)(x): the coefficient of z^{-n-1} in z^{-k}((x1-x)^k a(x1)b(x))|_{x1=x+z}.

    With c_{r,s} the x1^r x^s coefficient of (x1-x)^k a(x1)b(x)w, the x^σ
    coefficient is Σ_r C(r, j)·c_{r, σ+j-r} for j = k-n-1, r from the
    lower bound of a(x)w. Each evaluation also checks that c_{r,s} vanishes
    on a band of k+1 degrees below that bound; a nonzero entry means k is
    not large enough and raises PreconditionError.
    """

    def __init__(self, a: Field, b: Field, n: int, k: int, name: str | None = None) -> None:
        if k < 0:
            raise ValueError(f"k must be nonnegative, got {k}")
        super().__init__(name or f"{a.name}_({n}){b.name}", a.space, a.hval + b.hval)
        self.a, self.b, self.n, self.k = a, b, n, k
        self.j = k - n - 1

    def entry(self, r: int, s: int, w: Vector) -> Vector:
        """c_{r,s} = Σ_i (-1)^i C(k,i)·a[r-k+i](b[s-i] w)."""
        out = self.space.zero
        for i in range(self.k + 1):
            inner = self.b.coefficient(s - i, w)
            if inner:
                piece = self.a.coefficient(r - self.k + i, inner)
                if piece:
                    sign = -1 if i % 2 else 1
                    out += piece * self.space.scalar(sign * comb(self.k, i))
        return self.space.truncate(out)

    def band_violation(self, sigma: int, w: Vector) -> tuple[int, int] | None:
        """First (r, s) on the validity band with c_{r,s} ≠ 0."""
        r0, s0 = self.a.lower(w), self.b.lower(w)
        if r0 is None or s0 is None:
            return None
        for r in range(r0 - self.k - 1, r0):
            s = sigma + self.j - r
            if s >= s0 and self.entry(r, s, w):
                return r, s
        return None

    def _coefficient(self, sigma: int, monom: Monom) -> Vector:
        if self.j < 0:
            return self.space.zero
        w = self.space.vector(monom)
        r0, s0 = self.a.lower(w), self.b.lower(w)
        if r0 is None or s0 is None:
            return self.space.zero
        bad = self.band_violation(sigma, w)
        if bad is not None:
            raise PreconditionError(
                f"k={self.k} is not valid for {self.a.name}, {self.b.name}: "
                f"x1^{bad[0]}·x^{bad[1]} survives on {self.space.describe(w)}"
            )
        out = self.space.zero
        for r in range(r0, sigma + self.j - s0 + 1):
            c = generalized_binomial(r, self.j)
            if c:
                e = self.entry(r, sigma + self.j - r, w)
                if e:
                    out += e * self.space.scalar(c)
        return out

    def _lower(self, monom: Monom) -> int:
        if self.j < 0:
            return 0
        w = self.space.vector(monom)
        r0, s0 = self.a.lower(w), self.b.lower(w)
        if r0 is None or s0 is None:
            return 0
        return r0 + s0 - self.j


def find_k(a: Field, b: Field, vectors: Iterable[Vector], sigmas: Iterable[int],
           n: int = -1, kmax: int = 12) -> int:
    """Smallest k ≤ kmax passing the band check on the sample vectors and degrees."""
    vectors, sigmas = list(vectors), list(sigmas)
    for k in range(kmax + 1):
        trial = YEProduct(a, b, n, k)
        if all(trial.band_violation(sigma, w) is None for w in vectors for sigma in sigmas):
            logger.debug("find_k(%s, %s) = %d", a.name, b.name, k)
            return k
    raise PreconditionError(f"no valid k ≤ {kmax} for {a.name}, {b.name}")


def ye_product(a: Field, b: Field, n: int, vectors: Iterable[Vector], sigmas: Iterable[int],
               kmax: int = 12, extra: int = 0) -> YEProduct:
    """a_{(n)}b with the smallest valid k found on the samples, plus `extra`."""
    k = find_k(a, b, vectors, sigmas, n, kmax) + extra
    return YEProduct(a, b, n, k)


def exp_iterate(v: Field, vectors: Iterable[Vector], sigmas: Iterable[int], kmax: int = 12) -> Field:
    """exp(v_{(-1)})1_W = Σ_j (v_{(-1)})^j 1_W / j!; v must carry at least one ħ."""
    if v.hval < 1:
        raise TruncationError(f"exp({v.name}_(-1)) does not terminate: no ħ factor")
    vectors, sigmas = list(vectors), list(sigmas)
    space = v.space
    term: Field = IdentityField(space)
    parts: list[Field] = [term]
    j = 1
    while j * v.hval < space.N:
        term = ye_product(v, term, -1, vectors, sigmas, kmax)
        parts.append(ScaledField(term, Fraction(1, factorial(j))))
        j += 1
    return SumField(*parts, name=f"exp({v.name}_(-1))1")
