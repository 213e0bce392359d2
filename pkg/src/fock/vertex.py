"""
Vertex — Y_E products and the exponential-current identities on operator models.

Every check here compares two fields coefficient by coefficient on sample
vectors and a window of x-degrees, modulo ħ^N (or a smaller order), and
returns a result entry. Hypotheses are asserted on the same samples first;
a violated hypothesis raises PreconditionError, which `guarded` turns into
a precondition-failed entry rather than a failure of the identity itself.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Any

from src.errors import OutOfWindowError, PreconditionError, TruncationError, check_result, guarded
from src.fock.fields import (
    EXP_LIMIT,
    ExpField,
    Field,
    ModeSum,
    OperatorField,
    ProductField,
    ScaledField,
    SumField,
    YEProduct,
    constant_mode,
    exp_iterate,
    find_k,
    minus_part,
    plus_part,
    ye_product,
)
from src.fock.gcm import GCM
from src.fock.heisenberg import HeisenbergData, bracket_kernel, build_h_field, log_pair_data
from src.fock.space import FockSpace, GradedSpace, Vector
from src.kernels.expand import expand
from src.kernels.factors import IotaKernel, pair
from src.series.hseries import HSeries, Scalar, to_scalar
from src.series.operators import op_make
from src.series.window import Window, generalized_binomial

logger = logging.getLogger(__name__)

# {(p, h): c}: the scalar series Σ c·ħ^h·x^{-p}, p ≥ 0
Polar = Mapping[tuple[int, int], Fraction]


# ── Comparison helpers ───────────────────────────────────────


def cut(space: GradedSpace, v: Vector, order: int | None = None) -> Vector:
    """v modulo ħ^order (default: the space's N)."""
    v = space.truncate(v)
    if order is None or order >= space.N:
        return v
    return space.ring.from_dict({m: c for m, c in v.items() if m[0] < order})


def field_difference(lhs: Field, rhs: Field, vectors: Iterable[Vector], degrees: Iterable[int],
                     order: int | None = None, factor: Vector | None = None) -> dict[str, Any] | None:
    """First (vector, degree) where lhs and factor·rhs differ, as a witness dict."""
    space = lhs.space
    degrees = list(degrees)
    for w in vectors:
        for s in degrees:
            left = lhs.coefficient(s, w)
            right = rhs.coefficient(s, w)
            if factor is not None:
                right = space.truncate(right * factor)
            if cut(space, left - right, order):
                return {
                    "vector": space.describe(w), "degree": s,
                    "lhs": space.describe(cut(space, left, order)),
                    "rhs": space.describe(cut(space, right, order)),
                }
    return None


def scalar_series(space: GradedSpace, terms: Mapping[int, Fraction]) -> Vector:
    out = space.zero
    for h, c in terms.items():
        if h < space.N and c:
            out += space.scalar(c, h)
    return out


def scalar_exp(space: GradedSpace, e: Vector) -> Vector:
    """exp(e) for a scalar e divisible by ħ."""
    if any(m[0] == 0 for m in e.keys()):
        raise TruncationError(f"exp({space.describe(e)}) does not terminate: no ħ factor")
    out, term, j = space.vacuum, space.vacuum, 1
    while True:
        term = space.truncate(term * e) * space.scalar(Fraction(1, j))
        if not term:
            return out
        out += term
        j += 1


# ── Y_E products ─────────────────────────────────────────────


def ye_k_independence_check(a: Field, b: Field, n: int, vectors: Sequence[Vector], degrees: Sequence[int],
                            kmax: int = 12, name: str = "fock.ye_k_independence") -> dict[str, Any]:
    """a_{(n)}b computed with the smallest valid k and with k+1 agree."""

    def run() -> dict[str, Any]:
        k = find_k(a, b, vectors, degrees, n, kmax)
        first, second = YEProduct(a, b, n, k), YEProduct(a, b, n, k + 1)
        bad = field_difference(first, second, vectors, degrees)
        if bad is not None:
            return check_result(name, False, f"{a.name}_({n}){b.name} depends on k", {**bad, "k": [k, k + 1]})
        return check_result(name, True, f"{a.name}_({n}){b.name} agrees for k = {k}, {k + 1}", k=k)

    return guarded(name, run)


# ── Zero-mode formula ────────────────────────────────────────


def exchange_violation(a: Field, b: Field, mu: Scalar, nu: Scalar, vectors: Iterable[Vector],
                       rs: Iterable[int], ss: Iterable[int]) -> dict[str, Any] | None:
    """
    First x1^r x^s coefficient where (x1-x+μħ)a(x1)b(x) and
    (x1-x+νħ)b(x)a(x1) differ.
    """
    space = a.space
    mu_h, nu_h = space.scalar(mu, 1), space.scalar(nu, 1)
    rs, ss = list(rs), list(ss)

    def ab(r: int, s: int, w: Vector) -> Vector:
        return a.coefficient(r, b.coefficient(s, w))

    def ba(r: int, s: int, w: Vector) -> Vector:
        return b.coefficient(s, a.coefficient(r, w))

    for w in vectors:
        for r in rs:
            for s in ss:
                left = ab(r - 1, s, w) - ab(r, s - 1, w) + ab(r, s, w) * mu_h
                right = ba(r - 1, s, w) - ba(r, s - 1, w) + ba(r, s, w) * nu_h
                if space.truncate(left - right):
                    return {"vector": space.describe(w), "x1": r, "x": s,
                            "lhs": space.describe(space.truncate(left)),
                            "rhs": space.describe(space.truncate(right))}
    return None


def exchange_kernel(mu: Scalar, nu: Scalar, window: Window) -> HSeries:
    """ι_{x,x1} (x - x1 - νħ)/(x - x1 - μħ) on an (x, x1) window."""
    kernel = IotaKernel.make(1, 0, [pair("x", "x1", -to_scalar(nu), 1),
                                    pair("x", "x1", -to_scalar(mu), -1, large="x")])
    return expand(kernel, window)


def zero_mode_formula_check(a: Field, b: Field, mu: Scalar, nu: Scalar, vectors: Sequence[Vector],
                            degrees: Sequence[int], rs: Sequence[int] | None = None, kmax: int = 12,
                            name: str = "fock.zero_mode") -> dict[str, Any]:
    """
    For (x1-x+μħ)a(x1)b(x) = (x1-x+νħ)b(x)a(x1):

        a_{(n)}b = (-μħ)^n a_{(0)}b                                 (n ≥ 0)
        a(x1)b(x) - ι_{x,x1}S·b(x)a(x1) = x1^{-1}δ((x-μħ)/x1)(a_{(0)}b)(x)

    with S = (x-x1-νħ)/(x-x1-μħ).
    """
    mu, nu = to_scalar(mu), to_scalar(nu)
    rs = list(rs if rs is not None else degrees)

    def run() -> dict[str, Any]:
        space = a.space
        N = space.N
        bad = exchange_violation(a, b, mu, nu, vectors, rs, degrees)
        if bad is not None:
            raise PreconditionError(
                f"{a.name}, {b.name} do not satisfy the (μ, ν) = ({mu}, {nu}) exchange relation at "
                f"x1^{bad['x1']}·x^{bad['x']} on {bad['vector']}"
            )

        zero = ye_product(a, b, 0, vectors, degrees, kmax)
        for n in range(1, N + 1):
            nth = ye_product(a, b, n, vectors, degrees, kmax)
            bad = field_difference(nth, ScaledField(zero, (-mu) ** n, n), vectors, degrees)
            if bad is not None:
                return check_result(name, False, f"{a.name}_({n}){b.name} ≠ (-μħ)^{n}·{a.name}_(0){b.name}",
                                    {**bad, "n": n})

        lows = [low for w in vectors if (low := a.lower(w)) is not None]
        reach = max(rs) - min(lows, default=0)
        if reach < 0:
            reach = 0
        window = Window.of({"x": (-(reach + N + 1), 0), "x1": (0, reach)}, hmax=N)
        kernel = exchange_kernel(mu, nu, window)
        for w in vectors:
            low = a.lower(w)
            for r in rs:
                for s in degrees:
                    lhs = a.coefficient(r, b.coefficient(s, w))
                    if low is not None:
                        for e1 in range(0, r - low + 1):
                            inner = a.coefficient(r - e1, w)
                            if not inner:
                                continue
                            for e in range(-(e1 + N), 1):
                                for h in range(N):
                                    c = kernel.coefficient(h, {"x": e, "x1": e1})
                                    if c:
                                        lhs -= b.coefficient(s - e, inner) * space.scalar(c, h)
                    k = -r - 1
                    rhs = space.zero
                    for j in range(N):
                        c = generalized_binomial(k, j) * (-mu) ** j
                        if c:
                            rhs += zero.coefficient(s - k + j, w) * space.scalar(c, j)
                    if space.truncate(lhs - rhs):
                        return check_result(
                            name, False, "singular part is not carried by the zero mode",
                            {"vector": space.describe(w), "x1": r, "x": s,
                             "lhs": space.describe(space.truncate(lhs)),
                             "rhs": space.describe(space.truncate(rhs))},
                        )
        return check_result(name, True, f"zero-mode formula holds for (μ, ν) = ({mu}, {nu})",
                            mu=str(mu), nu=str(nu))

    return guarded(name, run)


def exchange_pair(mu: Scalar, nu: Scalar, N: int, depth: int,
                  data: HeisenbergData | None = None) -> tuple[FockSpace, Field, Field]:
    """
    exp(Y^-(v, x)) and exp(ħY^+(v, x)) for the field v with γ = ħ^{-1}log((x+νħ)/(x+μħ)).

    `data` replaces that γ, e.g. by a perturbed copy.
    """
    data = data if data is not None else log_pair_data(mu, nu, N)
    space = FockSpace(data.labels, N, depth)
    v = build_h_field(data, space, 0)
    a = ExpField(minus_part(v), name="A")
    b = ExpField(ScaledField(plus_part(v), 1, 1), name="B")
    return space, a, b


# ── Exponential fields ───────────────────────────────────────


class ExpOperator:
    """
    E^±(a, ζ) at the point ζ = c·ħ, acting on vectors:

        E^-(a, ζ) = exp(Σ_{k≥1} a_{-k} ζ^k / k)
        E^+(a, ζ) = exp(-Σ_{k≥1} a_k ζ^{-k} / k)

    E^+ needs a_k v divisible by ħ^k; otherwise TruncationError.
    """

    def __init__(self, a: Field, c: Scalar, sign: int, limit: int = EXP_LIMIT) -> None:
        if sign not in (-1, 1):
            raise ValueError(f"sign must be ±1, got {sign}")
        self.a = a
        self.c = to_scalar(c)
        self.sign = sign
        self.limit = limit

    def exponent(self, v: Vector) -> Vector:
        space, a, c = self.a.space, self.a, self.c
        out = space.zero
        if self.sign < 0:
            for k in range(1, space.N):
                piece = a.mode(-k, v)
                if piece:
                    out += piece * space.scalar(c ** k / k, k)
            return space.truncate(out)
        low = a.lower(v)
        if low is None:
            return out
        for k in range(1, -low):
            piece = a.mode(k, v)
            if not piece:
                continue
            try:
                piece = space.divide_hbar(piece, k)
            except OutOfWindowError as exc:
                raise TruncationError(f"E^+({a.name}, {c}ħ): {exc}") from exc
            out -= piece * space.scalar(1 / (k * c ** k))
        return space.truncate(out)

    def apply(self, v: Vector) -> Vector:
        if not self.c:
            return v
        space = self.a.space
        out, term = v, v
        for j in range(1, self.limit + 1):
            term = self.exponent(term) * space.scalar(Fraction(1, j))
            if not term:
                return space.truncate(out)
            out += term
        raise TruncationError(f"E^{'+' if self.sign > 0 else '-'}({self.a.name}) does not terminate")


def exp_field(a: Field, c: Scalar, sign: int) -> ExpOperator:
    return ExpOperator(a, c, sign)


def creation_exponent(a: Field, c: Scalar = 0, negate: bool = False) -> ModeSum:
    """±Σ_{k≥1} a_{-k}(x+cħ)^k / k, the exponent of E^∓(±a, x+cħ)."""
    c, sign = to_scalar(c), (-1 if negate else 1)
    N = a.space.N

    def terms_at(s: int) -> list[tuple[int, Fraction, int]]:
        if s < 0:
            return []
        return [(-k, sign * Fraction(comb(k, s)) * c ** (k - s) / k, k - s)
                for k in range(max(1, s), s + N)]

    return ModeSum(f"{'-' if negate else ''}{a.name}⁺exp", a, terms_at, regular=True, grade=1)


def annihilation_exponent(a: Field, c: Scalar = 0, negate: bool = False) -> ModeSum:
    """∓Σ_{k≥1} a_k(x+cħ)^{-k} / k, the exponent of E^+(±a, x+cħ)."""
    c, sign = to_scalar(c), (1 if negate else -1)
    N = a.space.N

    def terms_at(s: int) -> list[tuple[int, Fraction, int]]:
        out = []
        for j in range(N):
            k = -s - j
            if k < 1:
                break
            out.append((k, sign * generalized_binomial(-k, j) * c ** j / k, j))
        return out

    return ModeSum(f"{'-' if negate else ''}{a.name}⁻exp", a, terms_at, regular=False, top=-1, slack=N - 1)


# ── Exponential calculus ─────────────────────────────────────


def _commutator_violation(a: Field, b: Field, gamma: Polar, vectors: Iterable[Vector],
                          degrees: Sequence[int]) -> dict[str, Any] | None:
    """First (r, s, w) where [a(x1), b(x2)]w ≠ ι_{x1,x2}γ(x1-x2)·w."""
    space = a.space
    for w in vectors:
        for r in degrees:
            for s in degrees:
                lhs = a.coefficient(r, b.coefficient(s, w)) - b.coefficient(s, a.coefficient(r, w))
                p = -r - s
                expected = space.zero
                if p >= 0 and s >= 0:
                    sign = -1 if s % 2 else 1
                    binom = generalized_binomial(-p, s) * sign
                    for (q, h), c in gamma.items():
                        if q == p and h < space.N:
                            expected += w * space.scalar(c * binom, h)
                if space.truncate(lhs - expected):
                    return {"vector": space.describe(w), "x1": r, "x2": s,
                            "commutator": space.describe(space.truncate(lhs)),
                            "expected": space.describe(expected)}
    return None


def verify_exp_cal(alpha: Field, beta: Field, gamma: Polar, vectors: Sequence[Vector],
                   degrees: Sequence[int], kmax: int = 12, name: str = "fock.exp_cal") -> dict[str, Any]:
    """
    exp((α+β)_{(-1)})1_W = exp(½E)·exp β(x)·exp α(x), where [α(x1), β(x2)] = γ(x1-x2)
    is central, α and β self-commute, and E is the x^0 coefficient of γ.
    """

    def run() -> dict[str, Any]:
        space = alpha.space
        zero: dict[tuple[int, int], Fraction] = {}
        for label, (u, v, g) in {"[α,α]": (alpha, alpha, zero), "[β,β]": (beta, beta, zero),
                                 "[α,β]": (alpha, beta, gamma)}.items():
            bad = _commutator_violation(u, v, g, vectors, degrees)
            if bad is not None:
                raise PreconditionError(
                    f"{label} is not the declared central kernel at x1^{bad['x1']}·x2^{bad['x2']} "
                    f"on {bad['vector']}"
                )
        energy = scalar_series(space, {h: c for (p, h), c in gamma.items() if p == 0})
        prefactor = scalar_exp(space, energy * space.scalar(Fraction(1, 2)))
        lhs = exp_iterate(SumField(alpha, beta), vectors, degrees, kmax)
        rhs = ProductField(ExpField(beta), ExpField(alpha))
        bad = field_difference(lhs, rhs, vectors, degrees, factor=prefactor)
        if bad is not None:
            return check_result(name, False, "exp((α+β)_(-1))1 ≠ exp(½E)·exp β·exp α", bad)
        return check_result(name, True, "exponential of the iterate factors as exp(½E)·exp β·exp α",
                            energy=space.describe(energy))

    return guarded(name, run)


def split_pair(data: HeisenbergData, space: FockSpace, i: int, j: int | None = None
               ) -> tuple[Field, Field, dict[tuple[int, int], Fraction]]:
    """
    α = ħY^-(h_i) and β = ħY^+(h_i) with their contraction kernel; with a
    second node j, α gains ħh_j(1) and β gains ħh_j(-1), giving γ an x^0 term.
    """
    h = build_h_field(data, space, i)
    gamma = {(p, hp + 2): c for (p, hp), c in data.polar.get((i, i), {}).items() if hp + 2 < space.N}
    alpha: Field = minus_part(h)
    beta: Field = plus_part(h)
    if j is not None:
        hj = build_h_field(data, space, j)
        alpha = SumField(alpha, constant_mode(hj, 1))
        beta = SumField(beta, constant_mode(hj, -1))
        for hp, c in data.mode_bracket(j, 1, j, -1).items():
            if hp + 2 < space.N:
                gamma[(0, hp + 2)] = gamma.get((0, hp + 2), Fraction(0)) + c
    return ScaledField(alpha, 1, 1, name="α"), ScaledField(beta, 1, 1, name="β"), gamma


# ── Iterate formula ──────────────────────────────────────────


def iterate_sides(data: HeisenbergData, space: FockSpace, i: int, c: Scalar, vectors: Sequence[Vector],
                  degrees: Sequence[int], kmax: int = 12) -> tuple[Field, Field, Field]:
    """
    With z = cħ, the three expressions for Y(E^-(-a, z)1, x):

        exp((zL(z∂)a)_{(-1)})1_W
        exp(zL(z∂)Y^+(a, x))·exp(zL(z∂)Y^-(a, x))
        E^-(a, x+z)E^-(-a, x)E^+(a, x+z)E^+(-a, x)
    """
    c = to_scalar(c)
    h = build_h_field(data, space, i)
    for w in vectors:
        if h.mode(0, w):
            raise PreconditionError(f"{h.name}(0) does not vanish on {space.describe(w)}")
    zl = op_make("L", space.N, "x", c=c).scale(c, 1)
    iterate = exp_iterate(OperatorField(h, zl, name="zL·h"), vectors, degrees, kmax)
    grouped = ProductField(ExpField(OperatorField(plus_part(h), zl)),
                           ExpField(OperatorField(minus_part(h), zl)))
    vertex = ProductField(
        ProductField(ExpField(creation_exponent(h, c)), ExpField(creation_exponent(h, 0, negate=True))),
        ProductField(ExpField(annihilation_exponent(h, c)), ExpField(annihilation_exponent(h, 0, negate=True))),
    )
    return iterate, grouped, vertex


def verify_iterate(data: HeisenbergData, space: FockSpace, i: int, c: Scalar, vectors: Sequence[Vector],
                   degrees: Sequence[int], kmax: int = 12, name: str = "fock.iterate") -> dict[str, Any]:

    def run() -> dict[str, Any]:
        iterate, grouped, vertex = iterate_sides(data, space, i, c, vectors, degrees, kmax)
        for label, lhs, rhs in (("iterate/grouped", iterate, grouped), ("grouped/vertex", grouped, vertex)):
            bad = field_difference(lhs, rhs, vectors, degrees)
            if bad is not None:
                return check_result(name, False, f"{label} expressions differ at z = {c}ħ",
                                    {**bad, "pair": label})
        return check_result(name, True, f"iterate formula holds for h{data.labels[i]} at z = {c}ħ",
                            z=f"{c}ħ")

    return guarded(name, run)


def ci_check(data: HeisenbergData, space: FockSpace, i: int, vectors: Sequence[Vector],
             degrees: Sequence[int], kmax: int = 12, name: str = "fock.ci") -> dict[str, Any]:
    """q^{(1-ℓ)∂} applied to the z = -2ħ iterate is exp(-Gq^{-ℓ}Y^+)·exp(-Gq^{-ℓ}Y^-)."""

    def run() -> dict[str, Any]:
        N, level = space.N, data.level
        iterate, _, _ = iterate_sides(data, space, i, -2, vectors, degrees, kmax)
        lhs = OperatorField(iterate, op_make("qpow", N, "x", c=1 - level))
        h = build_h_field(data, space, i)
        g = op_make("G", N, "x").compose(op_make("qpow", N, "x", c=-level)).scale(-1)
        rhs = ProductField(ExpField(OperatorField(plus_part(h), g)), ExpField(OperatorField(minus_part(h), g)))
        bad = field_difference(lhs, rhs, vectors, degrees)
        if bad is not None:
            return check_result(name, False, f"explicit expression for C{data.labels[i]} differs", bad)
        return check_result(name, True, f"C{data.labels[i]} equals the grouplike exponential product")

    return guarded(name, run)


# ── Weak associativity ───────────────────────────────────────


def weak_assoc_check(u: Field, v: Field, vectors: Sequence[Vector], order: int, lmax: int = 6,
                     a_range: Sequence[int] = range(3), b_range: Sequence[int] = range(-3, 3),
                     kmax: int = 12, band: int = 3, name: str = "fock.weak_assoc") -> dict[str, Any]:
    """
    Smallest l ≤ lmax with (x0+x2)^l u(x0+x2)v(x2)w ≡ (x2+x0)^l Y_E(u, x0)v(x2)w
    mod ħ^order on the sample, where u_p w = 0 for p ≥ l.
    """
    space = u.space
    a_range, b_range = list(a_range), list(b_range)
    # the right side reads (u_(n)v)(x) at x^{b-l+j} for 0 ≤ j ≤ l ≤ lmax
    queried = range(min(b_range) - lmax, max(b_range) + 1)
    products: dict[int, YEProduct] = {}

    def product(n: int) -> YEProduct:
        if n not in products:
            products[n] = ye_product(u, v, n, vectors, queried, kmax)
        return products[n]

    def lhs(l: int, a: int, b: int, w: Vector) -> Vector:
        low = v.lower(w)
        if low is None:
            return space.zero
        top_q = -low - 1
        out = space.zero
        for p in range(l - a - b - 2 - top_q, l - a):
            q = l - p - a - b - 2
            inner = v.mode(q, w)
            if inner:
                piece = u.mode(p, inner)
                if piece:
                    out += piece * space.scalar(comb(l - p - 1, a))
        return out

    def rhs(l: int, a: int, b: int, w: Vector) -> Vector:
        out = space.zero
        for j in range(l + 1):
            piece = product(j - a - 1).coefficient(b - l + j, w)
            if piece:
                out += piece * space.scalar(comb(l, j))
        return out

    def valid(l: int) -> bool:
        return all(not u.mode(p, w) for w in vectors for p in range(l, l + band))

    def run() -> dict[str, Any]:
        for l in range(lmax + 1):
            if not valid(l):
                continue
            if all(not cut(space, lhs(l, a, b, w) - rhs(l, a, b, w), order)
                   for w in vectors for a in a_range for b in b_range):
                return check_result(name, True, f"weak associativity holds with l = {l}", l=l)
        return check_result(name, False, f"no l ≤ {lmax} gives weak associativity mod ħ^{order}",
                            {"u": u.name, "v": v.name, "lmax": lmax})

    return guarded(name, run)


def weak_assoc_reach(depth: int, a_range: Sequence[int] = range(3), b_range: Sequence[int] = range(-3, 3),
                     kmax: int = 12) -> int:
    """
    Highest weight weak_assoc_check reaches from vectors of weight ≤ depth.

    The band test of u_(n)v with n ≥ -max(a) - 1 reads v at x^s for s up to
    σ + 2k - n - r0, where r0 ≥ -depth - 1 and σ ≤ max(b). No creation mode
    used on the way exceeds this weight.
    """
    return max(b_range) + max(a_range) + 2 * kmax + 2 * depth + 3


# ── S-Jacobi spot check ──────────────────────────────────────


def shift_part(data: HeisenbergData, i: int, j: int) -> dict[tuple[int, int], Fraction]:
    """A(x) = γ_ij(x) - γ_ji(-x): the part of the commutator not carried by δ-derivatives."""
    out: dict[tuple[int, int], Fraction] = {}
    for (p, h), c in data.polar.get((i, j), {}).items():
        out[(p, h)] = out.get((p, h), Fraction(0)) + c
    for (p, h), c in data.polar.get((j, i), {}).items():
        out[(p, h)] = out.get((p, h), Fraction(0)) - (-1) ** p * c
    return {key: c for key, c in out.items() if c}


def s_jacobi_check(u: Field, v: Field, shift: Polar, vectors: Sequence[Vector], rs: Sequence[int],
                   ss: Sequence[int], kmax: int = 12, name: str = "fock.s_jacobi") -> dict[str, Any]:
    """
    [u(x1), v(x2)] - ι_{x2,x1}A(x1-x2) = Σ_{n≥0} (u_{(n)}v)(x2)·(1/n!)∂^n_{x2} x1^{-1}δ(x2/x1)
    on basis vectors, with the Y_E products computed by the k-trick.
    """

    def run() -> dict[str, Any]:
        space = u.space
        k = find_k(u, v, vectors, ss, 0, kmax)
        products = [YEProduct(u, v, n, k) for n in range(k)]
        for w in vectors:
            for r in rs:
                for s in ss:
                    lhs = u.coefficient(r, v.coefficient(s, w)) - v.coefficient(s, u.coefficient(r, w))
                    p = -r - s
                    if p >= 0 and r >= 0:
                        sign = -1 if (p + r) % 2 else 1
                        binom = generalized_binomial(-p, r) * sign
                        for (q, h), c in shift.items():
                            if q == p and h < space.N:
                                lhs -= w * space.scalar(c * binom, h)
                    top = -r - 1
                    rhs = space.zero
                    for n, product in enumerate(products):
                        c = generalized_binomial(top, n)
                        if c:
                            rhs += product.coefficient(s - top + n, w) * space.scalar(c)
                    if space.truncate(lhs - rhs):
                        return check_result(
                            name, False, f"[{u.name}, {v.name}] is not carried by its Y_E products",
                            {"vector": space.describe(w), "x1": r, "x2": s,
                             "lhs": space.describe(space.truncate(lhs)),
                             "rhs": space.describe(space.truncate(rhs))},
                        )
        return check_result(name, True, f"commutator of {u.name}, {v.name} matches Σ (u_(n)v)∂^nδ + A", k=k)

    return guarded(name, run)


# ── Restrictedness ───────────────────────────────────────────


@dataclass
class CommutatorRelation:
    """
    [a(x1), b(x2)] = Σ_j c_j(x2)·(1/j!)∂^j_{x2} x1^{-1}δ(x2/x1) + K(x1, x2)·1,
    with K an HSeries in (z, w) = (x1, x2).
    """

    local: Sequence[tuple[int, Field]] = ()
    kernel: HSeries | None = None


@dataclass
class ExchangeRelation:
    """p(x1-x2)a(x1)b(x2) = q(x2-x1)b(x2)a(x1), p and q as {(degree, ħ-power): c}."""

    p: Mapping[tuple[int, int], Fraction] = field(default_factory=lambda: {(0, 0): Fraction(1)})
    q: Mapping[tuple[int, int], Fraction] = field(default_factory=lambda: {(0, 0): Fraction(1)})


def _commutator_expected(a: Field, relation: CommutatorRelation, r: int, m: int, w: Vector) -> Vector:
    space = a.space
    out = space.zero
    for j, c_field in relation.local:
        c = generalized_binomial(-r - 1, j)
        if c:
            out += c_field.coefficient(r - m + j, w) * space.scalar(c)
    if relation.kernel is not None:
        for h in range(space.N):
            c = relation.kernel.coefficient(h, {"z": r, "w": -m - 1})
            if c:
                out += w * space.scalar(c, h)
    return out


def _commutator_bound(a: Field, relation: CommutatorRelation, m: int, w: Vector) -> int | None:
    bounds = []
    if (low := a.lower(w)) is not None:
        bounds.append(low)
    for j, c_field in relation.local:
        if (low := c_field.lower(w)) is not None:
            bounds.append(low + m - j)
    if relation.kernel is not None:
        i_z, i_w = relation.kernel.vars.index("z"), relation.kernel.vars.index("w")
        zs = [e[i_z] for (_, e) in relation.kernel.terms if e[i_w] == -m - 1]
        if zs:
            bounds.append(min(zs))
    return min(bounds, default=None)


def _exchange_violation(a: Field, b: Field, relation: ExchangeRelation, vectors: Iterable[Vector],
                        rs: Sequence[int], ss: Sequence[int]) -> dict[str, Any] | None:
    space = a.space
    for w in vectors:
        for r in rs:
            for s in ss:
                left, right = space.zero, space.zero
                for (d, h), c in relation.p.items():
                    for i in range(d + 1):
                        k = comb(d, i) * (-1) ** (d - i) * c
                        left += a.coefficient(r - i, b.coefficient(s - d + i, w)) * space.scalar(k, h)
                for (d, h), c in relation.q.items():
                    for i in range(d + 1):
                        k = comb(d, i) * (-1) ** (d - i) * c
                        right += b.coefficient(s - i, a.coefficient(r - d + i, w)) * space.scalar(k, h)
                if space.truncate(left - right):
                    return {"vector": space.describe(w), "x1": r, "x2": s}
    return None


def exchange_bound(a: Field, b: Field, relation: ExchangeRelation, m: int, w: Vector) -> int | None:
    """
    Lowest x-degree of a(x)b_m w allowed by p(x1-x2)a(x1)b(x2) = q(x2-x1)b(x2)a(x1).

    With p(x, 0) = x^d, reading the x2^{-m-1} coefficient gives
    x1^d a(x1)b_m w = (x1-degree ≥ lower of a on w) minus terms in b_{m+i} w for
    i ≥ 1 and ħ-multiples, so the bound follows by descent from the first m
    with b_m w = 0, one ħ-order at a time. None when b_m w vanishes.
    """
    space = a.space
    r0, s0 = a.lower(w), b.lower(w)
    if s0 is None or m >= -s0:
        return None
    [d] = [deg for (deg, h), c in relation.p.items() if h == 0 and c]
    bounds: dict[tuple[int, int], int | None] = {}
    for mm in range(-s0 - 1, m - 1, -1):
        for order in range(space.N):
            low = r0
            for (e, h), c in relation.p.items():
                if not c or h > order:
                    continue
                for j in range(e + 1):
                    shift = e - j
                    if (h == 0 and shift == 0) or mm + shift >= -s0:
                        continue
                    inner = bounds[(mm + shift, order - h)]
                    if inner is not None:
                        low = j + inner if low is None else min(low, j + inner)
            bounds[(mm, order)] = None if low is None else low - d
    return bounds[(m, space.N - 1)]


def restrictedness_check(a: Field, b: Field, vectors: Sequence[Vector],
                         relation: CommutatorRelation | ExchangeRelation, modes: Sequence[int] = range(-3, 4),
                         band: int = 4, name: str = "fock.restricted") -> dict[str, Any]:
    """
    a(x)b_m w ∈ W_ħ((x)) for every sampled m, with its coefficients zero on a
    band below the bound the relation predicts.
    """
    modes = list(modes)

    def run() -> dict[str, Any]:
        space = a.space
        degrees = list(range(-band - max(modes) - 2, band + 1))
        if isinstance(relation, ExchangeRelation):
            lead = {d: c for (d, h), c in relation.p.items() if h == 0 and c}
            if len(lead) != 1 or next(iter(lead.values())) != 1:
                raise PreconditionError("p(x, 0) must be a single monic power of x")
            bad = _exchange_violation(a, b, relation, vectors, degrees, [-m - 1 for m in modes])
            if bad is not None:
                raise PreconditionError(f"exchange relation fails at x1^{bad['x1']}·x2^{bad['x2']} on {bad['vector']}")
        else:
            for w in vectors:
                for m in modes:
                    for r in degrees:
                        lhs = a.coefficient(r, b.mode(m, w)) - b.mode(m, a.coefficient(r, w))
                        if space.truncate(lhs - _commutator_expected(a, relation, r, m, w)):
                            raise PreconditionError(f"commutator relation fails at x^{r}, mode {m} on {space.describe(w)}")
        for w in vectors:
            for m in modes:
                target = b.mode(m, w)
                if isinstance(relation, ExchangeRelation):
                    bound = exchange_bound(a, b, relation, m, w)
                else:
                    bound = _commutator_bound(a, relation, m, w)
                if bound is None:
                    if target and a.lower(target) is not None:
                        return check_result(name, False, f"no bound predicted for {a.name}(x){b.name}_{m}",
                                            {"vector": space.describe(w), "mode": m})
                    continue
                for s in range(bound - band, bound):
                    piece = a.coefficient(s, target)
                    if piece:
                        return check_result(
                            name, False, f"{a.name}(x){b.name}_{m}w has x^{s} below the bound {bound}",
                            {"vector": space.describe(w), "mode": m, "degree": s,
                             "value": space.describe(piece)},
                        )
        return check_result(name, True, f"{a.name}(x){b.name}_m w is bounded below for m in "
                            f"[{min(modes)}, {max(modes)}]")

    return guarded(name, run)


def cartan_relation(gcm: GCM, level: Scalar, i: int, j: int, half_width: int, N: int) -> CommutatorRelation:
    """The central bracket [h_i(z), h_j(w)] as a commutator relation on a symmetric window."""
    window = Window.symmetric(("z", "w"), half_width, hmax=N)
    return CommutatorRelation(kernel=bracket_kernel(gcm, level, i, j, window))
