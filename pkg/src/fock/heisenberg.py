"""
Heisenberg — the Cartan currents h_i(x) on the Fock space.

The ħ-corrected Cartan bracket is

    [h_i(z), h_j(w)] = γ_ij(z - w) - γ_ji(w - z),
    γ_ij(x) = [a_ij]_{q^∂}[ℓ]_{q^∂} (x + ℓħ)^{-2} = Σ_{p≥2} g^{ij}_p x^{-p},

with the first term expanded for |z| > |w| and the second for |w| > |z|.
Reading off modes gives [h_i(m), h_j(-n)] = g^{ij}_{m-n+2}·C(m, n-1) for
m ≥ 0, n ≥ 1, which is not diagonal in the modes once ħ-corrections are in;
its ħ^0 part is a_ij·ℓ·m·δ_{m,n}. On the Fock space h_i(-n) multiplies by
x_{i,n} and h_i(m ≥ 0) acts as Σ_{j,n} g^{ij}_{m-n+2} C(m, n-1) ∂/∂x_{j,n}.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Any

import sympy

from src.errors import check_result
from src.fock.fields import ModeField
from src.fock.gcm import GCM
from src.fock.space import FockSpace, Monom, Vector
from src.kernels.expand import expand
from src.kernels.factors import IotaKernel, KernelSum, pair, single
from src.kernels.logkernels import log_series
from src.series.hseries import HSeries, Scalar, delta, to_scalar
from src.series.operators import op_make
from src.series.window import Window, generalized_binomial

logger = logging.getLogger(__name__)

# (i, j) -> {(p, h): c}, the coefficient of ħ^h x^{-p} in γ_ij(x)
Polar = dict[tuple[int, int], dict[tuple[int, int], Fraction]]


@dataclass(frozen=True)
class HeisenbergData:
    """Polar coefficients of γ_ij for every ordered pair of nodes."""

    name: str
    labels: tuple[str, ...]
    level: Fraction
    N: int
    polar: Mapping[tuple[int, int], Mapping[tuple[int, int], Fraction]] = field(repr=False)

    @property
    def nodes(self) -> range:
        return range(len(self.labels))

    @property
    def max_pole(self) -> int:
        return max((p for terms in self.polar.values() for p, _ in terms), default=0)

    def terms(self, i: int, j: int, p: int) -> list[tuple[int, Fraction]]:
        """(h, c) with c·ħ^h the coefficient g^{ij}_p."""
        return sorted((h, c) for (q, h), c in self.polar.get((i, j), {}).items() if q == p and h < self.N)

    def mode_bracket(self, i: int, m: int, j: int, n: int) -> dict[int, Fraction]:
        """[h_i(m), h_j(n)] as {ħ-power: coefficient}."""
        if m >= 0 and n < 0:
            binom = comb(m, -n - 1) if -n - 1 <= m else 0
            return {h: c * binom for h, c in self.terms(i, j, m + n + 2) if binom}
        if m < 0 and n >= 0:
            return {h: -c for h, c in self.mode_bracket(j, n, i, m).items()}
        return {}

    def perturbed(self, i: int, j: int, p: int, h: int, amount: Scalar = 1) -> HeisenbergData:
        """A copy with c·ħ^h x^{-p} added to γ_ij (and γ_ji): a negative control."""
        polar = {key: dict(terms) for key, terms in self.polar.items()}
        for key in {(i, j), (j, i)}:
            row = polar.setdefault(key, {})
            row[(p, h)] = row.get((p, h), Fraction(0)) + to_scalar(amount)
        return HeisenbergData(f"{self.name}~", self.labels, self.level, self.N, polar)

    def describe(self) -> dict[str, Any]:
        return {
            f"{self.labels[i]},{self.labels[j]}": {
                f"x^-{p}": {f"ħ^{h}": str(c) for h, c in self.terms(i, j, p)}
                for p in sorted({p for p, _ in self.polar.get((i, j), {})})
            }
            for i in self.nodes for j in self.nodes
        }


def _polar_of(series: HSeries, N: int) -> dict[tuple[int, int], Fraction]:
    return {(-e[0], h): c for (h, e), c in series.terms.items() if e[0] < 0 and h < N}


# ── γ from the kernel calculus ───────────────────────────────


def gamma_series(a: int, level: Scalar, N: int) -> HSeries:
    """[a]_{q^∂}[ℓ]_{q^∂}(x + ℓħ)^{-2} expanded in x^{-1}, exact below ħ^N."""
    level = to_scalar(level)
    order = N + 2
    window = Window.of({"x": (-(3 * N + 8), N + 4)}, hmax=order)
    series = expand(IotaKernel.make(1, 0, [single("x", level, -2)]), window)
    for m in (a, level):
        series = op_make("qbracket", order, "x", m=m).apply(series)
    return series


def derive_gamma(gcm: GCM, level: Scalar, N: int) -> HeisenbergData:
    """Heisenberg structure constants of the Cartan currents at level ℓ, exact below ħ^N."""
    level = to_scalar(level)
    by_entry: dict[int, dict[tuple[int, int], Fraction]] = {}
    polar: Polar = {}
    for i, j in gcm.pairs():
        a = gcm.a(i, j)
        if a not in by_entry:
            series = gamma_series(a, level, N)
            terms = {}
            for p in range(1, N + 2):
                for h in range(N):
                    c = series.coefficient(h, (-p,))
                    if c:
                        terms[(p, h)] = c
            by_entry[a] = terms
        polar[(i, j)] = dict(by_entry[a])
    logger.debug("derive_gamma(%s, ℓ=%s, N=%d)", gcm.name, level, N)
    return HeisenbergData(gcm.name, gcm.labels, level, N, polar)


def gamma_oracle(gcm: GCM, level: Scalar, N: int) -> HeisenbergData:
    """
    Independent route: S(t) = sinh(a t) sinh(ℓ t) / sinh(t)^2 by sympy series,
    then S(ħ∂)(x+ℓħ)^{-2} = Σ_k s_k ħ^k (-1)^k (k+1)! (x+ℓħ)^{-2-k} binomially.
    """
    level = to_scalar(level)
    t = sympy.Symbol("t")
    ell = sympy.Rational(level.numerator, level.denominator)
    polar: Polar = {}
    for i, j in gcm.pairs():
        a = gcm.a(i, j)
        s = sympy.series(sympy.sinh(a * t) * sympy.sinh(ell * t) / sympy.sinh(t) ** 2, t, 0, N + 1).removeO()
        coeffs = [sympy.Rational(s.coeff(t, k)) if k else sympy.Rational(s.subs(t, 0)) for k in range(N)]
        terms: dict[tuple[int, int], Fraction] = {}
        for h in range(N):
            total = Fraction(0)
            for k in range(h + 1):
                sk = Fraction(int(coeffs[k].p), int(coeffs[k].q))
                if sk:
                    total += sk * (-1) ** k * factorial(k + 1) * generalized_binomial(-2 - k, h - k) * level ** (h - k)
            if total:
                terms[(h + 2, h)] = total
        polar[(i, j)] = terms
    return HeisenbergData(f"{gcm.name} oracle", gcm.labels, level, N, polar)


def gamma_check(gcm: GCM, level: Scalar, N: int) -> dict[str, Any]:
    """derive_gamma against the sympy oracle, coefficient by coefficient."""
    derived, oracle = derive_gamma(gcm, level, N), gamma_oracle(gcm, level, N)
    for i, j in gcm.pairs():
        keys = set(derived.polar[(i, j)]) | set(oracle.polar[(i, j)])
        for p, h in sorted(keys):
            lhs = derived.polar[(i, j)].get((p, h), Fraction(0))
            rhs = oracle.polar[(i, j)].get((p, h), Fraction(0))
            if lhs != rhs:
                return check_result(
                    "heisenberg.gamma", False, f"γ_{gcm.labels[i]}{gcm.labels[j]} differs at ħ^{h}x^-{p}",
                    {"pair": [gcm.labels[i], gcm.labels[j]], "p": p, "h": h,
                     "kernel": str(lhs), "oracle": str(rhs)},
                )
    return check_result("heisenberg.gamma", True, f"γ matches the oracle for {gcm.name} at ℓ={level}",
                        gamma=derived.describe())


def log_pair_data(mu: Scalar, nu: Scalar, N: int) -> HeisenbergData:
    """Rank-one data with γ(x) = ħ^{-1}·log((x+νħ)/(x+μħ))."""
    mu, nu = to_scalar(mu), to_scalar(nu)
    window = Window.of({"x": (-(N + 2), 0)}, hmax=N + 1)
    ratio = IotaKernel.make(1, 0, [single("x", nu, 1), single("x", mu, -1)])
    series = log_series(ratio, window)
    polar = {(p, h - 1): c for (p, h), c in _polar_of(series, N + 1).items()}
    return HeisenbergData(f"log[{mu},{nu}]", ("1",), Fraction(0), N, {(0, 0): polar})


# ── Fields ───────────────────────────────────────────────────


def fock_space(data: HeisenbergData, depth: int, max_mode: int | None = None) -> FockSpace:
    return FockSpace(data.labels, data.N, depth, max_mode)


def build_h_field(data: HeisenbergData, space: FockSpace, i: int) -> ModeField:
    """h_i(x) on the Fock space: creation by x_{i,n}, annihilation by γ-weighted derivatives."""
    P = data.max_pole

    def act(m: int, monom: Monom) -> Vector:
        v = space.vector(monom)
        if m < 0:
            return space.gen(i, -m) * v
        out = space.zero
        for j in data.nodes:
            for n in range(max(1, m + 2 - P), min(m + 1, space.max_mode) + 1):
                pos = space.index(j, n)
                if not monom[pos]:
                    continue
                binom = comb(m, n - 1)
                derivative = v.diff(space.gens[pos - 1])
                for h, c in data.terms(i, j, m - n + 2):
                    out += derivative * space.scalar(c * binom, h)
        return out

    def lower(monom: Monom) -> int:
        top = space.top_mode(monom)
        return min(0, -(top + P - 1)) if top else 0

    return ModeField(f"h{data.labels[i]}", space, act, lower)


def build_h_fields(data: HeisenbergData, space: FockSpace) -> list[ModeField]:
    return [build_h_field(data, space, i) for i in data.nodes]


# ── Checks ───────────────────────────────────────────────────


def bracket_kernel(gcm: GCM, level: Scalar, i: int, j: int, window: Window) -> HSeries:
    """[h_i(z), h_j(w)] from the two-variable kernel, on a (z, w) window."""
    level = to_scalar(level)
    a = gcm.a(i, j)
    order = window.hmax + 2
    wide = Window(window.bounds, window.hmin, order)
    kernel = KernelSum.of(
        IotaKernel.make(1, 0, [pair("z", "w", level, -2, large="z")]),
        IotaKernel.make(-1, 0, [pair("w", "z", level, -2, large="w")]),
    )
    series = expand(kernel, wide)
    for m in (a, level):
        series = op_make("qbracket", order, "w", m=m).apply(series)
    return series


def bracket_fidelity_check(data: HeisenbergData, gcm: GCM, space: FockSpace, fields: list[ModeField],
                           modes: int = 3, name: str = "heisenberg.bracket") -> dict[str, Any]:
    """Operator commutators [h_i(m), h_j(n)] on every basis vector against the kernel expansion."""
    window = Window.symmetric(("z", "w"), modes + 2 * space.N + 6, hmax=space.N)
    for i, j in gcm.pairs():
        kernel = bracket_kernel(gcm, data.level, i, j, window)
        for w in space.basis():
            for m in range(-modes, modes + 1):
                for n in range(-modes, modes + 1):
                    a, b = fields[i], fields[j]
                    lhs = a.mode(m, b.mode(n, w)) - b.mode(n, a.mode(m, w))
                    expected = space.zero
                    for h in range(space.N):
                        c = kernel.coefficient(h, {"z": -m - 1, "w": -n - 1})
                        if c:
                            expected += w * space.scalar(c, h)
                    if space.truncate(lhs - expected):
                        return check_result(
                            name, False, f"[h{gcm.labels[i]}({m}), h{gcm.labels[j]}({n})] differs",
                            {"vector": space.describe(w), "modes": [m, n],
                             "operator": space.describe(lhs), "kernel": space.describe(expected)},
                        )
    return check_result(name, True, f"mode brackets match the kernel for |m|,|n| ≤ {modes}",
                        vectors=len(space.basis()))


def classical_limit_check(gcm: GCM, level: Scalar, half_width: int = 4) -> dict[str, Any]:
    """At ħ = 0 the bracket kernel is a_ij·ℓ·∂_w δ(w/z)."""
    level = to_scalar(level)
    window = Window.symmetric(("z", "w"), half_width, hmax=1)
    for i, j in gcm.pairs():
        kernel = bracket_kernel(gcm, level, i, j, window)
        expected = delta("w", "z", 1, window).scale(gcm.a(i, j) * level)
        bad = kernel.difference_witness(expected)
        if bad is not None:
            return check_result(
                "heisenberg.classical_limit", False,
                f"ħ=0 bracket of h{gcm.labels[i]}, h{gcm.labels[j]} is not a_ij·ℓ·∂δ",
                {"pair": [gcm.labels[i], gcm.labels[j]], "term": kernel.format_key(bad)},
            )
    return check_result("heisenberg.classical_limit", True, "ħ=0 bracket is a_ij·ℓ·∂_w δ(w/z)")


def vacuum_check(space: FockSpace, fields: list[ModeField], modes: int = 4) -> dict[str, Any]:
    """a_m 1 = 0 for m ≥ 0, and a_{-1} 1 is the generator vector x_{i,1}."""
    for i, a in enumerate(fields):
        for m in range(modes + 1):
            out = a.mode(m, space.vacuum)
            if out:
                return check_result("heisenberg.vacuum", False, f"{a.name}({m})·1 ≠ 0",
                                    {"field": a.name, "mode": m, "value": space.describe(out)})
        created = a.mode(-1, space.vacuum)
        if created != space.gen(i, 1):
            return check_result("heisenberg.vacuum", False, f"{a.name}(-1)·1 is not the generator",
                                {"field": a.name, "mode": -1, "value": space.describe(created)})
    return check_result("heisenberg.vacuum", True, "annihilation modes kill 1; creation recovers generators")
