"""
Identity Catalog — displayed formula identities as evaluable entries.

Each entry is data: a name, an anchor key, a builder and its default
parameters. Builders return a result dict in the shared check shape, with
the parameters echoed and the highest ħ-order that was compared.

Identities whose two sides are different ι-expansions of the same
rational function are never compared raw; their entry states the
δ-supported difference that is being asserted instead.
"""

from __future__ import annotations

import logging
import random
from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from src.errors import ConfigError, check_result, guarded
from src.kernels.expand import expand
from src.kernels.factors import IotaKernel, KernelSum, pair, single
from src.kernels.identity import rational_identity_check
from src.series.hseries import HSeries, delta
from src.series.operators import identity, op_make
from src.series.window import Window

logger = logging.getLogger(__name__)

F = Fraction


# ── Helpers ──────────────────────────────────────────────────


def _series_result(name: str, lhs: HSeries, rhs: HSeries, message: str,
                   **extra: Any) -> dict[str, Any]:
    key = lhs.difference_witness(rhs)
    if key is None:
        return check_result(name, True, message, **extra)
    witness = {
        "term": lhs.format_key(key),
        "lhs": str(lhs.terms.get(key, F(0))),
        "rhs": str(rhs.terms.get(key, F(0))),
    }
    return check_result(name, False, f"coefficients differ at {witness['term']}", witness, **extra)


def _operator_result(name: str, lhs, rhs, message: str, **extra: Any) -> dict[str, Any]:
    key = lhs.difference_witness(rhs)
    if key is None:
        return check_result(name, True, message, **extra)
    k, d = key
    witness = {
        "term": f"ħ^{k}∂^{d}",
        "lhs": str(lhs.table.get(k, {}).get(d, F(0))),
        "rhs": str(rhs.table.get(k, {}).get(d, F(0))),
    }
    return check_result(name, False, f"operators differ at {witness['term']}", witness, **extra)


def _leading_terms(s: HSeries, count: int = 2) -> list[str]:
    keys = sorted(s.terms, key=lambda k: (k[0], [-e for e in k[1]]))
    return [f"{s.terms[k]}·{s.format_key(k)}" for k in keys[:count]]


def random_polynomial(seed: int, var: str, degree: int = 4, hdegree: int = 2) -> dict[tuple[int, int], F]:
    """Seeded {(ħ-power, degree): coefficient} table of a polynomial F(var, ħ)."""
    rng = random.Random(seed)
    table: dict[tuple[int, int], F] = {}
    for j in range(degree + 1):
        for k in range(hdegree + 1):
            if rng.random() < 0.6:
                table[(k, j)] = F(rng.randint(-5, 5), rng.randint(1, 3))
    return {key: c for key, c in table.items() if c}


def _evaluated(table: dict[tuple[int, int], F], b: F, window: Window) -> HSeries:
    """F(bħ, ħ) as a constant series."""
    terms: dict[int, F] = {}
    for (k, j), c in table.items():
        terms[k + j] = terms.get(k + j, F(0)) + c * b ** j
    zeros = tuple(0 for _ in window.vars)
    return HSeries.polynomial({(h, zeros): c for h, c in terms.items()}, window)


# ── Builders ─────────────────────────────────────────────────


def log_two_terms(m: Any = 1, N: int = 6, lo: int = -8, hi: int = -1) -> dict[str, Any]:
    """log((x+mħ)/(x-mħ)) = G(∂)[m]_{q^∂} x^{-1}."""
    m = F(m)
    window = Window.of({"x": (lo, hi)}, hmax=N)
    up = HSeries.monomial(m, 1, {"x": -1}, window).log1p()
    down = HSeries.monomial(-m, 1, {"x": -1}, window).log1p()
    lhs = up - down
    op = op_make("G", N).compose(op_make("qbracket", N, m=m))
    rhs = op.apply(HSeries.monomial(1, 0, {"x": -1}, window))
    return _series_result(
        "log_two_terms", lhs, rhs, "log of the two-term ratio matches G·[m] applied to x^-1",
        max_degree=N - 1, leading_terms=_leading_terms(lhs),
    )


def log_four_terms(m: Any = 2, kappa: Any = 1, N: int = 6, lo: int = -8,
                   hi: int = -1) -> dict[str, Any]:
    """log[(x-(m+κ)ħ)(x+(m+κ)ħ) / ((x+(m-κ)ħ)(x-(m-κ)ħ))] = -G G [m][κ] x^{-2}."""
    m, kappa = F(m), F(kappa)
    a, b = m + kappa, m - kappa
    window = Window.of({"x": (lo, hi)}, hmax=N)

    def log_factor(c: F) -> HSeries:
        return HSeries.monomial(c, 1, {"x": -1}, window).log1p()

    lhs = log_factor(-a) + log_factor(a) - log_factor(b) - log_factor(-b)
    op = (
        op_make("G", N) @ op_make("G", N)
        @ op_make("qbracket", N, m=m) @ op_make("qbracket", N, m=kappa)
    )
    rhs = (-op).apply(HSeries.monomial(1, 0, {"x": -2}, window))
    return _series_result(
        "log_four_terms", lhs, rhs, "log of the four-factor kernel matches -G·G·[m]·[κ] applied to x^-2",
        max_degree=N - 1,
    )


def sing_res_fact(b: Any = 1, seed: int = 0, N: int = 5, degree: int = 4) -> dict[str, Any]:
    """Sing_x (x-bħ)^{-1}F = (x-bħ)^{-1}F(bħ,ħ) and Res_x (x-bħ)^{-1}F = F(bħ,ħ)."""
    b = F(b)
    window = Window.of({"x": (-8, 8)}, hmax=N)
    table = random_polynomial(seed, "x", degree)
    poly = HSeries.polynomial({(k, (j,)): c for (k, j), c in table.items()}, window)
    pole = expand(IotaKernel.make(1, 0, [single("x", -b, -1)]), window)
    product = pole * poly

    value = _evaluated(table, b, window)
    sing = _series_result("sing_res_fact", product.sing_part("x"), pole * value,
                          "singular part factors through F(bħ,ħ)")
    if sing["status"] != "pass":
        return {**sing, "max_degree": N - 1, "seed": seed}

    scalar = Window.of({}, hmax=N)
    res = _series_result("sing_res_fact", product.residue("x"), _evaluated(table, b, scalar),
                         "singular part and residue factor through F(bħ,ħ)")
    return {**res, "max_degree": N - 1, "seed": seed}


def sing_simple_pole(mu: Any = 1, seed: int = 0, N: int = 4) -> dict[str, Any]:
    """(z-μħ)A(z) regular implies Sing_z A(z) = u(0)(z-μħ)^{-1} with u(0) = Res_z A."""
    mu = F(mu)
    window = Window.of({"z": (-8, 8)}, hmax=N)
    table = random_polynomial(seed, "z", 3)
    regular = HSeries.polynomial({(k, (j,)): c for (k, j), c in table.items()}, window)
    pole = expand(IotaKernel.make(1, 0, [single("z", -mu, -1)]), window)
    a = pole * regular
    u0 = a.residue("z").extend(window)
    return _series_result(
        "sing_simple_pole", a.sing_part("z"), pole * u0,
        "singular part is u(0)·(z-μħ)^-1", max_degree=N - 1, seed=seed,
    )


def delta_decomp(j: int = 0, half: int = 5, N: int = 3) -> dict[str, Any]:
    """ι_{z,w}(z-w)^{-j-1} - ι_{w,z}(z-w)^{-j-1} = (1/j!)∂_w^j z^{-1}δ(w/z)."""
    window = Window.symmetric(("z", "w"), half, hmax=N)
    zw = expand(IotaKernel.make(1, 0, [pair("z", "w", 0, -j - 1, large="z")]), window)
    wz = expand(IotaKernel.make(1, 0, [pair("z", "w", 0, -j - 1, large="w")]), window)
    return _series_result(
        "delta_decomp", zw - wz, delta("w", "z", j, window),
        "difference of the two expansions is the j-th δ derivative", max_degree=N - 1,
    )


def delta_shifted(c: Any = 1, half: int = 5, N: int = 3) -> dict[str, Any]:
    """ι_{z,w}(z-w+cħ)^{-1} - ι_{w,z}(z-w+cħ)^{-1} = z^{-1}δ((w-cħ)/z)."""
    c = F(c)
    window = Window.symmetric(("z", "w"), half, hmax=N)
    zw = expand(IotaKernel.make(1, 0, [pair("z", "w", c, -1, large="z")]), window)
    wz = expand(IotaKernel.make(1, 0, [pair("z", "w", c, -1, large="w")]), window)
    shifted = delta("w", "z", 0, window).shift("w", -c)
    return _series_result(
        "delta_shifted", zw - wz, shifted,
        "difference of the two expansions is the shifted δ", max_degree=N - 1,
    )


def gl_relation(N: int = 6) -> dict[str, Any]:
    """-G(∂)q^{-∂} = -2ħL(-2ħ∂)."""
    lhs = -(op_make("G", N) @ op_make("qpow", N, c=-1))
    rhs = op_make("L", N, c=-2).scale(-2, 1)
    return _operator_result("GL_relation", lhs, rhs, "-G·q^-1 equals -2ħ·L(-2ħ∂)", max_degree=N - 1)


def gql_level(level: Any = 1, N: int = 6) -> dict[str, Any]:
    """G(∂)q^{-ℓ∂} = 2ħL(-2ħ∂)q^{(1-ℓ)∂}."""
    level = F(level)
    lhs = op_make("G", N) @ op_make("qpow", N, c=-level)
    rhs = op_make("L", N, c=-2).scale(2, 1) @ op_make("qpow", N, c=1 - level)
    return _operator_result("GqL_level", lhs, rhs, "G·q^-ℓ equals 2ħ·L(-2ħ∂)·q^(1-ℓ)", max_degree=N - 1)


def f_g_inverse(N: int = 6) -> dict[str, Any]:
    """F(∂)G(∂) = 1."""
    return _operator_result(
        "F_G_inverse", op_make("F", N) @ op_make("G", N + 1), identity(N),
        "F·G is the identity", max_degree=N - 1,
    )


def g_bracket(m: Any = 2, N: int = 6) -> dict[str, Any]:
    """G(∂)[m]_{q^∂} = G_m(∂), the G series in mħ."""
    m = F(m)
    return _operator_result(
        "G_bracket", op_make("G", N) @ op_make("qbracket", N, m=m), op_make("Gm", N, m=m),
        "G·[m] equals G_m", max_degree=N - 1,
    )


def serre_kernel(which: int = 1) -> dict[str, Any]:
    """The two rational identities used to collapse the Serre sum."""
    h = 1
    k1 = IotaKernel.make(1, 0, [pair("w", "z1", h, 1), pair("w", "z1", -h, -1)])
    k2 = IotaKernel.make(1, 0, [pair("w", "z2", h, 1), pair("w", "z2", -h, -1)])
    if which == 1:
        lhs = KernelSum.of(k1 * k2, k1 * -2, IotaKernel.one())
        rhs = IotaKernel.make(2, 1, [
            pair("z2", "z1", 2, 1), pair("w", "z1", -1, -1), pair("w", "z2", -1, -1),
        ])
    else:
        lhs = KernelSum.of(k2, IotaKernel.constant(-2))
        rhs = IotaKernel.make(1, 0, [pair("z2", "w", 3, 1), pair("w", "z2", -1, -1)])
    result = rational_identity_check(lhs, rhs, name="serre_kernel")
    return {**result, "identity": which}


# ── Registry ─────────────────────────────────────────────────


@dataclass(frozen=True)
class CatalogEntry:
    """A named identity: anchor key, builder, defaults and supported values."""

    name: str
    anchor: str
    builder: Callable[..., dict[str, Any]]
    defaults: dict[str, Any] = field(default_factory=dict)
    choices: dict[str, tuple[Any, ...]] = field(default_factory=dict)

    def evaluate(self, **params: Any) -> dict[str, Any]:
        unknown = set(params) - set(self.defaults)
        if unknown:
            raise ConfigError(f"{self.name}: unknown parameters {sorted(unknown)}")
        merged = {**self.defaults, **params}
        for key, allowed in self.choices.items():
            if F(merged[key]) not in {F(a) for a in allowed}:
                raise ConfigError(
                    f"{self.name}: {key}={merged[key]} unsupported; expected one of {list(allowed)}"
                )
        logger.debug("catalog %s %s", self.name, merged)
        result = guarded(self.name, lambda: self.builder(**merged))
        return {**result, "anchor": self.anchor, "params": {k: str(v) for k, v in merged.items()}}


CATALOG: dict[str, CatalogEntry] = {
    e.name: e
    for e in (
        CatalogEntry("log_two_terms", "log-two-terms", log_two_terms,
                     {"m": 1, "N": 6, "lo": -8, "hi": -1}, {"m": (-1, 0, 1, 2)}),
        CatalogEntry("log_four_terms", "log-four-terms", log_four_terms,
                     {"m": 2, "kappa": 1, "N": 6, "lo": -8, "hi": -1}, {"m": (-1, 0, 1, 2)}),
        CatalogEntry("sing_res_fact", "sing-res-fact", sing_res_fact,
                     {"b": 1, "seed": 0, "N": 5, "degree": 4}),
        CatalogEntry("sing_simple_pole", "sing-simple", sing_simple_pole,
                     {"mu": 1, "seed": 0, "N": 4}),
        CatalogEntry("GL_relation", "gl-relation", gl_relation, {"N": 6}),
        CatalogEntry("GqL_level", "gql-level", gql_level, {"level": 1, "N": 6}),
        CatalogEntry("serre_kernel", "serre-kernel", serre_kernel, {"which": 1}, {"which": (1, 2)}),
        CatalogEntry("delta_decomp", "delta-decomp", delta_decomp,
                     {"j": 0, "half": 5, "N": 3}, {"j": (0, 1, 2, 3)}),
        CatalogEntry("delta_shifted", "delta-shifted", delta_shifted, {"c": 1, "half": 5, "N": 3}),
        CatalogEntry("F_G_inverse", "f-g-inverse", f_g_inverse, {"N": 6}),
        CatalogEntry("G_bracket", "g-bracket", g_bracket, {"m": 2, "N": 6}),
    )
}


def identity_catalog(name: str, **params: Any) -> dict[str, Any]:
    """Evaluate one catalog entry by name."""
    entry = CATALOG.get(name)
    if entry is None:
        raise ConfigError(f"unknown catalog entry {name!r}; known: {', '.join(sorted(CATALOG))}")
    return entry.evaluate(**params)
