"""Tests for symbolic kernels, their expansions and the identity catalog."""

from __future__ import annotations

from fractions import Fraction

import pytest

from src.errors import ConfigError, KernelError
from src.kernels.catalog import CATALOG, identity_catalog
from src.kernels.expand import expand
from src.kernels.factors import IotaKernel, KernelSum, pair, single
from src.kernels.identity import directions_coherent, rational_identity_check
from src.kernels.logkernels import log_ratio, log_series
from src.series.hseries import HSeries
from src.series.window import Window

F = Fraction


def kernel(*factors, scale=1, hpow=0) -> IotaKernel:
    return IotaKernel.make(scale, hpow, factors)


# ── Factors and canonical form ───────────────────────────────


def test_pair_orientation_flips_sign():
    # canonical pairs put the alphabetically smaller variable on the left
    k = kernel(pair("z", "w", 1, 1))
    assert k.scale == -1
    assert k.factors[0].left == "w" and k.factors[0].shift == -1


def test_equal_bases_merge_and_cancel():
    k = kernel(pair("z", "w", 2, 1), pair("z", "w", 2, -1))
    assert k.factors == ()


def test_mixed_directions_lose_direction():
    k = kernel(pair("z", "w", 0, -1, large="z")) * kernel(pair("z", "w", 0, -1, large="w"))
    assert not k.directed


def test_substitute_folds_constant():
    k = kernel(pair("z", "w", 1, 1), pair("z", "w", -1, -1))
    assert k.substitute("z", "w", 2) == IotaKernel.constant(3)


def test_substitute_hitting_pole_raises():
    with pytest.raises(KernelError):
        kernel(pair("z", "w", -1, -1)).substitute("z", "w", 1)


def test_degenerate_factor_rejected():
    with pytest.raises(KernelError):
        pair("z", "z")


# ── Expansion ────────────────────────────────────────────────


def test_geometric_expansion(zw_window):
    s = expand(kernel(pair("z", "w", 0, -1)), zw_window)
    assert s.coefficient(0, {"z": -1, "w": 0}) == 1
    assert s.coefficient(0, {"z": -3, "w": 2}) == 1
    assert s.coefficient(0, {"z": 1, "w": -2}) == 0


def test_hbar_binomial_expansion():
    window = Window.symmetric(("z", "w"), 5, hmax=2)
    lhs = expand(kernel(pair("z", "w", 2, -1)), window)
    rhs = expand(
        KernelSum.of(kernel(pair("z", "w", 0, -1)), kernel(pair("z", "w", 0, -2), scale=-2, hpow=1)),
        window,
    )
    assert lhs.difference_witness(rhs) is None


def test_directions_differ_by_delta():
    assert identity_catalog("delta_shifted", c=2)["status"] == "pass"
    assert identity_catalog("delta_decomp", j=1)["status"] == "pass"


def test_derivative_of_simple_pole(zw_window):
    first = expand(kernel(pair("z", "w", 0, -1)), zw_window).derive("w")
    second = expand(kernel(pair("z", "w", 0, -2)), zw_window)
    assert first.difference_witness(second) is None


def test_single_variable_pole():
    window = Window.of({"x": (-6, 2)}, hmax=3)
    s = expand(kernel(single("x", -1, -1)), window)
    # (x - ħ)^{-1} = x^{-1} + ħx^{-2} + ħ²x^{-3}
    assert [s.coefficient(k, {"x": -1 - k}) for k in range(3)] == [1, 1, 1]


def test_polynomial_kernel_is_direction_free(zw_window):
    k = kernel(pair("z", "w", 1, 2))
    assert expand(k, zw_window).difference_witness(
        expand(k.with_direction(("w", "z")), zw_window)
    ) is None


def test_undirected_kernel_refuses_expansion(zw_window):
    k = kernel(pair("z", "w", 0, -1, large="z")) * kernel(pair("z", "w", 0, -1, large="w"))
    with pytest.raises(KernelError):
        expand(k, zw_window)


def test_expansion_commutes_with_products():
    window = Window.symmetric(("z", "w"), 4, hmax=3)
    a = kernel(pair("z", "w", 1, -1))
    b = kernel(pair("z", "w", -1, 1))
    together = expand(a * b, window)
    apart = expand(a, window) * expand(b, window)
    assert together.difference_witness(apart) is None


# ── Rational identities ──────────────────────────────────────


@pytest.mark.parametrize("which", [1, 2])
def test_serre_kernel_identities(which):
    result = identity_catalog("serre_kernel", which=which)
    assert result["status"] == "pass"
    assert result["residual"] == "0"


def test_trivial_identity():
    assert rational_identity_check(1, 1)["status"] == "pass"


def test_failed_identity_has_witness():
    result = rational_identity_check(kernel(pair("z", "w", 1, 1)), kernel(pair("z", "w", 0, 1)))
    assert result["status"] == "fail"
    assert result["witness"]["monomial"] == {"hbar": 1}


def test_directions_coherence_flag():
    zw = KernelSum.of(kernel(pair("z", "w", 0, -1, large="z")))
    wz = KernelSum.of(kernel(pair("z", "w", 0, -1, large="w")))
    assert directions_coherent(zw, zw)
    assert not directions_coherent(zw, wz)


# ── Log kernels ──────────────────────────────────────────────


def test_log_ratio_matches_log1p():
    window = Window.of({"x": (-8, -1)}, hmax=5)
    ratio = kernel(single("x", 1, 1), single("x", -1, -1))
    by_kernels = log_series(ratio, window)
    up = HSeries.monomial(1, 1, {"x": -1}, window).log1p()
    down = HSeries.monomial(-1, 1, {"x": -1}, window).log1p()
    assert by_kernels.difference_witness(up - down) is None


def test_log_of_one_is_zero():
    assert log_ratio(IotaKernel.one(), 4).is_zero


def test_log_needs_constant_term_one():
    with pytest.raises(KernelError):
        log_ratio(kernel(pair("z", "w", 1, 1), pair("z", "w", 0, -1), scale=2), 4)
    with pytest.raises(KernelError):
        log_ratio(kernel(pair("z", "w", 1, 1)), 4)


# ── Catalog ──────────────────────────────────────────────────


@pytest.mark.parametrize("m", [-1, 0, 1, 2])
def test_log_two_terms(m):
    assert identity_catalog("log_two_terms", m=m)["status"] == "pass"


def test_log_two_terms_leading_terms():
    result = identity_catalog("log_two_terms", m=1)
    assert result["leading_terms"] == ["2·ħ^1·x^-1", "2/3·ħ^3·x^-3"]


@pytest.mark.parametrize("m, kappa", [(2, 1), (2, 3), (-1, 2)])
def test_log_four_terms(m, kappa):
    assert identity_catalog("log_four_terms", m=m, kappa=kappa, N=6)["status"] == "pass"


@pytest.mark.parametrize("b", [-2, -1, 1, 2])
def test_sing_res_fact_seeded(b):
    for seed in range(20):
        result = identity_catalog("sing_res_fact", b=b, seed=seed, N=5)
        assert result["status"] == "pass", (seed, result["witness"])


@pytest.mark.parametrize("name", ["GL_relation", "F_G_inverse", "G_bracket", "sing_simple_pole"])
def test_operator_and_residue_entries(name):
    assert identity_catalog(name)["status"] == "pass"


@pytest.mark.parametrize("level", [1, 2, F(3, 2)])
def test_gql_level(level):
    assert identity_catalog("GqL_level", level=level)["status"] == "pass"


@pytest.mark.parametrize("j", [0, 1, 2])
def test_delta_decomp(j):
    assert identity_catalog("delta_decomp", j=j)["status"] == "pass"


def test_catalog_echoes_params_and_anchor():
    result = identity_catalog("log_two_terms", m=2)
    assert result["params"]["m"] == "2"
    assert result["anchor"] == CATALOG["log_two_terms"].anchor
    assert result["max_degree"] == 5


def test_unsupported_parameter_rejected():
    with pytest.raises(ConfigError):
        identity_catalog("log_two_terms", m=3)
    with pytest.raises(ConfigError):
        identity_catalog("no_such_identity")
