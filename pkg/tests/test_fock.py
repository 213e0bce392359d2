"""Tests for the Fock-space model: Heisenberg fields, Y_E products and exponential currents."""

from __future__ import annotations

import functools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from src.errors import ConfigError, OutOfWindowError, TruncationError
from src.fock.fields import (
    ExpField,
    IdentityField,
    ModeField,
    ProductField,
    ScaledField,
    SumField,
    YEProduct,
    find_k,
    plus_part,
    ye_product,
)
from src.fock.gcm import PRESETS
from src.fock.heisenberg import (
    bracket_fidelity_check,
    build_h_field,
    build_h_fields,
    classical_limit_check,
    derive_gamma,
    fock_space,
    gamma_check,
    log_pair_data,
    vacuum_check,
)
from src.fock.space import FockSpace, colored_partition_counts
from src.fock.vertex import (
    CommutatorRelation,
    ExchangeRelation,
    cartan_relation,
    ci_check,
    creation_exponent,
    exchange_bound,
    exchange_pair,
    exp_field,
    field_difference,
    restrictedness_check,
    s_jacobi_check,
    shift_part,
    split_pair,
    verify_exp_cal,
    verify_iterate,
    weak_assoc_check,
    weak_assoc_reach,
    ye_k_independence_check,
    zero_mode_formula_check,
)
from tests.strategies import small_fractions

F = Fraction
DEGREES = range(-2, 3)


@pytest.fixture(scope="module")
def a1():
    data = derive_gamma(PRESETS["A1"], 1, 2)
    space = fock_space(data, depth=2)
    return data, space, build_h_field(data, space, 0)


# ── Space ────────────────────────────────────────────────────


def test_fock_graded_dimensions_are_partition_numbers():
    space = FockSpace(("1",), N=2, depth=4)
    assert space.graded_dimensions() == [1, 1, 2, 3, 5]
    assert colored_partition_counts(1, 4) == [1, 1, 2, 3, 5]


def test_two_colored_dimensions():
    space = FockSpace(("1", "2"), N=1, depth=3)
    assert space.graded_dimensions() == colored_partition_counts(2, 3) == [1, 2, 5, 10]


def test_negative_hbar_power_is_not_representable():
    space = FockSpace(("1",), N=2, depth=1)
    with pytest.raises(OutOfWindowError):
        space.scalar(1, -1)


def test_divide_hbar_requires_divisibility():
    space = FockSpace(("1",), N=3, depth=1)
    v = space.gen(0, 1) * space.scalar(3, 2)
    assert space.divide_hbar(v, 2) == space.gen(0, 1) * space.scalar(3)
    with pytest.raises(OutOfWindowError):
        space.divide_hbar(space.gen(0, 1), 1)


def test_mode_outside_generator_range():
    space = FockSpace(("1",), N=1, depth=1, max_mode=3)
    with pytest.raises(OutOfWindowError):
        space.gen(0, 4)


# ── Heisenberg data ──────────────────────────────────────────


def test_gamma_matches_oracle():
    assert gamma_check(PRESETS["A1"], 1, 3)["status"] == "pass"
    assert gamma_check(PRESETS["A2"], F(1, 2), 3)["status"] == "pass"


def test_gamma_leading_term_is_classical():
    data = derive_gamma(PRESETS["A2"], 1, 2)
    # ħ^0 part of [h_i(1), h_j(-1)] is a_ij·ℓ
    assert data.mode_bracket(0, 1, 0, -1) == {0: F(2)}
    assert data.mode_bracket(0, 1, 1, -1) == {0: F(-1)}


def test_bracket_is_not_diagonal_in_modes():
    data = derive_gamma(PRESETS["A1"], 1, 2)
    assert data.mode_bracket(0, 2, 0, -1) == {1: F(-4)}
    assert data.mode_bracket(0, -1, 0, 2) == {1: F(4)}


def test_zero_mode_bracket_vanishes():
    data = derive_gamma(PRESETS["A1"], 1, 3)
    for n in range(-3, 4):
        assert data.mode_bracket(0, 0, 0, n) == {}


def test_h_field_on_vacuum(a1):
    data, space, h = a1
    assert h.mode(-1, space.vacuum) == space.gen(0, 1)
    for m in range(4):
        assert not h.mode(m, space.vacuum)
    assert h.mode(1, h.mode(-1, space.vacuum)) == space.scalar(2)


def test_bracket_fidelity(a1):
    data, space, _ = a1
    fields = build_h_fields(data, space)
    assert bracket_fidelity_check(data, PRESETS["A1"], space, fields, modes=2)["status"] == "pass"


def test_bracket_fidelity_two_nodes():
    gcm = PRESETS["A2"]
    data = derive_gamma(gcm, 1, 2)
    space = fock_space(data, depth=1)
    fields = build_h_fields(data, space)
    assert bracket_fidelity_check(data, gcm, space, fields, modes=1)["status"] == "pass"


def test_perturbed_gamma_fails_fidelity():
    gcm = PRESETS["A1"]
    data = derive_gamma(gcm, 1, 2).perturbed(0, 0, 3, 1)
    space = fock_space(data, depth=2)
    result = bracket_fidelity_check(data, gcm, space, build_h_fields(data, space), modes=2)
    assert result["status"] == "fail"
    assert result["witness"]["modes"]


def test_classical_limit():
    assert classical_limit_check(PRESETS["A2"], 1)["status"] == "pass"


def test_vacuum_property(a1):
    _, space, h = a1
    assert vacuum_check(space, [h])["status"] == "pass"


# ── Y_E products ─────────────────────────────────────────────


def test_identity_field_is_the_unit(a1):
    _, space, h = a1
    one = IdentityField(space)
    vectors = space.basis()
    assert field_difference(YEProduct(one, h, -1, 0), h, vectors, DEGREES) is None
    assert field_difference(YEProduct(one, h, 0, 2), ScaledField(h, 0), vectors, DEGREES) is None


def test_singular_part_of_h_with_itself(a1):
    _, space, h = a1
    vectors = space.basis()
    assert ye_product(h, h, 0, vectors, DEGREES).coefficient(0, space.vacuum) == space.zero
    assert ye_product(h, h, 1, vectors, DEGREES).coefficient(0, space.vacuum) == space.scalar(2)
    assert ye_product(h, h, 2, vectors, DEGREES).coefficient(0, space.vacuum) == space.scalar(-4, 1)


def test_ye_product_is_independent_of_k(a1):
    _, space, h = a1
    for n in (-1, 0, 1):
        result = ye_k_independence_check(h, h, n, space.basis(), DEGREES)
        assert result["status"] == "pass", result


def test_nonnegative_products_kill_vacuum(a1):
    _, space, h = a1
    for n in range(3):
        assert not ye_product(h, IdentityField(space), n, space.basis(), DEGREES).coefficient(0, space.vacuum)


# ── Zero-mode formula ────────────────────────────────────────


def test_zero_mode_formula_exchange_pair():
    space, a, b = exchange_pair(1, 0, N=2, depth=2)
    result = zero_mode_formula_check(a, b, 1, 0, space.basis(), DEGREES, rs=range(-2, 2))
    assert result["status"] == "pass", result


def test_zero_mode_formula_commuting_pair():
    space, a, b = exchange_pair(0, 0, N=2, depth=2)
    result = zero_mode_formula_check(a, b, 0, 0, space.basis(), DEGREES, rs=range(-2, 2))
    assert result["status"] == "pass", result


def test_zero_mode_wrong_relation_is_a_precondition_failure():
    space, a, b = exchange_pair(1, 0, N=2, depth=2)
    result = zero_mode_formula_check(a, b, 2, 0, space.basis(), DEGREES, rs=range(-2, 2))
    assert result["status"] == "precondition-failed"


def test_zero_mode_with_perturbed_gamma_is_caught():
    data = log_pair_data(1, 0, 2).perturbed(0, 0, 2, 0)
    space, a, b = exchange_pair(1, 0, N=2, depth=2, data=data)
    result = zero_mode_formula_check(a, b, 1, 0, space.basis(), DEGREES, rs=range(-2, 2))
    assert result["status"] != "pass"
    assert result["message"]


# ── Exponential fields ───────────────────────────────────────


def test_e_minus_of_negated_field_on_vacuum(a1):
    _, space, h = a1
    out = exp_field(ScaledField(h, -1), -2, -1).apply(space.vacuum)
    assert out == space.vacuum + space.gen(0, 1) * space.scalar(2, 1)


def test_e_plus_fixes_vacuum(a1):
    _, space, h = a1
    assert exp_field(h, 1, 1).apply(space.vacuum) == space.vacuum


def test_zero_point_is_identity(a1):
    _, space, h = a1
    for w in space.basis():
        assert exp_field(h, 0, 1).apply(w) == w
        assert exp_field(h, 0, -1).apply(w) == w


def test_e_plus_needs_hbar_divisibility(a1):
    _, space, h = a1
    with pytest.raises(TruncationError):
        exp_field(h, 1, 1).apply(space.gen(0, 1))


def test_point_and_field_exponentials_agree(a1):
    _, space, h = a1
    field = ExpField(creation_exponent(h, 3))
    assert field.coefficient(0, space.vacuum) == exp_field(h, 3, -1).apply(space.vacuum)


def test_exp_of_unbounded_creation_part_does_not_terminate(a1):
    _, space, h = a1
    with pytest.raises(TruncationError):
        ExpField(plus_part(h)).coefficient(0, space.vacuum)


# ── Exponential calculus ─────────────────────────────────────


@pytest.fixture(scope="module")
def a1a1():
    data = derive_gamma(PRESETS["A1xA1"], 1, 3)
    return data, fock_space(data, depth=2)


def test_exp_cal_single_node(a1a1):
    data, space = a1a1
    alpha, beta, gamma = split_pair(data, space, 0)
    result = verify_exp_cal(alpha, beta, gamma, space.basis(1), DEGREES)
    assert result["status"] == "pass", result
    assert result["energy"] == "0"


def test_exp_cal_with_constant_contraction(a1a1):
    data, space = a1a1
    alpha, beta, gamma = split_pair(data, space, 0, 1)
    assert gamma[(0, 2)] == 2
    result = verify_exp_cal(alpha, beta, gamma, space.basis(1), DEGREES)
    assert result["status"] == "pass", result


def test_exp_cal_with_zero_beta(a1a1):
    data, space = a1a1
    alpha, beta, _ = split_pair(data, space, 0)
    result = verify_exp_cal(alpha, ScaledField(beta, 0), {}, space.basis(1), DEGREES)
    assert result["status"] == "pass", result


def test_exp_cal_rejects_non_central_contraction():
    data = derive_gamma(PRESETS["A2"], 1, 3)
    space = fock_space(data, depth=1)
    alpha, beta, gamma = split_pair(data, space, 0, 1)
    result = verify_exp_cal(alpha, beta, gamma, space.basis(), DEGREES)
    assert result["status"] == "precondition-failed"


# ── Iterate formula ──────────────────────────────────────────


@pytest.mark.parametrize("c", [-2, 0, 1])
def test_iterate_formula(a1, c):
    data, space, _ = a1
    result = verify_iterate(data, space, 0, c, space.basis(), DEGREES)
    assert result["status"] == "pass", result


def test_ci_explicit_expression(a1):
    data, space, _ = a1
    result = ci_check(data, space, 0, space.basis(), DEGREES)
    assert result["status"] == "pass", result


def test_ci_at_other_level():
    data = derive_gamma(PRESETS["A1"], 2, 2)
    space = fock_space(data, depth=1)
    assert ci_check(data, space, 0, space.basis(), DEGREES)["status"] == "pass"


# ── Weak associativity, S-Jacobi, restrictedness ─────────────


def test_weak_associativity_for_h(a1):
    _, space, h = a1
    result = weak_assoc_check(h, h, space.basis(1), order=2, lmax=4)
    assert result["status"] == "pass", result
    assert result["l"] == 3


def test_weak_associativity_at_order_three():
    data = derive_gamma(PRESETS["A1"], 1, 3)
    space = fock_space(data, depth=1, max_mode=weak_assoc_reach(1, kmax=6))
    h = build_h_field(data, space, 0)
    result = weak_assoc_check(h, h, space.basis(1), order=3, lmax=8, kmax=6)
    assert result["status"] == "pass", result


def test_weak_associativity_with_unit(a1):
    _, space, h = a1
    result = weak_assoc_check(h, IdentityField(space), [space.vacuum], order=2)
    assert result["status"] == "pass"
    assert result["l"] == 0


def test_s_jacobi_for_cartan_pair(a1):
    data, space, h = a1
    shift = shift_part(data, 0, 0)
    assert all(p % 2 for p, _ in shift)
    result = s_jacobi_check(h, h, shift, space.basis(), range(-3, 2), range(-4, 3))
    assert result["status"] == "pass", result


def test_s_jacobi_without_shift_fails(a1):
    data, space, h = a1
    result = s_jacobi_check(h, h, {}, space.basis(), range(-3, 2), range(-4, 3))
    assert result["status"] == "fail"


def test_restrictedness_for_cartan_pair(a1):
    data, space, h = a1
    relation = cartan_relation(PRESETS["A1"], data.level, 0, 0, half_width=20, N=space.N)
    result = restrictedness_check(h, h, space.basis(), relation, range(-2, 3))
    assert result["status"] == "pass", result


def test_restrictedness_with_unit(a1):
    _, space, h = a1
    result = restrictedness_check(h, IdentityField(space), space.basis(), CommutatorRelation())
    assert result["status"] == "pass", result


def test_restrictedness_exchange_variant():
    space, a, b = exchange_pair(1, 0, N=2, depth=1)
    relation = ExchangeRelation(p={(1, 0): F(1), (0, 1): F(1)}, q={(1, 0): F(-1)})
    result = restrictedness_check(a, b, space.basis(), relation, range(-2, 2))
    assert result["status"] == "pass", result


def test_restrictedness_wrong_relation():
    space, a, b = exchange_pair(1, 0, N=2, depth=1)
    relation = ExchangeRelation(p={(1, 0): F(1)}, q={(1, 0): F(-1)})
    result = restrictedness_check(a, b, space.basis(), relation, range(-2, 2))
    assert result["status"] == "precondition-failed"


def test_restrictedness_bound_comes_from_the_exchange_relation():
    space = FockSpace(("1",), N=1, depth=1)

    def creation(m, monom):
        return space.gen(0, -m) * space.vector(monom) if m < 0 else space.zero

    def skewed(m, monom):
        # an extra x^{-6} term, only on excited vectors
        out = creation(m, monom)
        if m == 5 and space.weight(monom):
            out += space.vector(monom)
        return out

    b = ModeField("c", space, creation, lambda monom: 0)
    a = ModeField("c~", space, skewed, lambda monom: -6 if space.weight(monom) else 0)
    relation = ExchangeRelation(p={(1, 0): F(1)}, q={(1, 0): F(-1)})
    assert exchange_bound(b, b, relation, -3, space.vacuum) == -3
    assert restrictedness_check(b, b, [space.vacuum], relation, [-3])["status"] == "pass"
    result = restrictedness_check(a, b, [space.vacuum], relation, [-3])
    assert result["status"] == "fail"
    assert result["witness"]["degree"] == -6


def test_unbounded_product_is_rejected(a1):
    _, _, h = a1
    with pytest.raises(OutOfWindowError):
        ProductField(h, h)


def test_fock_space_rejects_zero_order():
    with pytest.raises(ConfigError):
        FockSpace(("1",), N=0, depth=1)


# ── Properties ───────────────────────────────────────────────


@functools.cache
def _a2_fields():
    data = derive_gamma(PRESETS["A2"], 1, 2)
    space = fock_space(data, depth=1, max_mode=weak_assoc_reach(1, kmax=8))
    return space, (*build_h_fields(data, space), IdentityField(space))


def _combination(coefficients) -> SumField:
    _, fields = _a2_fields()
    return SumField(*(ScaledField(f, c) for f, c in zip(fields, coefficients)))


field_coefficients = st.tuples(small_fractions, small_fractions, small_fractions)


@settings(max_examples=200, derandomize=True, deadline=None)
@given(field_coefficients, field_coefficients, st.integers(min_value=-2, max_value=2),
       st.integers(min_value=1, max_value=3))
def test_ye_product_is_independent_of_any_valid_k(left, right, n, extra):
    space, _ = _a2_fields()
    a, b = _combination(left), _combination(right)
    vectors = space.basis()
    k = find_k(a, b, vectors, DEGREES, n)
    assert field_difference(YEProduct(a, b, n, k), YEProduct(a, b, n, k + extra), vectors, DEGREES) is None
