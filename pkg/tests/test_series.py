"""Tests for the windowed ħ-adic series engine."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from src.errors import TruncationError, WindowError
from src.series import codec
from src.series.hseries import HSeries, delta, exp0, log1p, residue, shift
from src.series.operators import identity, op_make
from src.series.window import Window, window_after
from tests.strategies import laurent_terms, small_fractions

F = Fraction


def inverse_shifted(var: str, c, window: Window) -> HSeries:
    """ι_var (var - cħ)^{-1} truncated below ħ^hmax."""
    terms = {}
    for k in range(window.hmax):
        exps = tuple(-k - 1 if v == var else 0 for v in window.vars)
        terms[(k, exps)] = F(c) ** k
    return HSeries.polynomial(terms, window)


# ── add / mul ────────────────────────────────────────────────


def test_add_additive_inverse():
    w = Window.of({"z": (-3, 3)}, hmax=3)
    a = HSeries.monomial(2, 1, {"z": -1}, w)
    assert (a + a.scale(-1)).is_zero()


def test_add_polynomials(zw_window):
    z = HSeries.monomial(1, 0, {"z": 1}, zw_window)
    w = HSeries.monomial(1, 0, {"w": 1}, zw_window)
    total = (z + w) + (z - w)
    assert total.terms == {(0, (1, 0)): 2}


def test_add_intersects_windows():
    a = HSeries.zero(Window.of({"z": (-3, 3)}, hmax=3))
    b = HSeries.zero(Window.of({"z": (-5, 2)}, hmax=3))
    assert (a + b).window.interval("z") == (-3, 2)


def test_add_rejects_mismatched_variables(zw_window):
    with pytest.raises(WindowError):
        HSeries.zero(zw_window) + HSeries.zero(Window.of({"z": (-5, 5)}, hmax=3))


def test_mul_inverse_monomials():
    w = Window.of({"z": (-4, 4)}, hmax=2)
    product = HSeries.monomial(1, 0, {"z": -1}, w) * HSeries.monomial(1, 0, {"z": 1}, w)
    assert product.terms == {(0, (0,)): 1}


def test_mul_telescoping_geometric_series():
    window = Window.symmetric(("z", "w"), 6, hmax=1)
    geometric = HSeries.polynomial({(0, (-n - 1, n)): 1 for n in range(8)}, window)
    difference = HSeries.polynomial({(0, (1, 0)): 1, (0, (0, 1)): -1}, window)
    product = geometric * difference
    assert product.terms == {(0, (0, 0)): 1}
    assert not product.window.is_empty


def test_mul_geometric_inverse_mod_hbar_cubed():
    w = Window.of({"z": (-5, 5)}, hmax=3)
    a = HSeries.polynomial({(0, (0,)): 1, (1, (-1,)): 1}, w)
    b = HSeries.polynomial({(0, (0,)): 1, (1, (-1,)): -1, (2, (-2,)): 1}, w)
    product = a * b
    assert product.window.hmax == 3
    assert product.terms == {(0, (0,)): 1}


# ── window algebra ───────────────────────────────────────────


def test_window_after_derive():
    w = Window.of({"z": (-5, 5)}, hmax=3)
    assert window_after("derive", [w], var="z").interval("z") == (-6, 4)


def test_window_after_mul_by_quadratic_polynomial():
    w = Window.symmetric(("z", "w"), 6, hmax=3)
    quadratic = {"z": (0, 2), "w": (0, 2)}
    out = window_after("mul", [w, w], [None, quadratic])
    assert out.interval("z") == (-4, 6)
    assert out.interval("w") == (-4, 6)


def test_window_after_shift_keeps_hbar_and_variable_window():
    w = Window.of({"z": (-5, 5)}, hmax=4)
    out = window_after("shift", [w], [{"z": (-1, -1)}], var="z")
    assert (out.hmin, out.hmax) == (0, 4)
    assert out.interval("z") == (-5, 5)


def test_window_after_residue_without_minus_one_is_empty():
    w = Window.of({"z": (0, 5), "w": (-2, 2)}, hmax=2)
    assert window_after("residue", [w], var="z").is_empty


# ── calculus ─────────────────────────────────────────────────


def test_derive_monomial_and_constant():
    w = Window.of({"z": (-5, 5)}, hmax=2)
    assert HSeries.monomial(1, 0, {"z": -1}, w).derive("z").terms == {(0, (-2,)): -1}
    assert HSeries.constant(7, w).derive("z").is_zero()


def test_derive_unknown_variable():
    w = Window.of({"z": (-5, 5)}, hmax=2)
    with pytest.raises(WindowError):
        HSeries.constant(1, w).derive("w")


def test_shift_inverse_monomial():
    w = Window.of({"z": (-5, 5)}, hmax=3)
    out = shift(HSeries.monomial(1, 0, {"z": -1}, w), "z", 1)
    assert out.terms == {(0, (-1,)): 1, (1, (-2,)): -1, (2, (-3,)): 1}


def test_shift_by_zero_is_identity(zw_window):
    a = HSeries.polynomial({(0, (1, -2)): 3, (1, (0, 1)): F(1, 2)}, zw_window)
    assert shift(a, "z", 0) == a


def test_shift_inverse_pair():
    w = Window.of({"z": (-5, 5)}, hmax=3)
    a = HSeries.polynomial({(0, (-1,)): 1, (1, (2,)): 5}, w)
    assert shift(shift(a, "z", 1), "z", -1) == a


def test_shift_by_hbar_free_amount_rejected():
    w = Window.of({"z": (-5, 5)}, hmax=3)
    with pytest.raises(TruncationError):
        HSeries.constant(1, w).shift("z", 1, hbar_power=0)


def test_residue_of_shifted_pole_times_square():
    w = Window.of({"x": (-8, 8)}, hmax=4)
    square = HSeries.monomial(1, 0, {"x": 2}, w)
    out = residue(inverse_shifted("x", 2, w) * square, "x")
    assert out.vars == ()
    assert out.terms == {(2, ()): 4}


def test_residue_of_positive_power_vanishes():
    w = Window.of({"z": (-5, 5)}, hmax=2)
    assert residue(HSeries.monomial(1, 0, {"z": 5}, w), "z").is_zero()


def test_residue_requires_minus_one_in_window():
    w = Window.of({"z": (0, 5)}, hmax=2)
    with pytest.raises(WindowError):
        residue(HSeries.constant(1, w), "z")


def test_residue_of_delta_is_one():
    w = Window.symmetric(("z", "w"), 2, hmax=1)
    out = residue(delta("w", "z", 0, w), "z")
    assert out.terms == {(0, (0,)): 1}


def test_sing_part_of_shifted_pole_times_polynomial(x_window):
    square = HSeries.monomial(1, 0, {"x": 2}, x_window)
    pole = inverse_shifted("x", 2, x_window)
    singular = (pole * square).sing_part("x")
    assert singular == pole.scale(4, hpow=2)


def test_sing_part_of_polynomial_is_zero(zw_window):
    a = HSeries.polynomial({(0, (2, 1)): 1, (1, (0, 0)): 3}, zw_window)
    assert a.sing_part("z").is_zero()


def test_sing_plus_reg_reassembles(zw_window):
    a = HSeries.polynomial({(0, (-2, 1)): 1, (1, (3, -1)): 3, (2, (0, 0)): -1}, zw_window)
    assert a.sing_part("z") + a.reg_part("z") == a


# ── delta ────────────────────────────────────────────────────


def test_delta_window_contents():
    w = Window.symmetric(("z", "w"), 2, hmax=1)
    d = delta("w", "z", 0, w)
    # exponents ordered (z, w)
    assert set(d.terms) == {(0, (-1, 0)), (0, (-2, 1)), (0, (0, -1)), (0, (1, -2))}


def test_delta_annihilated_by_difference():
    w = Window.symmetric(("z", "w"), 3, hmax=1)
    difference = HSeries.polynomial({(0, (1, 0)): 1, (0, (0, 1)): -1}, w)
    product = difference * delta("w", "z", 0, w)
    assert not product.window.is_empty
    assert product.is_zero()


def test_delta_derivative_coefficients():
    w = Window.symmetric(("z", "w"), 4, hmax=1)
    d1 = delta("w", "z", 1, w)
    # (∂_w δ)(w/z) contains 2·w^1 z^{-3} and -1·w^{-2} z^{0}
    assert d1.coefficient(0, {"z": -3, "w": 1}) == 2
    assert d1.coefficient(0, {"z": 0, "w": -2}) == -1


# ── substitution ─────────────────────────────────────────────


def test_substitute_equal_merges_exponents(zw_window):
    zw = HSeries.monomial(1, 0, {"z": 1, "w": 1}, zw_window)
    out = zw.substitute_equal("z", "w")
    assert out.vars == ("w",)
    assert out.terms == {(0, (2,)): 1}


def test_substitute_equal_kills_diagonal(zw_window):
    difference = HSeries.polynomial({(0, (1, 0)): 1, (0, (0, 1)): -1}, zw_window)
    assert difference.substitute_equal("z", "w").is_zero()


# ── log / exp ────────────────────────────────────────────────


def test_log1p_two_terms():
    w = Window.of({"z": (-5, 5)}, hmax=3)
    out = log1p(HSeries.monomial(2, 1, {"z": -1}, w))
    assert out.terms == {(1, (-1,)): 2, (2, (-2,)): -2}


def test_exp0_of_zero_is_one(zw_window):
    assert exp0(HSeries.zero(zw_window)).terms == {(0, (0, 0)): 1}


def test_exp_log_round_trip():
    w = Window.symmetric(("z", "w"), 4, hmax=4)
    f = HSeries.polynomial({(1, (-1, 0)): 1, (1, (0, 1)): 1}, w)
    assert exp0(log1p(f)) == HSeries.constant(1, w) + f


def test_log1p_rejects_non_nilpotent(zw_window):
    with pytest.raises(TruncationError):
        log1p(HSeries.monomial(1, 0, {"z": -1}, zw_window))


# ── operator series ──────────────────────────────────────────


def test_g_applied_to_inverse(x_window):
    g = op_make("G", 5, "x")
    out = g.apply(HSeries.monomial(1, 0, {"x": -1}, x_window))
    assert out.coefficient(1, {"x": -1}) == 2
    assert out.coefficient(3, {"x": -3}) == F(2, 3)
    assert out.coefficient(2, {"x": -2}) == 0


def test_qbracket_zero_and_minus_one():
    assert op_make("qbracket", 5, m=0).table == {}
    assert op_make("qbracket", 5, m=-1) == -identity(5)


def test_f_g_inverse():
    f, g = op_make("F", 7), op_make("G", 7)
    composed = f.compose(g)
    assert composed.order == 6
    assert composed == identity(6)


@pytest.mark.parametrize("m", [-1, 1, 2, 3, F(1, 2), F(3, 2)])
def test_g_times_qbracket_is_gm(m):
    lhs = op_make("G", 7).compose(op_make("qbracket", 7, m=m))
    assert lhs.difference_witness(op_make("Gm", 7, m=m)) is None


def test_g_qinverse_relation():
    lhs = -op_make("G", 7).compose(op_make("qpow", 7, c=-1))
    rhs = op_make("L", 7, c=-2).scale(-2, hpow=1)
    assert lhs.difference_witness(rhs) is None


def test_f_carries_negative_hbar_offset(x_window):
    out = op_make("F", 5, "x").apply(HSeries.monomial(1, 1, {"x": -1}, x_window))
    assert out.window.hmin == -1
    assert out.coefficient(-1, {"x": -1}) == 0
    assert out.coefficient(0, {"x": -1}) == F(1, 2)


# ── codec ────────────────────────────────────────────────────


def test_codec_canonical_text(zw_window):
    a = HSeries.polynomial({(1, (0, -1)): F(-2, 3), (0, (1, 0)): 1}, zw_window)
    text = codec.dumps(a)
    assert text.startswith('{"hmax":3,"hmin":0')
    assert '"terms":[[0,[1,0],"1"],[1,[0,-1],"-2/3"]]' in text
    assert codec.loads(text) == a
    assert codec.digest(a) == codec.digest(codec.loads(text))


# ── properties ───────────────────────────────────────────────


@settings(max_examples=200, derandomize=True, deadline=None)
@given(laurent_terms(2))
def test_window_soundness(terms):
    def pipeline(half_width: int) -> HSeries:
        w = Window.symmetric(("z", "w"), half_width, hmax=3)
        p = HSeries.polynomial(terms, w)
        return (p * delta("w", "z", 0, w)).derive("z").shift("w", 1)

    small, large = pipeline(5), pipeline(7)
    assert small.equal_on(large, small.window)


@settings(max_examples=200, derandomize=True, deadline=None)
@given(laurent_terms(1, degree=3, hmax=4), small_fractions, small_fractions)
def test_shift_group_law(terms, s, t):
    w = Window.of({"z": (-6, 6)}, hmax=4)
    a = HSeries.polynomial(terms, w)
    assert shift(shift(a, "z", s), "z", t) == shift(a, "z", s + t)


@settings(max_examples=200, derandomize=True, deadline=None)
@given(laurent_terms(2, degree=1, hmax=4, hmin=1))
def test_log_exp_round_trip(terms):
    w = Window.symmetric(("z", "w"), 6, hmax=4)
    f = HSeries.polynomial(terms, w)
    one = HSeries.constant(1, w)
    assert exp0(log1p(f)) == one + f
    assert log1p(exp0(f) - one) == f


@given(st.integers(min_value=-4, max_value=4))
def test_codec_preserves_support(e):
    w = Window.of({"z": (-5, 5)}, hmax=2)
    a = HSeries.monomial(1, 0, {"z": e}, w)
    assert codec.loads(codec.dumps(a)).support == a.support
