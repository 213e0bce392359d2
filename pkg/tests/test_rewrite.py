"""Tests for the normal-ordering engine, the rule decks and the relation suites."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from src.errors import ConfigError, RuleError
from src.fock.gcm import load_gcm
from src.rewrite.decks import (
    Realization,
    abstract_serre,
    define_new_currents,
    derive_log_rules,
    dy_new,
    dy_original,
    log_name,
    substitute,
)
from src.rewrite.engine import LEFTMOST, RANDOM, expr_equal, normal_order
from src.rewrite.presentation import (
    NEW_TO_OLD,
    OLD_TO_NEW,
    SERRE_VARIABLES,
    classical_layer_checks,
    dy7_control,
    letter,
    pair_probe,
    serre_nu,
    serre_word,
    serre_word_checks,
    verify_mainDY,
)
from src.rewrite.rules import ADDITIVE, COMMUTE, RuleSet
from src.rewrite.serre import verify_serre_equivalence
from src.rewrite.symbols import CurrentExpr, Letter
from src.series.window import Window

VARS = ("w", "z")
A1 = load_gcm("A1")
A2 = load_gcm("A2")


@pytest.fixture(scope="module")
def old_a1() -> RuleSet:
    return dy_original(A1, 1)


@pytest.fixture(scope="module")
def old_a2() -> RuleSet:
    return dy_original(A2, 1)


def word(deck: RuleSet, *letters: tuple[str, str], variables=VARS, coefficient=1) -> CurrentExpr:
    return CurrentExpr.word(
        variables, *(Letter(deck.symbol(s), v) for s, v in letters), coefficient=coefficient,
    )


def statuses(results) -> dict[str, str]:
    return {r["check"]: r["status"] for r in results}


# ── Engine ───────────────────────────────────────────────────


def test_single_letter_is_already_normal(old_a1, zw_window):
    e = word(old_a1, ("X+1", "z"))
    assert normal_order(e, old_a1, zw_window).terms == e.terms


def test_distinct_nodes_exchange_without_delta_terms(old_a2, zw_window):
    normal = normal_order(word(old_a2, ("X+1", "z"), ("X-2", "w")), old_a2, zw_window)
    [(letters, deltas)] = normal.terms
    assert [x.name for x in letters] == ["X-2", "X+1"]
    assert deltas == ()


def test_same_node_exchange_carries_two_delta_terms(old_a1, zw_window):
    normal = normal_order(word(old_a1, ("X+1", "z"), ("X-1", "w")), old_a1, zw_window)
    supported = [key for key in normal.terms if key[1]]
    assert len(supported) == 2
    assert {x.name for key in supported for x in key[0]} == {"H+1", "H-1"}


def test_weak_rule_waits_for_its_divisor(old_a1, zw_window):
    bare = word(old_a1, ("X+1", "z"), ("X+1", "w"))
    assert normal_order(bare, old_a1, zw_window).terms == bare.terms
    probe = pair_probe(old_a1, "X+1", "X+1")
    [(letters, _)] = normal_order(probe.expr, old_a1, zw_window).terms
    assert [x.var for x in letters] == ["w", "z"]


def test_missing_rule_raises(old_a1, zw_window):
    deck = old_a1.without(("X+1", "X-1"))
    with pytest.raises(RuleError):
        normal_order(word(deck, ("X+1", "z"), ("X-1", "w")), deck, zw_window)


def test_unknown_strategy_rejected(old_a1, zw_window):
    with pytest.raises(RuleError):
        normal_order(word(old_a1, ("X+1", "z")), old_a1, zw_window, strategy="greedy")


def test_expr_equal_with_zero(old_a1, zw_window):
    e = word(old_a1, ("X+1", "z"), ("X-1", "w"))
    assert expr_equal(e, e + CurrentExpr.zero(VARS), old_a1, zw_window)["status"] == "pass"


def test_expr_equal_reports_witness(old_a1, zw_window):
    e = word(old_a1, ("X+1", "z"))
    result = expr_equal(e, e.scale(2), old_a1, zw_window)
    assert result["status"] == "fail"
    assert "X+1(z)" in result["witness"]["word"]


# ── Decks ────────────────────────────────────────────────────


def test_deck_json_round_trip(old_a2):
    assert RuleSet.loads(old_a2.dumps()).dumps() == old_a2.dumps()


def test_deck_json_error_names_line():
    with pytest.raises(ConfigError, match="line"):
        RuleSet.loads('{"name": "x",\n "symbols": [}')


def test_deck_json_missing_field():
    with pytest.raises(ConfigError, match="symbols"):
        RuleSet.from_json({"name": "x"})


def test_log_of_non_grouplike_rejected(old_a1):
    with pytest.raises(RuleError):
        derive_log_rules("X+1", old_a1)
    with pytest.raises(RuleError):
        derive_log_rules("K1", old_a1)


def test_log_rules_bracket_with_every_partner(old_a2):
    symbol, rules = derive_log_rules("H+1", old_a2)
    assert symbol.name == log_name("H+1")
    partners = {r.right: r.kind for r in rules}
    assert partners["X+1"] == ADDITIVE
    assert partners["X-2"] == ADDITIVE
    assert partners["H+2"] == COMMUTE


def test_new_currents_realize_x_plus_identically(old_a1):
    deck, forward = define_new_currents(old_a1, A1)
    realized = substitute(word(dy_new(A1, 1), ("x+1", "z")), forward, deck)
    assert realized.terms == word(deck, ("X+1", "z")).terms


def test_x_minus_without_level_has_no_shifts():
    deck, forward = define_new_currents(dy_original(A1, 0), A1)
    [(letters, _)] = substitute(word(dy_new(A1, 0), ("x-1", "z")), forward, deck).terms
    assert [(x.name, x.shift) for x in letters] == [("X-1", 0), ("K1", 0)]


def test_serre_nu_per_family(old_a2):
    new = dy_new(A2, 1)
    assert serre_nu(new, ("x+1", "x+1"), ("x+1", "x+2")) == 1
    assert serre_nu(new, ("x-1", "x-1"), ("x-1", "x-2")) == 1
    assert serre_nu(old_a2, ("X+1", "X+1"), ("X+1", "X+2")) == 1
    assert serre_nu(old_a2, ("X-1", "X-1"), ("X-1", "X-2")) == -1


# ── Serre ────────────────────────────────────────────────────


@pytest.mark.parametrize("nu", [1, -1])
def test_serre_equivalence_holds(nu):
    results = verify_serre_equivalence(nu=nu, N=3)
    assert {r["status"] for r in results} == {"pass"}
    names = statuses(results)
    for check in ("serre.delta_free_cancels", "serre.antisymmetry", "serre.residue_is_ac_exchange",
                  "serre.a0a0b_vanishes", "serre.evaluation_criterion", "serre.zero_mode_delta"):
        assert check in names


def test_serre_commuting_sum_vanishes():
    results = verify_serre_equivalence(commuting=True)
    assert statuses(results)["serre.vanishes"] == "pass"


def test_serre_perturbed_kernel_is_located():
    results = verify_serre_equivalence(perturb=1, N=3)
    failed = [r for r in results if r["status"] == "fail"]
    assert failed
    assert all(r["witness"] is not None for r in failed)


def test_abstract_deck_freezes_a_c_at_first_stage():
    assert abstract_serre(1, 1).is_frozen("a", "c")
    assert not abstract_serre(1, 2).is_frozen("a", "c")


# ── Presentation ─────────────────────────────────────────────


@pytest.mark.parametrize("direction", [OLD_TO_NEW, NEW_TO_OLD])
def test_presentation_a1(direction):
    results = verify_mainDY(A1, level=1, half_width=5, N=3, direction=direction)
    failing = {r["check"]: r["message"] for r in results if r["status"] != "pass"}
    assert not failing


def test_bracket_coefficient_keeps_the_full_window():
    new = dy_new(A1, 1)
    window = Window.symmetric(VARS, 5, hmax=3)
    normal = normal_order(word(new, ("x+1", "w"), ("h+1", "z")), new, window, N=3)
    survivor = (letter(new, "x+1", "w"),)
    [coef] = [c for (letters, deltas), c in normal.terms.items() if letters == survivor]
    assert coef.window.interval("w") == (-5, 5)
    assert coef.window.interval("z") == (-5, 5)
    # -[2](z - w + ħ)^{-1} at ħ^0
    assert coef.coefficient(0, {"z": -1}) == -2
    assert coef.coefficient(0, {"z": -4, "w": 3}) == -2


def test_shifted_log_bracket_stays_exact(old_a1):
    deck, _ = define_new_currents(old_a1, A1)
    window = Window.symmetric(VARS, 5, hmax=3)
    e = CurrentExpr.word(VARS, letter(deck, "X+1", "w"),
                         letter(deck, log_name("H-1"), "z", Fraction(-1, 2), "F"))
    normal = normal_order(e, deck, window, N=3)
    survivor = (letter(deck, "X+1", "w"),)
    [coef] = [c for (letters, _), c in normal.terms.items() if letters == survivor]
    assert coef.window.interval("z") == (-5, 5)


def test_classical_layer_a1():
    results = classical_layer_checks(dy_new(A1, 1), A1, Window.symmetric(VARS, 4, hmax=2), 2, Fraction(1))
    assert {r["status"] for r in results} == {"pass"}
    assert "layer0.x+x+[1,1]" in statuses(results)


@pytest.mark.parametrize("direction", [OLD_TO_NEW, NEW_TO_OLD])
def test_presentation_a2(direction):
    results = verify_mainDY(A2, level=1, half_width=4, N=2, direction=direction)
    failing = {r["check"]: r["message"] for r in results if r["status"] != "pass"}
    assert not failing
    serre = [r for r in results if r.get("relation") == "Serre"]
    assert len(serre) == 4


def test_serre_word_vanishes_in_its_own_deck():
    new = dy_new(A2, 1)
    window = Window.symmetric(SERRE_VARIABLES, 4, hmax=2)
    for kind in ("x+", "x-"):
        expr = serre_word(new, f"{kind}1", f"{kind}2")
        result = expr_equal(expr, CurrentExpr.zero(SERRE_VARIABLES), new, window, 2)
        assert result["status"] == "pass", result["message"]


def test_serre_word_catches_a_shifted_realization():
    new = dy_new(A2, 1)
    shifted = {"x+1": Realization(Fraction(1), (("x+1", Fraction(1), None),))}
    results = serre_word_checks(new, new, shifted, A2, ("x+",), 4, 2, "shifted")
    assert statuses(results)["shifted.serre.x+[1,2]"] == "fail"


def test_presentation_carries_relation_sources():
    results = verify_mainDY(A1, level=1, half_width=4, N=2, direction=OLD_TO_NEW)
    transferred = [r for r in results if r["check"].startswith(OLD_TO_NEW)]
    assert transferred and all(r["relation"] for r in transferred)


def test_dy7_control_separates_decks():
    assert dy7_control(load_gcm("D4"))["status"] == "pass"


def test_dy7_control_needs_a_zero_pair():
    assert dy7_control(A2)["status"] == "fail"


# ── Properties ───────────────────────────────────────────────

PROPERTY_VARS = ("w", "z", "u", "v")
PROPERTY_SYMBOLS = ("H+1", "H-1", "K1", "H+2", "X+1", "X-2")


@settings(max_examples=200, derandomize=True, deadline=None)
@given(
    symbols=st.lists(st.sampled_from(PROPERTY_SYMBOLS), min_size=1, max_size=4),
    variables=st.permutations(PROPERTY_VARS),
    seed=st.integers(min_value=0, max_value=2**16),
)
def test_strategy_independence(symbols, variables, seed):
    deck = dy_original(A2, 1)
    window = Window.symmetric(PROPERTY_VARS, 3, hmax=2)
    e = word(deck, *zip(symbols, variables), variables=PROPERTY_VARS)
    leftmost = normal_order(e, deck, window, strategy=LEFTMOST)
    randomized = normal_order(e, deck, window, strategy=RANDOM, seed=seed)
    assert expr_equal(leftmost, randomized, deck, window)["status"] == "pass"
    assert normal_order(leftmost, deck, window).terms == leftmost.terms


def test_level_is_fixed_before_rewriting():
    assert dy_new(A2, Fraction(3, 2)).kappa == Fraction(3, 2)
