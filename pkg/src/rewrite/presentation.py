"""
Presentation — the two sets of generating relations define the same algebra.

old->new realizes the new currents through the original ones and checks
every relation of the new deck inside the original deck; new->old goes
back through X^-(w) = x^-(w + κħ) H^+(w + κħ/2) and checks every original
relation inside the new deck. A relation is checked on the word it
rewrites: P and its normal form NF(P) under the source deck must have
equal normal forms once both are realized in the target deck.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from src.errors import check_result, guarded
from src.fock.gcm import GCM
from src.kernels.expand import expand
from src.kernels.factors import IotaKernel, KernelSum, as_sum, pair
from src.kernels.identity import rational_identity_check
from src.rewrite.decks import (
    Realization,
    abstract_serre,
    define_new_currents,
    dy_new,
    dy_original,
    inverse_realizations,
    name,
    substitute,
)
from src.rewrite.engine import LEFTMOST, expr_equal, normal_order, term_window
from src.rewrite.rules import WEAK, RuleSet, single_kernel
from src.rewrite.symbols import CurrentExpr, Letter
from src.series.hseries import HSeries, Scalar, to_scalar
from src.series.window import Window

logger = logging.getLogger(__name__)

VARIABLES = ("w", "z")
SERRE_VARIABLES = ("w", "z1", "z2")
OLD_TO_NEW = "old->new"
NEW_TO_OLD = "new->old"
DIRECTIONS = (OLD_TO_NEW, NEW_TO_OLD)

NEW_FAMILIES = (
    ("h+", "h+"), ("h-", "h-"), ("h+", "h-"),
    ("h+", "x+"), ("h+", "x-"), ("h-", "x+"), ("h-", "x-"),
    ("H+", "x+"), ("H+", "x-"), ("K", "x+"), ("K", "x-"), ("H-", "x+"), ("H-", "x-"),
    ("x+", "x-"), ("x+", "x+"), ("x-", "x-"),
)

OLD_FAMILIES = (
    ("H+", "H+"), ("H-", "H-"), ("K", "K"), ("H+", "K"), ("H+", "H-"), ("K", "H-"),
    ("H+", "X+"), ("H+", "X-"), ("K", "X+"), ("K", "X-"), ("H-", "X+"), ("H-", "X-"),
    ("X+", "X-"), ("X+", "X+"), ("X-", "X-"),
)


@dataclass(frozen=True)
class Probe:
    """A word that the source deck rewrites, labelled by its relation."""

    check: str
    relation: str
    expr: CurrentExpr


def letter(deck: RuleSet, symbol: str, var: str, shift: Scalar = 0, op: str | None = None) -> Letter:
    return Letter(deck.symbol(symbol), var, to_scalar(shift), op)


def pair_probe(deck: RuleSet, left: str, right: str) -> Probe:
    """
    S(z)T(w) or T(w)S(z), whichever the deck rewrites.

    For a weak rule the word is premultiplied by the placed divisor so the
    rule can fire.
    """
    s, t = deck.symbol(left), deck.symbol(right)
    # z is declared after w, so S(z) leads exactly when rank(S) >= rank(T)
    first, second = (letter(deck, left, "z"), letter(deck, right, "w")) if s.rank >= t.rank else (
        letter(deck, right, "w"), letter(deck, left, "z"))
    rule = deck.rule(first.name, second.name)
    coefficient: KernelSum = as_sum(1)
    if rule.kind == WEAK:
        coefficient = rule.divisor.rename({"_1": first.var, "_2": second.var})
    expr = CurrentExpr.word(VARIABLES, first, second, coefficient=coefficient)
    return Probe(f"{left}{right}", rule.source, expr)


def probes(deck: RuleSet, gcm: GCM, families: tuple[tuple[str, str], ...]) -> list[Probe]:
    out: list[Probe] = []
    for left, right in families:
        for i in gcm.nodes:
            for j in gcm.nodes:
                li, lj = gcm.labels[i], gcm.labels[j]
                probe = pair_probe(deck, name(left, li), name(right, lj))
                out.append(Probe(f"{left}{right}[{li},{lj}]", probe.relation, probe.expr))
    return out


# ── Relation transfer ────────────────────────────────────────


def transfer_checks(source: RuleSet, target: RuleSet, realizations: dict[str, Realization],
                    families: tuple[tuple[str, str], ...], gcm: GCM, window: Window, N: int,
                    direction: str, strategy: str = LEFTMOST, seed: int = 0) -> list[dict[str, Any]]:
    """Realize P and NF_source(P) in the target deck and compare their normal forms."""
    results = []
    for probe in probes(source, gcm, families):
        check = f"{direction}.{probe.check}"

        def run(probe: Probe = probe, check: str = check) -> dict[str, Any]:
            reduced = normal_order(probe.expr, source, window, N, strategy, seed)
            lhs = substitute(probe.expr, realizations, target)
            rhs = substitute(reduced, realizations, target)
            return expr_equal(lhs, rhs, target, window, N, name=check, strategy=strategy, seed=seed)

        result = guarded(check, run)
        results.append({**result, "relation": probe.relation})
    return results


# ── Scalar exponential checks ────────────────────────────────


def _series_check(check: str, lhs: HSeries, rhs: HSeries, N: int, message: str) -> dict[str, Any]:
    key = lhs.difference_witness(rhs, lhs.window.with_hbar(lhs.window.hmin, N))
    if key is None:
        return check_result(check, True, message)
    witness = {
        "term": lhs.format_key(key),
        "lhs": str(lhs.terms.get(key, Fraction(0))),
        "rhs": str(rhs.terms.get(key, Fraction(0))),
    }
    return check_result(check, False, f"coefficients differ at {witness['term']}", witness)


def _bracket_series(deck: RuleSet, expr: CurrentExpr, window: Window, N: int,
                    survivor: tuple[Letter, ...]) -> HSeries:
    """Coefficient of `survivor` in the normal form of a commutator probe."""
    normal = normal_order(expr, deck, window, N)
    for (word, deltas), coef in normal.terms.items():
        if word == survivor and not deltas:
            if isinstance(coef, HSeries):
                return coef
            return expand(coef, term_window(window.with_hbar(0, N + 2), VARIABLES, (word, deltas)))
    return HSeries.zero(window.with_hbar(0, N + 2))


def _commutator(deck: RuleSet, a: Letter, b: Letter) -> CurrentExpr:
    return CurrentExpr.word(VARIABLES, a, b) - CurrentExpr.word(VARIABLES, b, a)


def exp_kernel_checks(deck: RuleSet, gcm: GCM, window: Window, N: int) -> list[dict[str, Any]]:
    """
    H^+(z) = exp(G h^+(z - κħ/2)) and H^-(z) = exp(-G h^-(z + κħ/2)) reproduce
    the grouplike exchange kernels of the new deck.
    """
    kappa = deck.kappa
    results = []
    for i in gcm.nodes:
        for j in gcm.nodes:
            li, lj = gcm.labels[i], gcm.labels[j]
            for s in ("+", "-"):
                x = letter(deck, name("x" + s, lj), "w")
                for h, shift, sign in (("+", -kappa / 2, 1), ("-", kappa / 2, -1)):
                    check = f"exp.H{h}x{s}[{li},{lj}]"

                    def run(h=h, shift=shift, sign=sign, x=x, check=check) -> dict[str, Any]:
                        cartan = letter(deck, name("h" + h, li), "z", shift, "G")
                        series = _bracket_series(deck, _commutator(deck, cartan, x), window, N, (x,))
                        lhs = series.scale(sign).exp0()
                        kernel = deck.rule(name("H" + h, li), x.name).kernel
                        rhs = expand(kernel.rename({"_1": "z", "_2": "w"}), lhs.window)
                        return _series_check(check, lhs, rhs, N, "exponentiated bracket equals the exchange kernel")

                    results.append(guarded(check, run))
            check = f"exp.H+H-[{li},{lj}]"

            def run_hh(li=li, lj=lj, check=check) -> dict[str, Any]:
                hp = letter(deck, name("h+", li), "z", -kappa / 2, "G")
                hm = letter(deck, name("h-", lj), "w", kappa / 2, "G")
                series = _bracket_series(deck, _commutator(deck, hp, hm), window, N, ())
                lhs = series.scale(-1).exp0()
                kernel = deck.rule(name("H+", li), name("H-", lj)).kernel
                rhs = expand(kernel.rename({"_1": "z", "_2": "w"}), lhs.window)
                return _series_check(check, lhs, rhs, N, "exponentiated central bracket equals the H^+H^- kernel")

            results.append(guarded(check, run_hh))
    return results


# ── ħ = 0 layer ──────────────────────────────────────────────


def _classical(a: int, scale: Scalar, exp: int, large: str) -> IotaKernel:
    return IotaKernel.make(scale, 0, [pair("z", "w", 0, exp, large=large)]) * a


def classical_layer_checks(deck: RuleSet, gcm: GCM, window: Window, N: int,
                           level: Fraction) -> list[dict[str, Any]]:
    """
    The ħ^0 part of every bracket and exchange kernel of the new deck against
    the classical affine relations: [h^+_i(z), h^-_j(w)] -> a_ij ℓ (z-w)^{-2},
    [h^±_i(z), x^±_j(w)] -> ±a_ij (z-w)^{-1} in the h^± direction, and the
    x–x kernels -> 1.
    """
    results = []
    zero = window.with_hbar(0, 1)
    for i in gcm.nodes:
        for j in gcm.nodes:
            li, lj = gcm.labels[i], gcm.labels[j]
            a = gcm.a(i, j)
            check = f"layer0.h+h-[{li},{lj}]"

            def run_hh(li=li, lj=lj, a=a, check=check) -> dict[str, Any]:
                hp, hm = letter(deck, name("h+", li), "z"), letter(deck, name("h-", lj), "w")
                series = _bracket_series(deck, _commutator(deck, hp, hm), window, N, ())
                rhs = expand(_classical(a, level, -2, "z"), series.window)
                return _series_check(check, series, rhs, 1, "ħ^0 layer is a_ij·ℓ·(z-w)^{-2}")

            results.append(guarded(check, run_hh))
            for s, sign in (("+", 1), ("-", -1)):
                x = letter(deck, name("x" + s, lj), "w")
                for h, large, orient in (("+", "z", 1), ("-", "w", -1)):
                    check = f"layer0.h{h}x{s}[{li},{lj}]"

                    def run_hx(h=h, large=large, orient=orient, x=x, sign=sign, a=a, check=check):
                        cartan = letter(deck, name("h" + h, li), "z")
                        series = _bracket_series(deck, _commutator(deck, cartan, x), window, N, (x,))
                        rhs = expand(_classical(a, sign * orient, -1, large), series.window)
                        return _series_check(check, series, rhs, 1, "ħ^0 layer is ±a_ij·(z-w)^{-1}")

                    results.append(guarded(check, run_hx))
            for left, right in (("x+", "x-"), ("x+", "x+"), ("x-", "x-")):
                check = f"layer0.{left}{right}[{li},{lj}]"

                def run_xx(left=left, right=right, check=check) -> dict[str, Any]:
                    rule = deck.rule(name(left, li), name(right, lj))
                    kernel = rule.kernel.rename({"_1": "z", "_2": "w"})
                    if rule.kind == WEAK:
                        # the ratio is expanded |z| > |w|, as the original deck expands it
                        divisor = single_kernel(rule.divisor.rename({"_1": "z", "_2": "w"}), "divisor")
                        kernel = kernel * divisor.inverse(("z", "w"))
                    series = expand(kernel, zero)
                    return _series_check(check, series, HSeries.constant(1, zero), 1,
                                         "exchange kernel is 1 at ħ = 0")

                results.append(guarded(check, run_xx))
    return results


# ── Round trips and Serre transfer ───────────────────────────


def involution_checks(old: RuleSet, new: RuleSet, forward: dict[str, Realization],
                      backward: dict[str, Realization], gcm: GCM, window: Window,
                      N: int) -> list[dict[str, Any]]:
    """X^± -> x^± -> X^± under the original deck and x^± -> X^± -> x^± under the new one."""
    results = []
    for label in gcm.labels:
        for s in ("+", "-"):
            for source, target, there, back, symbol in (
                (old, new, backward, forward, name("X" + s, label)),
                (new, old, forward, backward, name("x" + s, label)),
            ):
                check = f"involution.{symbol}"

                def run(source=source, target=target, there=there, back=back, symbol=symbol, check=check):
                    start = CurrentExpr.word(VARIABLES, letter(source, symbol, "w"))
                    round_trip = substitute(substitute(start, there, target), back, source)
                    return expr_equal(round_trip, start, source, window, N, name=check)

                results.append(guarded(check, run))
    return results


def _weak_ratio(rule) -> KernelSum:
    if rule.kind != WEAK:
        raise ValueError(f"{rule.left},{rule.right}: expected a weak rule, got {rule.kind}")
    return rule.kernel * single_kernel(rule.divisor, "divisor").inverse()


def serre_nu(deck: RuleSet, same: tuple[str, str], cross: tuple[str, str]) -> Fraction | None:
    """The ν for which (same, cross) exchange like (a–a, a–b) of the abstract Serre deck, if any."""
    for nu in (Fraction(1), Fraction(-1)):
        abstract = abstract_serre(nu, 1)
        aa = _weak_ratio(abstract.rule("a", "a"))
        ab = abstract.rule("a", "b").kernel
        if (rational_identity_check(_weak_ratio(deck.rule(*same)), aa)["status"] == "pass"
                and rational_identity_check(_weak_ratio(deck.rule(*cross)), ab)["status"] == "pass"):
            return nu
    return None


def serre_transfer_checks(new: RuleSet, old: RuleSet, gcm: GCM) -> list[dict[str, Any]]:
    """
    For a_ij = -1 every current family exchanges like a, b of the abstract
    Serre deck for some ν = ±1, so the Serre relation of each family is
    governed by the a–c criterion at that ν.
    """
    results = []
    for i, j in gcm.pairs():
        if gcm.a(i, j) != -1:
            continue
        li, lj = gcm.labels[i], gcm.labels[j]
        for deck, kind in ((new, "x+"), (new, "x-"), (old, "X+"), (old, "X-")):
            check = f"serre_transfer.{kind}[{li},{lj}]"

            def run(deck=deck, kind=kind, check=check) -> dict[str, Any]:
                xi, xj = name(kind, li), name(kind, lj)
                nu = serre_nu(deck, (xi, xi), (xi, xj))
                if nu is None:
                    return check_result(check, False, "exchange kernels match no abstract Serre deck",
                                        {"same": deck.rule(xi, xi).kernel.describe(),
                                         "cross": deck.rule(xi, xj).kernel.describe()})
                return check_result(check, True, f"{kind} currents exchange as a, b at ν={nu}", nu=str(nu))

            results.append(guarded(check, run))
    return results


def serre_word(deck: RuleSet, same: str, cross: str) -> CurrentExpr:
    """
    Σ over z1 <-> z2 of S(z1)S(z2)T(w) - 2S(z1)T(w)S(z2) + T(w)S(z1)S(z2),
    premultiplied by the weak divisors of every out-of-order pair so the
    deck can bring each word into normal order.
    """
    at = {"w": cross, "z1": same, "z2": same}
    half = (
        CurrentExpr.word(SERRE_VARIABLES, letter(deck, same, "z1"), letter(deck, same, "z2"),
                         letter(deck, cross, "w"))
        + CurrentExpr.word(SERRE_VARIABLES, letter(deck, same, "z1"), letter(deck, cross, "w"),
                           letter(deck, same, "z2"), coefficient=-2)
        + CurrentExpr.word(SERRE_VARIABLES, letter(deck, cross, "w"), letter(deck, same, "z1"),
                           letter(deck, same, "z2"))
    )
    divisor: KernelSum = as_sum(1)
    for later, earlier in (("z2", "z1"), ("z1", "w"), ("z2", "w")):
        rule = deck.rule(at[later], at[earlier])
        if rule.kind == WEAK:
            divisor = divisor * rule.divisor.rename({"_1": later, "_2": earlier})
    return (half + half.rename({"z1": "z2", "z2": "z1"})).scale(divisor)


def serre_word_checks(source: RuleSet, target: RuleSet, realizations: dict[str, Realization],
                      gcm: GCM, families: tuple[str, ...], half_width: int, N: int,
                      direction: str, strategy: str = LEFTMOST, seed: int = 0) -> list[dict[str, Any]]:
    """The Serre word of each a_ij = -1 pair, normal-ordered in the source deck and compared in the target."""
    window = Window.symmetric(SERRE_VARIABLES, half_width, hmax=N)
    results = []
    for i, j in gcm.pairs():
        if i == j or gcm.a(i, j) != -1:
            continue
        li, lj = gcm.labels[i], gcm.labels[j]
        for kind in families:
            check = f"{direction}.serre.{kind}[{li},{lj}]"

            def run(kind=kind, check=check) -> dict[str, Any]:
                expr = serre_word(source, name(kind, li), name(kind, lj))
                reduced = normal_order(expr, source, window, N, strategy, seed)
                lhs = substitute(expr, realizations, target)
                rhs = substitute(reduced, realizations, target)
                return expr_equal(lhs, rhs, target, window, N, name=check, strategy=strategy, seed=seed)

            results.append({**guarded(check, run), "relation": "Serre"})
    return results


# ── Suite ────────────────────────────────────────────────────


def verify_mainDY(gcm: GCM, level: Scalar = 1, half_width: int = 5, N: int = 3,
                  direction: str = OLD_TO_NEW, dy7: bool = True,
                  strategy: str = LEFTMOST, seed: int = 0) -> list[dict[str, Any]]:
    """
    Every relation of one deck holds in the other.

    old->new also compares the ħ = 0 layer with the classical relations
    and transfers the Serre kernels; new->old also checks the exponential
    form of the grouplike kernels and the round trips of the currents.
    Both directions carry the Serre words of every a_ij = -1 pair across.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    kappa = to_scalar(level)
    window = Window.symmetric(VARIABLES, half_width, hmax=N)
    old = dy_original(gcm, kappa, dy7)
    old_logs, forward = define_new_currents(old, gcm)
    new = dy_new(gcm, kappa)
    backward = inverse_realizations(gcm, kappa)
    logger.info("presentation %s for %s at ℓ=%s, N=%d", direction, gcm.name, kappa, N)

    if direction == OLD_TO_NEW:
        results = transfer_checks(new, old_logs, forward, NEW_FAMILIES, gcm, window, N,
                                  direction, strategy, seed)
        results += classical_layer_checks(new, gcm, window, N, kappa)
        results += serre_transfer_checks(new, old, gcm)
        results += serre_word_checks(new, old_logs, forward, gcm, ("x+", "x-"), half_width, N,
                                     direction, strategy, seed)
    else:
        results = transfer_checks(old, new, backward, OLD_FAMILIES, gcm, window, N,
                                  direction, strategy, seed)
        results += exp_kernel_checks(new, gcm, window, N)
        results += serre_word_checks(old, new, backward, gcm, ("X+", "X-"), half_width, N,
                                     direction, strategy, seed)
        results += involution_checks(old_logs, new, forward, backward, gcm, window, N)
    return results


def dy7_control(gcm: GCM, level: Scalar = 1, half_width: int = 4, N: int = 2) -> dict[str, Any]:
    """
    Dropping the a_ij = 0 commutation leaves x^±_i x^±_j unresolved: the
    new-deck commutation must fail without it and hold with it.
    """
    pairs = [(i, j) for i, j in gcm.pairs() if i != j and gcm.a(i, j) == 0]
    if not pairs:
        return check_result("dy7_control", False, f"{gcm.name} has no a_ij = 0 pair", None)
    i, j = pairs[0]
    li, lj = gcm.labels[i], gcm.labels[j]
    kappa = to_scalar(level)
    window = Window.symmetric(VARIABLES, half_width, hmax=N)
    new = dy_new(gcm, kappa)
    outcomes = {}
    for dy7 in (True, False):
        old_logs, forward = define_new_currents(dy_original(gcm, kappa, dy7), gcm)
        probe = pair_probe(new, name("x+", li), name("x+", lj))
        reduced = normal_order(probe.expr, new, window, N)
        outcomes[dy7] = expr_equal(
            substitute(probe.expr, forward, old_logs), substitute(reduced, forward, old_logs),
            old_logs, window, N, name="dy7_control",
        )
    passed = outcomes[True]["status"] == "pass" and outcomes[False]["status"] == "fail"
    return check_result(
        "dy7_control", passed,
        f"x^+_{li} x^+_{lj} commute with the a=0 rule and stay unresolved without it"
        if passed else "the a=0 control did not separate the two decks",
        {"with": outcomes[True]["status"], "without": outcomes[False]["status"],
         "witness": outcomes[False].get("witness")},
    )
