"""
Decks — the concrete rule decks and the change of generating currents.

DY-original holds the relations among H^±, X^± (with K = (H^+)^{-1});
DY-new holds the relations among the currents h^±, x^± built from them,
extended by grouplike H^±, K whose exchange kernels are the ones the h
brackets exponentiate to. Slot _1 is the variable of the left symbol,
_2 the variable of the right one; κ is fixed to the level before any
rewriting.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction

from src.errors import RuleError
from src.fock.gcm import GCM
from src.kernels.factors import IotaKernel, KernelSum, as_sum, pair
from src.rewrite.rules import (
    ADDITIVE,
    COMMUTE,
    EXCHANGE,
    WEAK,
    AdditiveTerm,
    DeltaTerm,
    ExchangeRule,
    RuleSet,
    SlotLetter,
)
from src.rewrite.symbols import (
    ADDITIVE as ADDITIVE_KIND,
    CURRENT,
    GROUPLIKE,
    GROUPLIKE_INVERSE,
    CurrentExpr,
    CurrentSymbol,
    Letter,
)
from src.series.hseries import Scalar, to_scalar

logger = logging.getLogger(__name__)

Z, W = "_1", "_2"
HALF = Fraction(1, 2)


# ── Slot kernels ─────────────────────────────────────────────


def zw(shift: Scalar, exp: int = 1) -> IotaKernel:
    """(_1 - _2 + shift·ħ)^exp"""
    return IotaKernel.make(1, 0, [pair(Z, W, shift, exp)])


def wz(shift: Scalar, exp: int = 1) -> IotaKernel:
    """(_2 - _1 + shift·ħ)^exp"""
    return IotaKernel.make(1, 0, [pair(W, Z, shift, exp)])


def k_hh(a: int, kappa: Fraction) -> IotaKernel:
    """H^+_i(_1) H^-_j(_2) exchange kernel."""
    return zw(-a - kappa) * zw(a + kappa) * zw(a - kappa, -1) * zw(-a + kappa, -1)


def k_hplus_x(a: int, kappa: Fraction, sign: int) -> IotaKernel:
    """H^+_i(_1) X^±_j(_2) exchange kernel."""
    c = sign * kappa / 2
    return zw(a + c) * zw(-a + c, -1) if sign > 0 else zw(-a + c) * zw(a + c, -1)


def k_hminus_x(a: int, kappa: Fraction, sign: int) -> IotaKernel:
    """H^-_i(_1) X^±_j(_2) exchange kernel."""
    c = sign * kappa / 2
    return wz(-a + c) * wz(a + c, -1) if sign > 0 else wz(a + c) * wz(-a + c, -1)


def k_x_plus_minus(a: int) -> IotaKernel:
    """x^+_i(_1) x^-_j(_2) exchange kernel (w-z+aħ)/(w-z-aħ)."""
    return wz(a) * wz(-a, -1)


def inverse(kernel: IotaKernel, large: str) -> KernelSum:
    return as_sum(kernel.inverse((large, W if large == Z else Z)))


# ── Symbols ──────────────────────────────────────────────────

SIGNS = {"+": 1, "-": -1}


def name(kind: str, label: str) -> str:
    return f"{kind}{label}"


def _grouplike_symbols(label: str, node: int) -> list[CurrentSymbol]:
    return [
        CurrentSymbol(name("H-", label), GROUPLIKE, 0, node),
        CurrentSymbol(name("H+", label), GROUPLIKE, 1, node, partner=name("K", label)),
        CurrentSymbol(name("K", label), GROUPLIKE_INVERSE, 1, node, partner=name("H+", label)),
    ]


def _grouplike_rules(gcm: GCM, kappa: Fraction) -> list[ExchangeRule]:
    """Grouplike commutations and the H^+H^- exchange, with their consequences for K = (H^+)^{-1}."""
    rules: list[ExchangeRule] = []
    labels = gcm.labels
    for i in gcm.nodes:
        for j in gcm.nodes:
            li, lj = labels[i], labels[j]
            a = gcm.a(i, j)
            if i <= j:
                for kind in ("H+", "H-", "K"):
                    rules.append(ExchangeRule(name(kind, li), name(kind, lj), COMMUTE, source="DY1"))
            rules.append(ExchangeRule(name("H+", li), name("K", lj), COMMUTE, source="DY1"))
            k2 = k_hh(a, kappa)
            rules.append(ExchangeRule(name("H+", li), name("H-", lj), EXCHANGE, k2, Z, source="DY2"))
            rules.append(ExchangeRule(name("K", li), name("H-", lj), EXCHANGE, inverse(k2, Z), Z,
                                      source="DY2"))
    return rules


def _x_pair_rules(gcm: GCM, kind: str, sign: int, same_sign: bool, dy7: bool,
                  source: str) -> list[ExchangeRule]:
    """Weak exchange of two X^± currents; `same_sign` uses (z-w-a)·S·T = (z-w+a)·T·S for both signs."""
    rules: list[ExchangeRule] = []
    labels = gcm.labels
    for i in gcm.nodes:
        for j in gcm.nodes:
            if i > j:
                continue
            a = gcm.a(i, j)
            left, right = name(kind, labels[i]), name(kind, labels[j])
            if a == 0 and i != j:
                if dy7:
                    rules.append(ExchangeRule(left, right, COMMUTE, source="DY7"))
                else:
                    rules.append(ExchangeRule(left, right, WEAK, as_sum(zw(0)), divisor=as_sum(zw(0)),
                                              source=source))
                continue
            s = 1 if same_sign else sign
            rules.append(ExchangeRule(
                left, right, WEAK, as_sum(zw(s * a)), divisor=as_sum(zw(-s * a)), source=source,
            ))
    return rules


# ── DY-original ──────────────────────────────────────────────


def dy_original(gcm: GCM, kappa: Scalar, dy7: bool = True) -> RuleSet:
    """
    The deck of relations among H^±_i, X^±_i with K_i = H^+_i^{-1}.

    Symbol order H^- < H^+ = K < X^- < X^+. With dy7 False the a_ij = 0
    pairs keep only the weakened exchange.
    """
    kappa = to_scalar(kappa)
    symbols: list[CurrentSymbol] = []
    for node, label in enumerate(gcm.labels):
        symbols += _grouplike_symbols(label, node)
        symbols += [
            CurrentSymbol(name("X-", label), CURRENT, 2, node),
            CurrentSymbol(name("X+", label), CURRENT, 3, node),
        ]
    rules = _grouplike_rules(gcm, kappa)
    labels = gcm.labels
    for i in gcm.nodes:
        for j in gcm.nodes:
            li, lj = labels[i], labels[j]
            a = gcm.a(i, j)
            for s, sign in SIGNS.items():
                x = name("X" + s, lj)
                k3 = k_hplus_x(a, kappa, sign)
                rules.append(ExchangeRule(name("H+", li), x, EXCHANGE, k3, Z, source="DY3"))
                rules.append(ExchangeRule(name("K", li), x, EXCHANGE, inverse(k3, Z), Z, source="DY3"))
                rules.append(ExchangeRule(name("H-", li), x, EXCHANGE, k_hminus_x(a, kappa, sign), W,
                                          source="DY4"))
            deltas: tuple[DeltaTerm, ...] = ()
            if i == j:
                deltas = (
                    DeltaTerm(IotaKernel.make(HALF, -1), kappa, (SlotLetter(name("H+", li), W, kappa / 2),)),
                    DeltaTerm(IotaKernel.make(-HALF, -1), -kappa, (SlotLetter(name("H-", li), W, -kappa / 2),)),
                )
            rules.append(ExchangeRule(name("X+", li), name("X-", lj), EXCHANGE, deltas=deltas, source="DY5"))
    for s, sign in SIGNS.items():
        rules += _x_pair_rules(gcm, "X" + s, sign, same_sign=False, dy7=dy7, source="DY6")
    deck = "DY-original" if dy7 else "DY-original without DY7"
    return RuleSet(f"{deck}({gcm.name}, κ={kappa})", symbols, rules, kappa=kappa)


# ── Log symbols ──────────────────────────────────────────────


def log_name(symbol: str) -> str:
    return f"log{symbol}"


def derive_log_rules(grouplike: str, rules: RuleSet) -> tuple[CurrentSymbol, list[ExchangeRule]]:
    """
    The additive symbol log G and its brackets with every symbol of the deck.

    [log G(_1), S(_2)] = log(k)·S(_2) when G(_1)S(_2) = k·S(_2)G(_1); for an
    additive partner log G' the bracket is the central log(k_{G,G'}).

    Raises:
        RuleError: G is not grouplike, or an exchange of G carries δ-terms
            or is weak (the kernel is not a central scalar)
    """
    g = rules.symbol(grouplike)
    if g.kind != GROUPLIKE:
        raise RuleError(f"log of {grouplike}: symbol is {g.kind}, not grouplike")
    log_symbol = CurrentSymbol(log_name(grouplike), ADDITIVE_KIND, g.rank, g.node)
    derived = [
        ExchangeRule(log_symbol.name, log_symbol.name, COMMUTE, source=f"log {grouplike}"),
        ExchangeRule(log_symbol.name, grouplike, COMMUTE, source=f"log {grouplike}"),
    ]
    for partner in rules.symbols:
        if partner.name == grouplike:
            continue
        central = partner.kind == ADDITIVE_KIND
        if central and not partner.name.startswith("log"):
            continue
        base = partner.name[len("log"):] if central else partner.name
        if base == grouplike or not rules.has_rule(grouplike, base):
            continue
        rule = rules.rule(grouplike, base)
        if rule.kind == COMMUTE:
            derived.append(ExchangeRule(log_symbol.name, partner.name, COMMUTE, source=f"log {grouplike}"))
            continue
        if rule.kind != EXCHANGE or rule.deltas:
            raise RuleError(f"log of {grouplike}: exchange with {base} is not a central kernel")
        if central and rules.symbol(base).kind != GROUPLIKE:
            continue
        bracket = AdditiveTerm(rule.kernel, log=True, keep=None if central else W)
        derived.append(ExchangeRule(log_symbol.name, partner.name, ADDITIVE, additive=bracket,
                                    source=f"log {grouplike} vs {base}"))
    logger.debug("derived %d rules for %s", len(derived), log_symbol.name)
    return log_symbol, derived


def with_logs(rules: RuleSet, grouplikes: list[str]) -> RuleSet:
    """Extend a deck by log symbols, one at a time so later logs see earlier ones."""
    for g in grouplikes:
        symbol, derived = derive_log_rules(g, rules)
        rules = rules.extended([symbol], derived)
    return rules


# ── New currents ─────────────────────────────────────────────


@dataclass(frozen=True)
class Realization:
    """A current as coefficient · (block of letters at shifted arguments, optionally operator-processed)."""

    coefficient: Fraction
    letters: tuple[tuple[str, Fraction, str | None], ...]

    def letters_at(self, deck: RuleSet, var: str, shift: Fraction) -> tuple[Letter, ...]:
        return tuple(
            Letter(deck.symbol(sym), var, shift + s, op) for sym, s, op in self.letters
        )


def define_new_currents(old: RuleSet, gcm: GCM) -> tuple[RuleSet, dict[str, Realization]]:
    """
    Old-deck realizations of the new currents, and the old deck extended by log H^±.

        x^+(z) = X^+(z)
        x^-(z) = X^-(z - κħ) K(z - κħ/2)
        h^±(z) = ±F(∂_z) log H^±(z ± κħ/2)
    """
    kappa = old.kappa
    deck = with_logs(old, [name(k, label) for label in gcm.labels for k in ("H+", "H-")])
    one = Fraction(1)
    realizations: dict[str, Realization] = {}
    for label in gcm.labels:
        realizations[name("x+", label)] = Realization(one, ((name("X+", label), Fraction(0), None),))
        realizations[name("x-", label)] = Realization(one, (
            (name("X-", label), -kappa, None), (name("K", label), -kappa / 2, None),
        ))
        realizations[name("h+", label)] = Realization(
            one, ((log_name(name("H+", label)), kappa / 2, "F"),),
        )
        realizations[name("h-", label)] = Realization(
            -one, ((log_name(name("H-", label)), -kappa / 2, "F"),),
        )
    return deck, realizations


def inverse_realizations(gcm: GCM, kappa: Fraction) -> dict[str, Realization]:
    """New-deck realizations of the original currents: X^-(w) = x^-(w + κħ) H^+(w + κħ/2)."""
    one = Fraction(1)
    out: dict[str, Realization] = {}
    for label in gcm.labels:
        out[name("X+", label)] = Realization(one, ((name("x+", label), Fraction(0), None),))
        out[name("X-", label)] = Realization(one, (
            (name("x-", label), kappa, None), (name("H+", label), kappa / 2, None),
        ))
    return out


def substitute(expr: CurrentExpr, realizations: Mapping[str, Realization], deck: RuleSet) -> CurrentExpr:
    """Replace every letter with a realization by its block; other letters are rebound to `deck`."""
    out = []
    for (word, deltas), coef in expr.terms.items():
        letters: list[Letter] = []
        scale = Fraction(1)
        for letter in word:
            real = realizations.get(letter.name)
            if real is None:
                letters.append(Letter(deck.symbol(letter.name), letter.var, letter.shift, letter.op))
                continue
            if letter.op:
                raise RuleError(f"cannot substitute into operator-processed {letter.describe()}")
            scale *= real.coefficient
            letters.extend(real.letters_at(deck, letter.var, letter.shift))
        out.append(((tuple(letters), deltas), coef * scale if scale != 1 else coef))
    return CurrentExpr(expr.variables, out)


# ── DY-new ───────────────────────────────────────────────────


def _qbracket_ops(*ms: Scalar) -> tuple[tuple[str, str, tuple[tuple[str, Fraction], ...]], ...]:
    return tuple(("qbracket", W, (("m", to_scalar(m)),)) for m in ms)


def dy_new(gcm: GCM, kappa: Scalar, dy7: bool = True) -> RuleSet:
    """
    The deck of relations among h^±_i, x^±_i, with grouplike H^±_i, K_i.

    The h–x brackets carry [a_ij] acting by q-shifts in the x variable; the
    H–x kernels are the original ones at the arguments the realizations
    shift to. Symbol order h^- = H^- < h^+ = H^+ = K < x^- < x^+.
    """
    kappa = to_scalar(kappa)
    symbols: list[CurrentSymbol] = []
    for node, label in enumerate(gcm.labels):
        symbols += [
            CurrentSymbol(name("h-", label), ADDITIVE_KIND, 0, node),
            CurrentSymbol(name("h+", label), ADDITIVE_KIND, 1, node),
        ]
        symbols += _grouplike_symbols(label, node)
        symbols += [
            CurrentSymbol(name("x-", label), CURRENT, 2, node),
            CurrentSymbol(name("x+", label), CURRENT, 3, node),
        ]
    rules = _grouplike_rules(gcm, kappa)
    labels = gcm.labels
    for i in gcm.nodes:
        for j in gcm.nodes:
            li, lj = labels[i], labels[j]
            a = gcm.a(i, j)
            if i <= j:
                for kind in ("h+", "h-"):
                    rules.append(ExchangeRule(name(kind, li), name(kind, lj), COMMUTE, source="h-h"))
            if a:
                hh = AdditiveTerm(zw(kappa, -2), ops=_qbracket_ops(a, kappa), keep=None)
                rules.append(ExchangeRule(name("h+", li), name("h-", lj), ADDITIVE,
                                          additive=_directed_bracket(hh, Z), source="h-h"))
            else:
                rules.append(ExchangeRule(name("h+", li), name("h-", lj), COMMUTE, source="h-h"))
            for s, sign in SIGNS.items():
                x = name("x" + s, lj)
                if a:
                    plus = AdditiveTerm(zw(kappa, -1), ops=_qbracket_ops(a), sign=sign)
                    minus = AdditiveTerm(wz(kappa, -1), ops=_qbracket_ops(a), sign=sign)
                    rules.append(ExchangeRule(name("h+", li), x, ADDITIVE,
                                              additive=_directed_bracket(plus, Z), source="h-x"))
                    rules.append(ExchangeRule(name("h-", li), x, ADDITIVE,
                                              additive=_directed_bracket(minus, W), source="h-x"))
                else:
                    rules.append(ExchangeRule(name("h+", li), x, COMMUTE, source="h-x"))
                    rules.append(ExchangeRule(name("h-", li), x, COMMUTE, source="h-x"))
                # grouplike exchanges at the realized arguments
                lag = 0 if sign > 0 else -kappa
                k3 = k_hplus_x(a, kappa, sign).shift(W, lag)
                rules.append(ExchangeRule(name("H+", li), x, EXCHANGE, k3, Z, source="H-x"))
                rules.append(ExchangeRule(name("K", li), x, EXCHANGE, inverse(k3, Z), Z, source="H-x"))
                k4 = k_hminus_x(a, kappa, sign).shift(W, lag)
                if sign < 0:
                    # H^-_i(z) K_j(u - κħ/2) = k_hh(u - κħ/2, z) K_j H^-_i
                    k4 = k4 * k_hh(gcm.a(j, i), kappa).rename({Z: W, W: Z}).shift(W, -kappa / 2)
                rules.append(ExchangeRule(name("H-", li), x, EXCHANGE, k4, W, source="H-x"))
            deltas: tuple[DeltaTerm, ...] = ()
            if i == j:
                deltas = (
                    DeltaTerm(IotaKernel.make(HALF, -1), 0),
                    DeltaTerm(IotaKernel.make(-HALF, -1), -2 * kappa, (
                        SlotLetter(name("H-", li), W, -3 * kappa / 2),
                        SlotLetter(name("K", li), W, -kappa / 2),
                    )),
                )
            rules.append(ExchangeRule(name("x+", li), name("x-", lj), EXCHANGE,
                                      k_x_plus_minus(a), W, deltas=deltas, source="x-x"))
    for s, sign in SIGNS.items():
        rules += _x_pair_rules(gcm, "x" + s, sign, same_sign=True, dy7=dy7, source="x-x")
    deck = "DY-new" if dy7 else "DY-new without the a=0 commutation"
    return RuleSet(f"{deck}({gcm.name}, κ={kappa})", symbols, rules, kappa=kappa)


def _directed_bracket(term: AdditiveTerm, large: str) -> AdditiveTerm:
    kernel = term.kernel.with_direction((large, W if large == Z else Z))
    return AdditiveTerm(kernel, term.log, term.ops, term.sign, term.keep)


# ── Abstract Serre deck ──────────────────────────────────────


def abstract_serre(nu: Scalar = 1, stage: int = 1, perturb: Scalar = 0,
                   commuting: bool = False) -> RuleSet:
    """
    Two currents a, b with

        (z - w - 2νħ) a(z)a(w) = (z - w + 2νħ) a(w)a(z)
        a(z)b(w) = ((w - z + νħ)/(w - z - νħ)) b(w)a(z) + δ(z = w - νħ)·c(w)

    where c = a(w)_0 b(w). Stage 1 leaves a–c unexchanged; stage 2 adds
    a(z)c(w) = ((w-z-3νħ)/(w-z-νħ)) c(w)a(z) + δ(z = w - νħ)·d(w) with
    d = a(w)_0 c(w); stage 3 instead uses the δ-term δ(z = w + νħ)·n(w),
    n(w) the normal-ordered triple at z1 = w + νħ, z2 = w - νħ.
    `perturb` adds perturb·ħ to the numerator shift of the a–b kernel.
    """
    nu = to_scalar(nu)
    symbols = [
        CurrentSymbol("a", CURRENT, 1),
        CurrentSymbol("b", CURRENT, 0),
        CurrentSymbol("c", CURRENT, 0),
        CurrentSymbol("d", CURRENT, 0),
        CurrentSymbol("n", CURRENT, 0),
    ]
    if commuting:
        rules = [ExchangeRule("a", s, COMMUTE, source="commuting") for s in ("a", "b")]
        return RuleSet("abstract-Serre(commuting)", symbols, rules)
    rules = [
        ExchangeRule("a", "a", WEAK, as_sum(zw(2 * nu)), divisor=as_sum(zw(-2 * nu)), source="a-a"),
        ExchangeRule(
            "a", "b", EXCHANGE, wz(nu + to_scalar(perturb)) * wz(-nu, -1), W,
            deltas=(DeltaTerm(as_sum(1), -nu, (SlotLetter("c", W),)),), source="a-b",
        ),
    ]
    frozen: list[tuple[str, str]] = []
    if stage == 1:
        frozen.append(("a", "c"))
    elif stage == 2:
        rules.append(ExchangeRule(
            "a", "c", EXCHANGE, wz(-3 * nu) * wz(-nu, -1), W,
            deltas=(DeltaTerm(as_sum(1), -nu, (SlotLetter("d", W),)),), source="a-c",
        ))
    else:
        rules.append(ExchangeRule(
            "a", "c", EXCHANGE, wz(-3 * nu) * wz(-nu, -1), W,
            deltas=(DeltaTerm(as_sum(1), nu, (SlotLetter("n", W),)),), source="a-c",
        ))
    return RuleSet(f"abstract-Serre(ν={nu}, stage {stage})", symbols, rules, frozen)
