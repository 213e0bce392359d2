"""
Engine — normal ordering of current expressions and equality by normal form.

Letters sharing a variable form a block whose internal order is never
changed. Blocks are sorted by the rank of their first letter, ties broken
by variable declaration order; only adjacent letters of different blocks
are exchanged, so every exchange removes one block inversion and δ-terms
replace the pair by a shorter or lower-ranked word.
"""

from __future__ import annotations

import logging
import random
from collections import deque
from typing import Any

from src.errors import OutOfWindowError, RuleError, WindowError, check_result
from src.kernels.expand import expand
from src.kernels.factors import IotaKernel, KernelSum
from src.kernels.identity import directions_coherent, rational_identity_check
from src.kernels.logkernels import log_series
from src.rewrite.rules import ADDITIVE, COMMUTE, EXCHANGE, WEAK, ExchangeRule, RuleSet, single_kernel
from src.rewrite.symbols import (
    Coefficient,
    CurrentExpr,
    Letter,
    TermKey,
    coefficient_mul,
    constrain,
    describe_coefficient,
    describe_key,
)
from src.series.hseries import HSeries
from src.series.operators import OperatorSeries, op_make
from src.series.window import Window

logger = logging.getLogger(__name__)

LEFTMOST = "leftmost"
RANDOM = "random"
STRATEGIES = (LEFTMOST, RANDOM)

CANCEL = "cancel"
SWAP = "swap"

MAX_STEPS = 20000


# ── Windows ──────────────────────────────────────────────────


def term_window(window: Window, variables: tuple[str, ...], key: TermKey) -> Window:
    """The window of a term's series coefficient: declared variables minus eliminated ones."""
    eliminated = {d.elim for d in key[1]}
    return Window(
        tuple((v, *window.interval(v)) for v in variables if v not in eliminated),
        window.hmin, window.hmax,
    )


def series_window(window: Window, variables: tuple[str, ...]) -> Window:
    """Window for hand-built series coefficients of an expression over `variables`."""
    return Window(tuple((v, *window.interval(v)) for v in variables), window.hmin, window.hmax)


# ── Reducible spots ──────────────────────────────────────────


def _cancels(a: Letter, b: Letter) -> bool:
    if a.var != b.var or a.shift != b.shift or a.op or b.op:
        return False
    return a.symbol.grouplike and a.symbol.partner == b.name or (
        b.symbol.grouplike and b.symbol.partner == a.name
    )


def _divides(rule: ExchangeRule, coef: Coefficient, a: Letter, b: Letter) -> bool:
    """A weak rule applies only when every coefficient kernel contains its divisor."""
    if not isinstance(coef, KernelSum):
        return False
    divisor = single_kernel(_place(rule.divisor, a, b), "weak divisor")
    bases = {f.base for f in divisor.factors}
    for k in coef.kernels:
        present = {f.base for f in k.factors if f.exp > 0}
        if not bases <= present:
            return False
    return True


def _spots(word: tuple[Letter, ...], coef: Coefficient, rules: RuleSet,
           order: tuple[str, ...]) -> list[tuple[int, str]]:
    first: dict[str, int] = {}
    for letter in word:
        first.setdefault(letter.var, rules.rank(letter.name))

    def key(var: str) -> tuple[int, int]:
        return first[var], order.index(var)

    spots: list[tuple[int, str]] = []
    for i in range(len(word) - 1):
        a, b = word[i], word[i + 1]
        if a.var == b.var:
            if _cancels(a, b):
                spots.append((i, CANCEL))
            continue
        if key(a.var) <= key(b.var) or rules.is_frozen(a.name, b.name):
            continue
        rule = rules.rule(a.name, b.name)
        if rule.kind == WEAK and not _divides(rule, coef, a, b):
            continue
        spots.append((i, SWAP))
    return spots


# ── Rule application ─────────────────────────────────────────


def _place(kernel: KernelSum, a: Letter, b: Letter) -> KernelSum:
    """Slot kernel evaluated at _1 = a.var + a.shift·ħ, _2 = b.var + b.shift·ħ."""
    placed = kernel.rename({"_1": a.var, "_2": b.var})
    if a.shift:
        placed = placed.substitute(a.var, a.var, a.shift)
    if b.shift:
        placed = placed.substitute(b.var, b.var, b.shift)
    return placed


def _additive_series(rule: ExchangeRule, a: Letter, b: Letter, window: Window,
                     target: Window) -> HSeries:
    bracket = rule.additive
    slots = {"_1": a, "_2": b}
    pair_window = Window(
        tuple(bound for bound in target.bounds if bound[0] in (a.var, b.var)),
        window.hmin, window.hmax,
    )
    order = window.hmax + 3
    bracket_ops = [op_make(name, order, slots[slot].var, **dict(params))
                   for name, slot, params in bracket.ops]
    letter_ops = [op_make(letter.op, order, letter.var) for letter in (a, b) if letter.op]
    kernel = bracket.kernel.rename({"_1": a.var, "_2": b.var})
    wide = _reach_window(pair_window, bracket_ops + letter_ops,
                         [letter.var for letter in (a, b) if letter.shift])
    if bracket.log:
        series = log_series(single_kernel(kernel, "log bracket"), wide)
    else:
        series = expand(kernel, wide)
    for op in bracket_ops:
        series = op.apply(series)
    for letter in (a, b):
        if letter.shift:
            series = series.shift(letter.var, letter.shift)
    for op in letter_ops:
        series = op.apply(series)
    if bracket.sign != 1:
        series = series.scale(bracket.sign)
    return series.restrict(pair_window).extend(target)


def _reach_window(window: Window, ops: list[OperatorSeries], shifted: list[str]) -> Window:
    """
    `window` raised at the top by what the operators and shifts read.

    ∂^d and the binomial shift series read degrees above the one they
    produce; expanding this much higher keeps the output exact on `window`.
    """
    reach = {v: 0 for v in window.vars}
    for op in ops:
        reach[op.var] += max(op.orders, default=0)
    for var in shifted:
        reach[var] += window.hmax - min(window.hmin, -1)
    return Window(tuple((v, lo, hi + reach[v]) for v, lo, hi in window.bounds),
                  window.hmin, window.hmax)


def _exchange(key: TermKey, coef: Coefficient, i: int, rules: RuleSet, window: Window,
              order: tuple[str, ...]) -> list[tuple[TermKey, Coefficient]]:
    word, deltas = key
    a, b = word[i], word[i + 1]
    rule = rules.rule(a.name, b.name)
    if (a.op or b.op) and rule.kind in (EXCHANGE, WEAK):
        if rule.kind == WEAK or rule.deltas or rule.kernel != IotaKernel.one():
            raise RuleError(f"operator-processed letter in multiplicative exchange {a.describe()} {b.describe()}")
    swapped = word[:i] + (b, a) + word[i + 2:]
    out: list[tuple[TermKey, Coefficient]] = []

    if rule.kind == WEAK:
        divisor = single_kernel(_place(rule.divisor, a, b), "weak divisor")
        factor = _place(rule.kernel, a, b) * divisor.inverse()
        out.append(((swapped, deltas), coefficient_mul(coef, factor)))
    elif rule.kind in (EXCHANGE, COMMUTE):
        out.append(((swapped, deltas), coefficient_mul(coef, _place(rule.kernel, a, b))))
    else:
        out.append(((swapped, deltas), coef))

    for term in rule.deltas:
        slots = {"_1": a, "_2": b}
        replacement = tuple(
            Letter(rules.symbol(s.symbol), slots[s.slot].var, slots[s.slot].shift + s.shift)
            for s in term.word
        )
        new_coef = coefficient_mul(coef, _place(term.coefficient, a, b))
        # a.var + a.shift = b.var + b.shift + term.shift
        out.append(constrain(
            (word[:i] + replacement + word[i + 2:], deltas), new_coef,
            a.var, b.var, b.shift + term.shift - a.shift, order,
        ))

    if rule.kind == ADDITIVE:
        target = term_window(window, order, key)
        series = _additive_series(rule, a, b, window, target)
        keep = rule.additive.keep
        survivors = () if keep is None else ((a,) if keep == "_1" else (b,))
        out.append(((word[:i] + survivors + word[i + 2:], deltas), coefficient_mul(coef, series)))
    return out


# ── Normal ordering ──────────────────────────────────────────


def normal_order(expr: CurrentExpr, rules: RuleSet, window: Window, N: int | None = None,
                 strategy: str = LEFTMOST, seed: int = 0, max_steps: int = MAX_STEPS) -> CurrentExpr:
    """
    Rewrite every word into normal order under `rules`.

    Symbolic coefficients stay KernelSums; additive brackets contribute
    HSeries coefficients on `window` (ħ-order capped at N when given).

    Raises:
        RuleError: missing exchange rule, or more than max_steps rewrites
        WindowError: `window` lacks a variable of the expression
    """
    if strategy not in STRATEGIES:
        raise RuleError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    missing = [v for v in expr.variables if v not in window.vars]
    if missing:
        raise WindowError(f"normal_order: window lacks {missing}")
    if N is not None:
        # operator-processed brackets lose ħ-orders; two spare orders cover F and G
        window = window.with_hbar(window.hmin, N + 2)
    order = expr.variables
    rng = random.Random(seed)
    trace: deque[str] = deque(maxlen=8)
    pending = list(expr.terms.items())
    done: list[tuple[TermKey, Coefficient]] = []
    steps = 0

    while pending:
        key, coef = pending.pop()
        word, deltas = key
        spots = _spots(word, coef, rules, order)
        if not spots:
            done.append((key, coef))
            continue
        i, action = spots[0] if strategy == LEFTMOST else rng.choice(spots)
        steps += 1
        if steps > max_steps:
            raise RuleError(
                f"normal ordering under {rules.name} exceeded {max_steps} steps; last: "
                + " | ".join(trace)
            )
        trace.append(f"{action}@{i} {describe_key(key)}")
        if action == CANCEL:
            pending.append(((word[:i] + word[i + 2:], deltas), coef))
        else:
            pending.extend(_exchange(key, coef, i, rules, window, order))

    logger.debug("normal_order under %s: %d steps, %d words", rules.name, steps, len(done))
    return CurrentExpr(expr.variables, done)


def expand_coefficients(expr: CurrentExpr, window: Window) -> dict[str, HSeries]:
    """Every coefficient as an HSeries on the term window, keyed by the word's description."""
    out: dict[str, HSeries] = {}
    for key, coef in expr.sorted_terms():
        target = term_window(window, expr.variables, key)
        out[describe_key(key)] = coef if isinstance(coef, HSeries) else expand(coef, target)
    return out


# ── Equality ─────────────────────────────────────────────────


def _nonzero(key: TermKey, coef: Coefficient, window: Window,
             variables: tuple[str, ...], N: int | None) -> dict[str, Any] | None:
    """Witness if the coefficient of `key` does not vanish, else None."""
    word = describe_key(key)
    if isinstance(coef, KernelSum):
        residual = rational_identity_check(coef, 0)
        if residual["status"] != "pass":
            return {"word": word, "coefficient": coef.describe(), "residual": residual["witness"]}
        if directions_coherent(coef):
            return None
        logger.warning("incoherent expansion directions on %s; comparing on the window", word)
        try:
            coef = expand(coef, term_window(window, variables, key))
        except ValueError as exc:
            raise OutOfWindowError(f"coefficient of {word} cannot be expanded: {exc}") from exc
    limit = coef.window.hmax if N is None else min(N, coef.window.hmax)
    for (h, exps), c in sorted(coef.terms.items()):
        if h < limit:
            return {"word": word, "coefficient": f"{c}·{coef.format_key((h, exps))}"}
    return None


def expr_equal(lhs: CurrentExpr, rhs: CurrentExpr, rules: RuleSet, window: Window,
               N: int | None = None, name: str = "expr_equal", strategy: str = LEFTMOST,
               seed: int = 0) -> dict[str, Any]:
    """Compare normal forms; the witness is the first surviving word and its coefficient."""
    normal = normal_order(lhs - rhs, rules, window, N, strategy, seed)
    for key, coef in normal.sorted_terms():
        witness = _nonzero(key, coef, window, normal.variables, N)
        if witness is not None:
            return check_result(
                name, False, f"normal forms differ on {witness['word']}",
                witness, words=len(normal),
            )
    return check_result(name, True, f"normal forms agree under {rules.name}", words=len(normal))


def describe_normal_form(expr: CurrentExpr) -> list[str]:
    return [f"{describe_coefficient(c)} · {describe_key(k)}" for k, c in expr.sorted_terms()]
