"""
Exchange rules — rule decks for normal ordering, with a JSON codec.

A rule for the ordered pair (S, T) is written in the slot variables _1
(the variable of S) and _2 (the variable of T):

    exchange   S(_1)T(_2) = k·T(_2)S(_1) + Σ c·δ(_1 = _2 + sħ)·word
    weak       p·S(_1)T(_2) = q·T(_2)S(_1)      (usable only on multiples of p)
    additive   S(_1)T(_2) = T(_2)S(_1) + c(_1,_2)·(surviving letter)
    commute    S(_1)T(_2) = T(_2)S(_1)

The rule for (T, S) is derived unless the deck declares one.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any

from src.errors import ConfigError, RuleError
from src.kernels.factors import IotaKernel, KernelSum, LinearFactor, as_sum
from src.rewrite.symbols import ADDITIVE as ADDITIVE_KIND, CurrentSymbol
from src.series.hseries import to_scalar

logger = logging.getLogger(__name__)

SLOTS = ("_1", "_2")
SWAP = {"_1": "_2", "_2": "_1"}

EXCHANGE = "exchange"
WEAK = "weak"
ADDITIVE = "additive"
COMMUTE = "commute"

RULE_KINDS = (EXCHANGE, WEAK, ADDITIVE, COMMUTE)


def single_kernel(kernel: KernelSum, what: str) -> IotaKernel:
    kernels = kernel.kernels
    if len(kernels) != 1:
        raise RuleError(f"{what}: expected a single kernel, got {kernel.describe()}")
    return kernels[0]


def directed(kernel: KernelSum, large: str | None) -> KernelSum:
    """Give every pole of a slot kernel the direction `large` (a slot name)."""
    if large is None:
        return kernel
    return kernel.with_direction((large, SWAP[large]))


@dataclass(frozen=True)
class SlotLetter:
    """A replacement letter: symbol at slot + shift·ħ."""

    symbol: str
    slot: str
    shift: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        if self.slot not in SLOTS:
            raise ConfigError(f"replacement letter {self.symbol}: unknown slot {self.slot!r}")
        object.__setattr__(self, "shift", to_scalar(self.shift))


@dataclass(frozen=True, eq=False)
class DeltaTerm:
    """coefficient · δ(_1 = _2 + shift·ħ) · word, replacing the rewritten pair."""

    coefficient: KernelSum
    shift: Fraction
    word: tuple[SlotLetter, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficient", as_sum(self.coefficient))
        object.__setattr__(self, "shift", to_scalar(self.shift))

    def swapped(self, factor: KernelSum) -> DeltaTerm:
        return DeltaTerm(
            self.coefficient.rename(SWAP) * factor,
            -self.shift,
            tuple(replace(letter, slot=SWAP[letter.slot]) for letter in self.word),
        )


@dataclass(frozen=True, eq=False)
class AdditiveTerm:
    """
    The bracket coefficient of an additive rule.

    The series is log(kernel) when `log` is set, else the expansion of
    `kernel`; each (op, slot, params) in `ops` is then applied in the
    variable of that slot. `keep` is the slot of the surviving letter, or
    None when the bracket is central.
    """

    kernel: KernelSum
    log: bool = False
    ops: tuple[tuple[str, str, tuple[tuple[str, Fraction], ...]], ...] = ()
    sign: int = 1
    keep: str | None = "_2"

    def __post_init__(self) -> None:
        object.__setattr__(self, "kernel", as_sum(self.kernel))

    def swapped(self) -> AdditiveTerm:
        return AdditiveTerm(
            self.kernel.rename(SWAP),
            self.log,
            tuple((name, SWAP[slot], params) for name, slot, params in self.ops),
            -self.sign,
            None if self.keep is None else SWAP[self.keep],
        )


@dataclass(frozen=True, eq=False)
class ExchangeRule:
    """Rewrite S(_1)T(_2) into T(_2)S(_1) plus correction terms."""

    left: str
    right: str
    kind: str = COMMUTE
    kernel: KernelSum = field(default_factory=lambda: as_sum(1))
    large: str | None = None
    divisor: KernelSum | None = None
    deltas: tuple[DeltaTerm, ...] = ()
    additive: AdditiveTerm | None = None
    source: str = ""

    def __post_init__(self) -> None:
        if self.kind not in RULE_KINDS:
            raise ConfigError(f"rule {self.left},{self.right}: kind {self.kind!r} not in {RULE_KINDS}")
        object.__setattr__(self, "kernel", directed(as_sum(self.kernel), self.large))
        if self.kind == WEAK and self.divisor is None:
            raise ConfigError(f"weak rule {self.left},{self.right} needs a divisor")
        if self.kind == ADDITIVE and self.additive is None:
            raise ConfigError(f"additive rule {self.left},{self.right} needs its bracket")
        if self.large is not None and self.large not in SLOTS:
            raise ConfigError(f"rule {self.left},{self.right}: unknown slot {self.large!r}")

    @property
    def pair(self) -> tuple[str, str]:
        return self.left, self.right

    def reversed(self) -> ExchangeRule:
        """The rule for (right, left) implied by this one."""
        source = f"reverse of {self.source or self.left + ',' + self.right}"
        if self.kind == COMMUTE:
            return replace(self, left=self.right, right=self.left, source=source)
        if self.kind == WEAK:
            return ExchangeRule(
                self.right, self.left, WEAK,
                kernel=self.divisor.rename(SWAP), divisor=self.kernel.rename(SWAP), source=source,
            )
        if self.kind == ADDITIVE:
            return ExchangeRule(
                self.right, self.left, ADDITIVE, additive=self.additive.swapped(), source=source,
            )
        large = None if self.large is None else SWAP[self.large]
        inverse = single_kernel(self.kernel, f"reverse of {self.left},{self.right}")
        order = None if self.large is None else (self.large, SWAP[self.large])
        k_inv = as_sum(inverse.inverse(order)).rename(SWAP)
        return ExchangeRule(
            self.right, self.left, EXCHANGE,
            kernel=k_inv, large=large,
            deltas=tuple(d.swapped(-k_inv) for d in self.deltas),
            source=source,
        )

    # ── JSON ─────────────────────────────────────────────────

    def to_json(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "left": self.left, "right": self.right, "kind": self.kind,
            "kernel": self.kernel.to_json(), "large": self.large,
        }
        if self.divisor is not None:
            data["divisor"] = self.divisor.to_json()
        if self.deltas:
            data["deltas"] = [
                {
                    "coefficient": d.coefficient.to_json(),
                    "shift": str(d.shift),
                    "word": [[s.symbol, s.slot, str(s.shift)] for s in d.word],
                }
                for d in self.deltas
            ]
        if self.additive is not None:
            data["additive"] = {
                "kernel": self.additive.kernel.to_json(),
                "log": self.additive.log,
                "ops": [
                    [name, slot, {k: str(v) for k, v in params}]
                    for name, slot, params in self.additive.ops
                ],
                "sign": self.additive.sign,
                "keep": self.additive.keep,
            }
        if self.source:
            data["source"] = self.source
        return data

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> ExchangeRule:
        try:
            additive = None
            if "additive" in data:
                a = data["additive"]
                additive = AdditiveTerm(
                    kernel_from_json(a["kernel"]),
                    bool(a.get("log", False)),
                    tuple(
                        (name, slot, tuple((k, to_scalar(v)) for k, v in params.items()))
                        for name, slot, params in a.get("ops", [])
                    ),
                    int(a.get("sign", 1)),
                    a.get("keep", "_2"),
                )
            return cls(
                data["left"], data["right"], data.get("kind", COMMUTE),
                kernel=kernel_from_json(data.get("kernel", [])) if "kernel" in data else as_sum(1),
                large=data.get("large"),
                divisor=kernel_from_json(data["divisor"]) if "divisor" in data else None,
                deltas=tuple(
                    DeltaTerm(
                        kernel_from_json(d["coefficient"]),
                        to_scalar(d["shift"]),
                        tuple(SlotLetter(s, slot, to_scalar(shift)) for s, slot, shift in d.get("word", [])),
                    )
                    for d in data.get("deltas", [])
                ),
                additive=additive,
                source=data.get("source", ""),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed rule {dict(data).get('left')},{dict(data).get('right')}: {exc}") from exc


def kernel_from_json(data: list[Mapping[str, Any]]) -> KernelSum:
    kernels = []
    for k in data:
        factors = [
            LinearFactor(left, right, to_scalar(shift), int(exp), large)
            for left, right, shift, exp, large in k.get("factors", [])
        ]
        kernels.append(IotaKernel.make(to_scalar(k["scale"]), int(k.get("hpow", 0)), factors))
    return KernelSum(kernels)


# ── Rule sets ────────────────────────────────────────────────


class RuleSet:
    """
    An immutable rule deck.

    Symbols are normal-ordered by rank. Pairs listed in `frozen` are never
    exchanged; a pair with neither a rule nor a frozen entry raises
    RuleError when the engine meets it.
    """

    def __init__(self, name: str, symbols: Iterable[CurrentSymbol],
                 rules: Iterable[ExchangeRule] = (), frozen: Iterable[tuple[str, str]] = (),
                 kappa: Fraction | int = 0) -> None:
        self.name = name
        self.kappa = to_scalar(kappa)
        self._symbols: dict[str, CurrentSymbol] = {}
        for s in symbols:
            if s.name in self._symbols:
                raise ConfigError(f"deck {name}: duplicate symbol {s.name}")
            self._symbols[s.name] = s
        self._declared: list[ExchangeRule] = []
        self._rules: dict[tuple[str, str], ExchangeRule] = {}
        for rule in rules:
            for sym in (rule.left, rule.right):
                self.symbol(sym)
            for d in rule.deltas:
                self._check_replacement(rule, d)
            if any(r.pair == rule.pair for r in self._declared):
                raise ConfigError(f"deck {name}: two rules for {rule.left},{rule.right}")
            self._declared.append(rule)
            self._rules[rule.pair] = rule
        for rule in self._declared:
            flipped = (rule.right, rule.left)
            if flipped not in self._rules:
                self._rules[flipped] = rule.reversed()
        self.frozen: frozenset[tuple[str, str]] = frozenset(
            p for a, b in frozen for p in ((a, b), (b, a))
        )
        logger.debug("deck %s: %d symbols, %d rules", name, len(self._symbols), len(self._rules))

    def _check_replacement(self, rule: ExchangeRule, term: DeltaTerm) -> None:
        """Replacement words are shorter than the pair or rank strictly below it."""
        ranks = [self.symbol(letter.symbol).rank for letter in term.word]
        floor = min(self.rank(rule.left), self.rank(rule.right))
        if len(ranks) >= 2 and max(ranks) >= floor:
            raise ConfigError(
                f"deck {self.name}: δ-term of {rule.left},{rule.right} does not decrease the word order"
            )

    # ── Lookup ───────────────────────────────────────────────

    @property
    def symbols(self) -> tuple[CurrentSymbol, ...]:
        return tuple(self._symbols.values())

    @property
    def declared(self) -> tuple[ExchangeRule, ...]:
        return tuple(self._declared)

    def symbol(self, name: str) -> CurrentSymbol:
        try:
            return self._symbols[name]
        except KeyError:
            raise ConfigError(f"deck {self.name}: unknown symbol {name!r}") from None

    def rank(self, name: str) -> int:
        return self.symbol(name).rank

    def is_frozen(self, left: str, right: str) -> bool:
        return (left, right) in self.frozen

    def has_rule(self, left: str, right: str) -> bool:
        return (left, right) in self._rules

    def rule(self, left: str, right: str) -> ExchangeRule:
        try:
            return self._rules[(left, right)]
        except KeyError:
            raise RuleError(f"deck {self.name}: no exchange rule for {left}, {right}") from None

    # ── Derived decks ────────────────────────────────────────

    def extended(self, symbols: Iterable[CurrentSymbol] = (), rules: Iterable[ExchangeRule] = (),
                 frozen: Iterable[tuple[str, str]] = (), name: str | None = None) -> RuleSet:
        """A new deck; added rules replace declared rules on the same unordered pair."""
        rules = list(rules)
        replaced = {frozenset(r.pair) for r in rules}
        kept = [r for r in self._declared if frozenset(r.pair) not in replaced]
        return RuleSet(
            name or self.name, [*self._symbols.values(), *symbols], kept + rules,
            [*{tuple(p) for p in self.frozen}, *frozen], self.kappa,
        )

    def without(self, *pairs: tuple[str, str], name: str | None = None) -> RuleSet:
        dropped = {frozenset(p) for p in pairs}
        return RuleSet(
            name or self.name, self._symbols.values(),
            [r for r in self._declared if frozenset(r.pair) not in dropped],
            self.frozen, self.kappa,
        )

    # ── JSON ─────────────────────────────────────────────────

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "kappa": str(self.kappa),
            "symbols": [s.to_json() for s in self._symbols.values()],
            "rules": [r.to_json() for r in self._declared],
            "frozen": sorted([a, b] for a, b in self.frozen if a <= b),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2, ensure_ascii=False)

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> RuleSet:
        try:
            symbols = [
                CurrentSymbol(s["name"], s.get("kind", "current"), int(s.get("rank", 0)),
                              s.get("node"), s.get("partner"))
                for s in data["symbols"]
            ]
            rules = [ExchangeRule.from_json(r) for r in data.get("rules", [])]
            frozen = [tuple(p) for p in data.get("frozen", [])]
            return cls(data["name"], symbols, rules, frozen, to_scalar(data.get("kappa", 0)))
        except KeyError as exc:
            raise ConfigError(f"rule deck is missing field {exc}") from exc

    @classmethod
    def loads(cls, text: str) -> RuleSet:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"rule deck JSON, line {exc.lineno}: {exc.msg}") from exc
        return cls.from_json(data)


def is_additive(symbol: CurrentSymbol) -> bool:
    return symbol.kind == ADDITIVE_KIND
