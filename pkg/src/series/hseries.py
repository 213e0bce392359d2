"""
HSeries — windowed, ħ-truncated multivariate Laurent series.

Coefficients are exact Fractions keyed by (ħ-power, exponent vector).
Every series carries the Window on which it is exact and, per variable,
bounds on the support of the true (untruncated) series. The support
bounds are what allow a product or a shift to stay exact past the
window edge: a degree outside the support is known to be zero.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from fractions import Fraction
from math import factorial
from typing import Any, Union

from src.errors import OutOfWindowError, TruncationError, WindowError
from src.series.window import (
    INF,
    Bound,
    Window,
    falling_factorial,
    generalized_binomial,
    window_after,
)

logger = logging.getLogger(__name__)

Scalar = Union[int, Fraction, str]
Key = tuple[int, tuple[int, ...]]

EMPTY: Bound = (INF, -INF)


def to_scalar(value: Scalar) -> Fraction:
    if isinstance(value, Fraction):
        return value
    return Fraction(value)


def _is_empty(bound: Bound) -> bool:
    return bound[0] > bound[1]


def _hull(a: Bound, b: Bound) -> Bound:
    return min(a[0], b[0]), max(a[1], b[1])


def _cut(window: Window, other: Window) -> Window:
    """Per-variable intersection of `window` with `other`; ħ range of `window`."""
    other = other.reorder(window.vars) if other.vars != window.vars else other
    return Window(
        tuple(
            (v, max(lo, other.interval(v)[0]), min(hi, other.interval(v)[1]))
            for v, lo, hi in window.bounds
        ),
        window.hmin, window.hmax,
    )


def _sum(a: Bound, b: Bound) -> Bound:
    if _is_empty(a) or _is_empty(b):
        return EMPTY
    return a[0] + b[0], a[1] + b[1]


class HSeries:
    """Exact truncation of a formal series in named variables and ħ."""

    __slots__ = ("vars", "window", "support", "_terms")

    def __init__(
        self,
        variables: Sequence[str],
        terms: Mapping[Key, Scalar],
        window: Window,
        support: Mapping[str, Bound] | None = None,
    ) -> None:
        self.vars: tuple[str, ...] = tuple(variables)
        if window.vars != self.vars:
            raise WindowError(f"window variables {window.vars} do not match {self.vars}")
        window.require_nonempty("HSeries")
        self.window = window
        support = dict(support or {})
        self.support: dict[str, Bound] = {v: support.get(v, (-INF, INF)) for v in self.vars}
        self._terms: dict[Key, Fraction] = {}
        for (hpow, exps), coef in terms.items():
            if len(exps) != len(self.vars):
                raise WindowError(f"key {exps} has wrong arity for {self.vars}")
            c = to_scalar(coef)
            if c and window.contains(hpow, exps):
                self._terms[(hpow, tuple(exps))] = c

    # ── Constructors ─────────────────────────────────────────

    @classmethod
    def zero(cls, window: Window) -> HSeries:
        return cls(window.vars, {}, window, {v: EMPTY for v in window.vars})

    @classmethod
    def constant(cls, value: Scalar, window: Window, hpow: int = 0) -> HSeries:
        zeros = tuple(0 for _ in window.vars)
        return cls.polynomial({(hpow, zeros): value}, window)

    @classmethod
    def monomial(
        cls, coef: Scalar, hpow: int, exps: Mapping[str, int], window: Window,
    ) -> HSeries:
        key = (hpow, tuple(exps.get(v, 0) for v in window.vars))
        return cls.polynomial({key: coef}, window)

    @classmethod
    def polynomial(cls, terms: Mapping[Key, Scalar], window: Window) -> HSeries:
        """A finite series; its support is read off the keys."""
        live = {k: c for k, c in terms.items() if to_scalar(c)}
        support: dict[str, Bound] = {}
        for i, v in enumerate(window.vars):
            degrees = [exps[i] for _, exps in live]
            support[v] = (min(degrees), max(degrees)) if degrees else EMPTY
        return cls(window.vars, live, window, support)

    # ── Access ───────────────────────────────────────────────

    @property
    def terms(self) -> dict[Key, Fraction]:
        return dict(self._terms)

    def coefficient(self, hpow: int, exps: Mapping[str, int] | Sequence[int]) -> Fraction:
        key = self._key(exps)
        if not self.window.contains(hpow, key):
            raise OutOfWindowError(
                f"coefficient ħ^{hpow}·{key} outside window {self.window.describe()}"
            )
        return self._terms.get((hpow, key), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def min_hpow(self) -> int | None:
        return min((h for h, _ in self._terms), default=None)

    @property
    def complete_in_vars(self) -> bool:
        """True when no term of the true series lies outside the variable window."""
        for v in self.vars:
            lo, hi = self.window.interval(v)
            s = self.support[v]
            if not _is_empty(s) and (s[0] < lo or s[1] > hi):
                return False
        return True

    def _key(self, exps: Mapping[str, int] | Sequence[int]) -> tuple[int, ...]:
        if isinstance(exps, Mapping):
            return tuple(exps.get(v, 0) for v in self.vars)
        return tuple(exps)

    def _index(self, var: str) -> int:
        try:
            return self.vars.index(var)
        except ValueError:
            raise WindowError(f"unknown variable {var!r} (have {self.vars})") from None

    def _same_vars(self, other: HSeries, what: str) -> None:
        if self.vars != other.vars:
            raise WindowError(f"{what}: mismatched variables {self.vars} vs {other.vars}")

    # ── Ring structure ───────────────────────────────────────

    def __add__(self, other: HSeries) -> HSeries:
        self._same_vars(other, "add")
        window = window_after("add", [self.window, other.window])
        terms = dict(self._terms)
        for k, c in other._terms.items():
            terms[k] = terms.get(k, Fraction(0)) + c
        support = {v: _hull(self.support[v], other.support[v]) for v in self.vars}
        return HSeries(self.vars, terms, window, support)

    def __neg__(self) -> HSeries:
        return self.scale(-1)

    def __sub__(self, other: HSeries) -> HSeries:
        return self + (-other)

    def scale(self, c: Scalar, hpow: int = 0) -> HSeries:
        """Multiply by c·ħ^hpow."""
        c = to_scalar(c)
        window = self.window.with_hbar(self.window.hmin + hpow, self.window.hmax + hpow)
        terms = {(h + hpow, e): c * a for (h, e), a in self._terms.items()}
        support = self.support if c else {v: EMPTY for v in self.vars}
        return HSeries(self.vars, terms, window, support)

    def __mul__(self, other: HSeries | Scalar) -> HSeries:
        if not isinstance(other, HSeries):
            return self.scale(other)
        self._same_vars(other, "mul")
        window = window_after(
            "mul", [self.window, other.window], [self.support, other.support],
        ).require_nonempty("mul")
        terms: dict[Key, Fraction] = {}
        for (ha, ea), ca in self._terms.items():
            for (hb, eb), cb in other._terms.items():
                h = ha + hb
                if h >= window.hmax:
                    continue
                e = tuple(x + y for x, y in zip(ea, eb))
                terms[(h, e)] = terms.get((h, e), Fraction(0)) + ca * cb
        support = {v: _sum(self.support[v], other.support[v]) for v in self.vars}
        return HSeries(self.vars, terms, window, support)

    __rmul__ = __mul__

    def power(self, n: int) -> HSeries:
        if n < 0:
            raise TruncationError("negative powers are not series operations")
        result = HSeries.constant(1, self.window.with_hbar(0, self.window.hmax - self.window.hmin))
        for _ in range(n):
            result = result * self
        return result

    # ── Calculus ─────────────────────────────────────────────

    def derive(self, var: str, order: int = 1) -> HSeries:
        i = self._index(var)
        window = window_after("derive", [self.window], var=var, order=order)
        terms: dict[Key, Fraction] = {}
        for (h, e), c in self._terms.items():
            f = falling_factorial(e[i], order)
            if f:
                e2 = e[:i] + (e[i] - order,) + e[i + 1:]
                terms[(h, e2)] = c * f
        support = dict(self.support)
        lo, hi = support[var]
        support[var] = EMPTY if _is_empty((lo, hi)) else (lo - order, hi - order)
        return HSeries(self.vars, terms, window, support)

    def shift(self, var: str, c: Scalar, hbar_power: int = 1) -> HSeries:
        """Evaluate at var + c·ħ^hbar_power via the binomial series."""
        c = to_scalar(c)
        if c == 0:
            return self
        if hbar_power < 1:
            raise TruncationError(
                f"shift of {var} by an ħ-free amount ({c}·ħ^{hbar_power}) does not terminate"
            )
        i = self._index(var)
        window = window_after("shift", [self.window], [self.support], var=var)
        window.require_nonempty("shift")
        terms: dict[Key, Fraction] = {}
        for (h, e), a in self._terms.items():
            k = 0
            while h + k * hbar_power < window.hmax:
                b = generalized_binomial(e[i], k)
                if b:
                    key = (h + k * hbar_power, e[:i] + (e[i] - k,) + e[i + 1:])
                    terms[key] = terms.get(key, Fraction(0)) + a * b * c ** k
                k += 1
        support = dict(self.support)
        lo, hi = support[var]
        if not _is_empty((lo, hi)):
            span = (window.hmax - 1 - window.hmin) // hbar_power
            support[var] = (max(0, lo - span) if lo >= 0 else lo - span, hi)
        return HSeries(self.vars, terms, window, support)

    def residue(self, var: str) -> HSeries:
        """Coefficient series of var^{-1}."""
        i = self._index(var)
        lo, hi = self.window.interval(var)
        if not lo <= -1 <= hi:
            raise WindowError(f"residue in {var}: window [{lo},{hi}] excludes degree -1")
        window = window_after("residue", [self.window], var=var)
        terms = {
            (h, e[:i] + e[i + 1:]): c for (h, e), c in self._terms.items() if e[i] == -1
        }
        support = {v: b for v, b in self.support.items() if v != var}
        return HSeries(window.vars, terms, window, support)

    def sing_part(self, var: str) -> HSeries:
        i = self._index(var)
        terms = {k: c for k, c in self._terms.items() if k[1][i] < 0}
        support = dict(self.support)
        lo, hi = support[var]
        support[var] = (lo, min(hi, -1))
        return HSeries(self.vars, terms, self.window, support)

    def reg_part(self, var: str) -> HSeries:
        i = self._index(var)
        terms = {k: c for k, c in self._terms.items() if k[1][i] >= 0}
        support = dict(self.support)
        lo, hi = support[var]
        support[var] = (max(lo, 0), hi)
        return HSeries(self.vars, terms, self.window, support)

    def substitute_equal(self, v_from: str, v_to: str) -> HSeries:
        """Replace v_from by v_to, merging exponents; v_from leaves the variable set."""
        i, j = self._index(v_from), self._index(v_to)
        window = window_after(
            "substitute_equal", [self.window], [self.support], v_from=v_from, v_to=v_to,
        )
        window.require_nonempty("substitute_equal")
        terms: dict[Key, Fraction] = {}
        for (h, e), c in self._terms.items():
            merged = list(e)
            merged[j] += merged[i]
            del merged[i]
            key = (h, tuple(merged))
            terms[key] = terms.get(key, Fraction(0)) + c
        support = {v: b for v, b in self.support.items() if v != v_from}
        support[v_to] = _sum(self.support[v_from], self.support[v_to])
        return HSeries(window.vars, terms, window, support)

    # ── log / exp ────────────────────────────────────────────

    def _hbar_floor(self) -> int:
        if self.window.hmin >= 1:
            return self.window.hmin
        low = self.min_hpow
        if low is None:
            return self.window.hmax
        if low >= 1 and self.complete_in_vars:
            return low
        raise TruncationError(
            "series is not topologically nilpotent: "
            f"ħ-floor {self.window.hmin}, lowest stored ħ-power {low}"
        )

    def _lifted(self) -> tuple[HSeries, int]:
        floor = self._hbar_floor()
        if floor >= self.window.hmax:
            return self, floor
        if floor != self.window.hmin:
            logger.debug("ħ floor lifted from %d to %d", self.window.hmin, floor)
        lifted = HSeries(
            self.vars, self._terms, self.window.with_hbar(floor, self.window.hmax), self.support,
        )
        return lifted, floor

    def log1p(self) -> HSeries:
        """log(1 + f) = Σ (-1)^{n-1} f^n / n, truncated."""
        f, floor = self._lifted()
        result = HSeries.zero(f.window)
        if f.is_zero():
            return result
        power = f
        n = 1
        while n * floor < f.window.hmax:
            result = result + power.scale(Fraction((-1) ** (n - 1), n))
            power = power * f
            n += 1
        return result

    def exp0(self) -> HSeries:
        """exp(f) = Σ f^n / n!, truncated."""
        f, floor = self._lifted()
        one = HSeries.constant(1, f.window.with_hbar(0, f.window.hmax))
        if f.is_zero():
            return one
        result = one
        power = f
        n = 1
        while n * floor < f.window.hmax:
            result = result + power.scale(Fraction(1, factorial(n)))
            power = power * f
            n += 1
        return result

    # ── Windows and variables ────────────────────────────────

    def restrict(self, window: Window) -> HSeries:
        # the ħ floor is a property of the series and is kept
        cut = _cut(self.window, window).with_hbar(
            self.window.hmin, min(window.hmax, self.window.hmax),
        )
        return HSeries(self.vars, self._terms, cut, self.support)

    def extend(self, window: Window) -> HSeries:
        """Embed into the variables of `window`; new variables get their interval there."""
        missing = [v for v in self.vars if v not in window.vars]
        if missing:
            raise WindowError(f"extend: target window lacks {missing}")
        bounds = tuple(
            (v, *(self.window.interval(v) if v in self.vars else window.interval(v)))
            for v in window.vars
        )
        target = Window(bounds, self.window.hmin, self.window.hmax)
        index = [self.vars.index(v) if v in self.vars else None for v in window.vars]
        terms = {
            (h, tuple(e[i] if i is not None else 0 for i in index)): c
            for (h, e), c in self._terms.items()
        }
        support = {v: self.support.get(v, (0, 0)) for v in window.vars}
        return HSeries(window.vars, terms, target, support)

    def rename(self, mapping: Mapping[str, str]) -> HSeries:
        new_vars = tuple(mapping.get(v, v) for v in self.vars)
        window = Window(
            tuple((mapping.get(v, v), lo, hi) for v, lo, hi in self.window.bounds),
            self.window.hmin, self.window.hmax,
        )
        support = {mapping.get(v, v): b for v, b in self.support.items()}
        return HSeries(new_vars, self._terms, window, support)

    # ── Comparison ───────────────────────────────────────────

    def difference_witness(self, other: HSeries, window: Window | None = None) -> Key | None:
        """First key (sorted) on the common window where the two series differ."""
        self._same_vars(other, "compare")
        # below its floor each series is known to vanish, so ħ starts at the lower floor
        common = self.window.intersect(other.window)
        if window is not None:
            common = _cut(common, window).with_hbar(
                max(common.hmin, window.hmin), min(common.hmax, window.hmax),
            )
        for key in sorted(set(self._terms) | set(other._terms)):
            if not common.contains(*key):
                continue
            if self._terms.get(key, Fraction(0)) != other._terms.get(key, Fraction(0)):
                return key
        return None

    def equal_on(self, other: HSeries, window: Window | None = None) -> bool:
        return self.difference_witness(other, window) is None

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, HSeries) or self.vars != other.vars:
            return NotImplemented
        return self.equal_on(other)

    __hash__ = None  # type: ignore[assignment]

    def format_key(self, key: Key) -> str:
        h, e = key
        parts = [f"ħ^{h}"] if h else []
        parts += [f"{v}^{x}" for v, x in zip(self.vars, e) if x]
        return "·".join(parts) or "1"

    def __repr__(self) -> str:
        items = sorted(self._terms.items())[:8]
        body = " + ".join(f"{c}·{self.format_key(k)}" for k, c in items) or "0"
        more = " + …" if len(self._terms) > 8 else ""
        return f"HSeries({body}{more} on {self.window.describe()})"


# ── Functional surface ───────────────────────────────────────


def add(a: HSeries, b: HSeries) -> HSeries:
    return a + b


def mul(a: HSeries, b: HSeries) -> HSeries:
    return a * b


def derive(a: HSeries, var: str, order: int = 1) -> HSeries:
    return a.derive(var, order)


def shift(a: HSeries, var: str, c: Scalar) -> HSeries:
    return a.shift(var, c)


def residue(a: HSeries, var: str) -> HSeries:
    return a.residue(var)


def sing_part(a: HSeries, var: str) -> HSeries:
    return a.sing_part(var)


def reg_part(a: HSeries, var: str) -> HSeries:
    return a.reg_part(var)


def substitute_equal(a: HSeries, v_from: str, v_to: str) -> HSeries:
    return a.substitute_equal(v_from, v_to)


def log1p(f: HSeries) -> HSeries:
    return f.log1p()


def exp0(f: HSeries) -> HSeries:
    return f.exp0()


def delta(num: str, den: str, d: int, window: Window) -> HSeries:
    """
    Truncation of (1/d!)·∂_num^d δ(num/den) to `window`.

    δ(w/z) = Σ_e w^e z^{-e-1}; the d-th normalized derivative is
    Σ_f C(f+d, d) num^f den^{-f-d-1}. Other variables of the window
    carry exponent 0.
    """
    if d < 0:
        raise WindowError(f"delta derivative order must be nonnegative, got {d}")
    window.require_nonempty("delta")
    i, j = window.vars.index(num), window.vars.index(den)
    lo, hi = window.interval(num)
    terms: dict[Key, Fraction] = {}
    if window.hmin <= 0 < window.hmax:
        for f in range(lo, hi + 1):
            exps = [0] * len(window.vars)
            exps[i] = f
            exps[j] = -f - d - 1
            c = generalized_binomial(f + d, d)
            if c:
                terms[(0, tuple(exps))] = Fraction(c)
    support = {v: (0, 0) for v in window.vars}
    support[num] = (-INF, INF)
    support[den] = (-INF, INF)
    return HSeries(window.vars, terms, window, support)


def from_terms(
    variables: Iterable[str], terms: Mapping[Key, Scalar], window: Window,
    support: Mapping[str, Bound] | None = None,
) -> HSeries:
    return HSeries(tuple(variables), terms, window, support)
