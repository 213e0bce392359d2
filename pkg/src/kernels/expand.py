"""
Expansion — ι-expansion of kernels onto a Window, by direct enumeration.

Every negative pair factor (L - S + cħ)^e with L large contributes
    C(e,k) C(k,t) (-1)^{k-t} c^t · L^{e-k} S^{k-t} ħ^t
and the enumeration visits small variables in reverse topological order
of the large→small edges, so each index is bounded by the window of the
variable it raises. Terms are produced exactly; nothing is truncated
except by the window and ħ^hmax.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from fractions import Fraction
from math import factorial
from typing import Any

from src.errors import KernelError, WindowError
from src.kernels.factors import IotaKernel, KernelSum, LinearFactor
from src.series.hseries import HSeries
from src.series.window import INF, Bound, Window, generalized_binomial

logger = logging.getLogger(__name__)

Option = tuple[dict[str, int], int, Fraction]

# store with get(kernel, window) and put(kernel, window, series); see src.storage.cache
_cache: Any = None


@contextmanager
def cached_expansions(cache: Any):
    """Route single-kernel expansions through `cache` (None disables) inside the block."""
    global _cache
    previous, _cache = _cache, cache
    try:
        yield cache
    finally:
        _cache = previous


def _free_options(f: LinearFactor, budget: int) -> list[Option]:
    """Expansions of factors whose index range is bounded without the window."""
    options: list[Option] = []
    if f.right is None:
        top = f.exp if f.exp >= 0 else budget - 1
        if f.shift == 0:
            top = 0
        for k in range(min(top, budget - 1) + 1):
            c = generalized_binomial(f.exp, k) * f.shift ** k
            if c:
                options.append(({f.left: f.exp - k}, k, Fraction(c)))
        return options
    e = f.exp
    for t in range(min(e, budget - 1) + 1 if f.shift else 1):
        for a in range(e - t + 1):
            b = e - t - a
            c = Fraction(factorial(e), factorial(a) * factorial(b) * factorial(t))
            c *= (-1) ** b * f.shift ** t
            options.append(({f.left: a, f.right: b}, t, c))
    return options


def _orientation(f: LinearFactor) -> tuple[str, str, Fraction, int]:
    """(large, small, shift', sign) with f = sign·(large - small + shift'ħ)."""
    if f.large is None:
        raise KernelError(f"factor {f.describe()} has no expansion direction")
    if f.large == f.left:
        return f.left, f.right, f.shift, 1
    return f.right, f.left, -f.shift, -1


def _topological_smalls(poles: list[LinearFactor], variables: tuple[str, ...]) -> list[str]:
    """Small variables ordered so that each is processed after everything it is large over."""
    edges: dict[str, set[str]] = {v: set() for v in variables}
    indegree = {v: 0 for v in variables}
    for f in poles:
        large, small, _, _ = _orientation(f)
        if small not in edges[large]:
            edges[large].add(small)
            indegree[small] += 1
    queue = [v for v in variables if indegree[v] == 0]
    order: list[str] = []
    while queue:
        v = queue.pop(0)
        order.append(v)
        for s in sorted(edges[v]):
            indegree[s] -= 1
            if indegree[s] == 0:
                queue.append(s)
    if len(order) != len(variables):
        raise KernelError("expansion directions form a cycle")
    return list(reversed(order))


def _support(kernel: IotaKernel, variables: tuple[str, ...], budget: int) -> dict[str, Bound]:
    support: dict[str, Bound] = {v: (0, 0) for v in variables}

    def bump(v: str, lo: float, hi: float) -> None:
        a, b = support[v]
        support[v] = (a + lo, b + hi)

    for f in kernel.factors:
        if f.right is None:
            if f.exp >= 0:
                bump(f.left, 0 if f.shift else f.exp, f.exp)
            else:
                bump(f.left, f.exp - (budget - 1) if f.shift else f.exp, f.exp)
        elif f.exp >= 0:
            bump(f.left, 0, f.exp)
            bump(f.right, 0, f.exp)
        else:
            large, small, _, _ = _orientation(f)
            bump(large, -INF, f.exp)
            bump(small, 0, INF)
    return support


def _expand_kernel(kernel: IotaKernel, window: Window) -> HSeries:
    variables = window.vars
    missing = [v for v in kernel.variables if v not in variables]
    if missing:
        raise WindowError(f"kernel variables {missing} not in window {variables}")
    hmin_out = min(kernel.hpow, window.hmax - 1)
    out_window = window.with_hbar(min(window.hmin, hmin_out), window.hmax)
    out_window.require_nonempty("expand")
    budget = window.hmax - kernel.hpow
    if budget <= 0 or kernel.is_zero:
        return HSeries.zero(out_window)

    free = [f for f in kernel.factors if not (f.is_pair and f.exp < 0)]
    poles = [f for f in kernel.factors if f.is_pair and f.exp < 0]
    smalls = _topological_smalls(poles, variables)
    groups = [(s, [f for f in poles if _orientation(f)[1] == s]) for s in smalls]
    groups = [(s, fs) for s, fs in groups if fs]
    bounds = {v: window.interval(v) for v in variables}

    terms: dict[tuple[int, tuple[int, ...]], Fraction] = {}

    def free_terms(i: int, exps: dict[str, int], used: int, coef: Fraction) -> Iterator[Option]:
        if i == len(free):
            yield exps, used, coef
            return
        for delta, t, c in _free_options(free[i], budget - used):
            if used + t >= budget:
                continue
            merged = dict(exps)
            for v, e in delta.items():
                merged[v] = merged.get(v, 0) + e
            yield from free_terms(i + 1, merged, used + t, coef * c)

    def pole_terms(g: int, i: int, exps: dict[str, int], used: int, coef: Fraction) -> None:
        if g == len(groups):
            key = tuple(exps.get(v, 0) for v in variables)
            if all(bounds[v][0] <= e <= bounds[v][1] for v, e in zip(variables, key)):
                k = (kernel.hpow + used, key)
                terms[k] = terms.get(k, Fraction(0)) + coef
            return
        small, factors = groups[g]
        if i == len(factors):
            # the small variable is final once its group is done
            e = exps.get(small, 0)
            if bounds[small][0] <= e <= bounds[small][1]:
                pole_terms(g + 1, 0, exps, used, coef)
            return
        f = factors[i]
        large, _, c, sign = _orientation(f)
        room = bounds[small][1] - exps.get(small, 0)
        for t in range(budget - used if c else 1):
            for j in range(room + 1):
                k = j + t
                value = (
                    generalized_binomial(f.exp, k) * generalized_binomial(k, t)
                    * (-1) ** j * c ** t * sign ** (f.exp % 2)
                )
                if not value:
                    continue
                merged = dict(exps)
                merged[large] = merged.get(large, 0) + f.exp - k
                merged[small] = merged.get(small, 0) + j
                pole_terms(g, i + 1, merged, used + t, coef * value)

    for exps, used, coef in free_terms(0, {}, 0, kernel.scale):
        pole_terms(0, 0, exps, used, coef)

    return HSeries(variables, terms, out_window, _support(kernel, variables, budget))


def _expand_cached(kernel: IotaKernel, window: Window) -> HSeries:
    cache = _cache
    if cache is None:
        return _expand_kernel(kernel, window)
    hit = cache.get(kernel, window)
    if hit is not None:
        return hit
    series = _expand_kernel(kernel, window)
    cache.put(kernel, window, series)
    return series


def expand(kernel: IotaKernel | KernelSum, window: Window) -> HSeries:
    """ι-expansion of a kernel (or finite sum of kernels) exact on `window`."""
    window.require_nonempty("expand")
    if isinstance(kernel, IotaKernel):
        return _expand_cached(kernel, window)
    parts = [_expand_cached(k, window) for k in kernel.kernels]
    if not parts:
        return HSeries.zero(window)
    total = parts[0]
    for part in parts[1:]:
        total = total + part
    logger.debug("expanded %d kernel terms on %s", len(parts), window.describe())
    return total
