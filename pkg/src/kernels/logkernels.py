"""
Log kernels — logarithms of ratio kernels as exact kernel sums.

A kernel whose factors on each variable pair have exponents summing to
zero has constant term 1, and its logarithm is a power series in ħ:

    log(x + cħ) - log(x) = Σ_{n≥1} (-1)^{n-1} c^n ħ^n x^{-n} / n

with x = large - small expanded in the direction of the pair's poles.
The sum is exact below ħ^order.
"""

from __future__ import annotations

from fractions import Fraction

from src.errors import KernelError
from src.kernels.expand import expand
from src.kernels.factors import IotaKernel, KernelSum, LinearFactor, pair, single
from src.series.hseries import HSeries
from src.series.window import Window


def _pair_direction(group: list[LinearFactor]) -> str:
    larges = {f.large for f in group if f.exp < 0}
    if len(larges) != 1 or None in larges:
        described = " ".join(f.describe() for f in group)
        raise KernelError(f"log of {described} needs one expansion direction")
    return larges.pop()


def log_ratio(kernel: IotaKernel, order: int) -> KernelSum:
    """log(kernel) below ħ^order; kernel must be a ratio with constant term 1."""
    if kernel.scale != 1 or kernel.hpow != 0:
        raise KernelError(f"log of {kernel.describe()}: constant term is not 1")
    groups: dict[tuple[str, str | None], list[LinearFactor]] = {}
    for f in kernel.factors:
        groups.setdefault((f.left, f.right), []).append(f)

    terms: list[IotaKernel] = []
    for (left, right), group in groups.items():
        if sum(f.exp for f in group) != 0:
            raise KernelError(f"log of {kernel.describe()}: factors on {left},{right} do not cancel")
        large = left if right is None else _pair_direction(group)
        for f in group:
            c = f.shift if large == left else -f.shift
            for n in range(1, order):
                coef = Fraction((-1) ** (n - 1), n) * f.exp * c ** n
                if not coef:
                    continue
                if right is None:
                    pole = single(left, 0, -n)
                else:
                    pole = pair(large, right if large == left else left, 0, -n, large=large)
                terms.append(IotaKernel.make(coef, n, [pole]))
    return KernelSum(terms)


def log_series(kernel: IotaKernel, window: Window) -> HSeries:
    """Expansion of log(kernel) on `window`; the result has ħ-floor 1."""
    floor = window.with_hbar(max(1, window.hmin), window.hmax)
    return expand(log_ratio(kernel, window.hmax), floor)


def exp_matches(series: HSeries, kernel: IotaKernel, window: Window) -> tuple[bool, HSeries, HSeries]:
    """Compare exp(series) with the expansion of `kernel` on the common window."""
    lhs = series.exp0()
    rhs = expand(kernel, window)
    return lhs.difference_witness(rhs) is None, lhs, rhs
