"""
Rational identities — exact, truncation-free comparison of kernel combinations.

Both sides are turned into sympy rational functions in the kernel
variables and ħ; the difference is put over a common denominator and its
numerator expanded. A nonzero numerator yields the leading monomial as
witness.
"""

from __future__ import annotations

from typing import Any

import sympy

from src.kernels.factors import HBAR, IotaKernel, KernelSum, as_sum


def _directions(side: KernelSum) -> dict[tuple, set[str | None]]:
    seen: dict[tuple, set[str | None]] = {}
    for k in side.kernels:
        for f in k.poles:
            if f.is_pair:
                seen.setdefault(f.base, set()).add(f.large)
    return seen


def directions_coherent(*sides: KernelSum) -> bool:
    """True when every pole base is expanded the same way in all terms of all sides."""
    merged: dict[tuple, set[str | None]] = {}
    for side in sides:
        for base, directions in _directions(side).items():
            merged.setdefault(base, set()).update(directions)
    return all(len(d) == 1 and None not in d for d in merged.values())


def rational_identity_check(
    lhs: KernelSum | IotaKernel | int,
    rhs: KernelSum | IotaKernel | int,
    name: str = "rational_identity",
) -> dict[str, Any]:
    """
    Check lhs == rhs as rational functions.

    Returns:
        result dict with check, status (pass/fail), message, witness,
        residual numerator and the directions_coherent flag
    """
    left, right = as_sum(lhs), as_sum(rhs)
    symbols = {v: sympy.Symbol(v) for v in sorted(set(left.variables) | set(right.variables))}
    difference = sympy.together(left.to_sympy(symbols) - right.to_sympy(symbols))
    numerator, _ = sympy.fraction(difference)
    numerator = sympy.expand(numerator)
    coherent = directions_coherent(left, right)

    if numerator == 0:
        return {
            "check": name,
            "status": "pass",
            "message": "identity holds exactly (zero residual numerator)",
            "witness": None,
            "residual": "0",
            "directions_coherent": coherent,
        }

    gens = [*symbols.values(), HBAR]
    poly = sympy.Poly(numerator, *gens)
    monom, coeff = poly.terms()[0]
    witness = {
        "monomial": {str(g): int(e) for g, e in zip(gens, monom) if e},
        "coefficient": str(coeff),
    }
    return {
        "check": name,
        "status": "fail",
        "message": f"residual numerator has {len(poly.terms())} nonzero terms",
        "witness": witness,
        "residual": str(numerator),
        "directions_coherent": coherent,
    }
