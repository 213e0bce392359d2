"""Hypothesis strategies shared by the property tests."""

from __future__ import annotations

from hypothesis import strategies as st

small_fractions = st.fractions(min_value=-3, max_value=3, max_denominator=4)


def laurent_terms(variables: int, degree: int = 2, hmax: int = 3, hmin: int = 0):
    """Sparse {(hpow, exps): coef} tables with bounded exponents."""
    key = st.tuples(
        st.integers(min_value=hmin, max_value=hmax - 1),
        st.tuples(*[st.integers(min_value=-degree, max_value=degree)] * variables),
    )
    return st.dictionaries(key, small_fractions.filter(bool), max_size=5)
