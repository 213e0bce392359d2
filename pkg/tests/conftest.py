"""Shared fixtures for the verifier tests."""

from __future__ import annotations

import pytest

from src.series.window import Window


@pytest.fixture
def zw_window() -> Window:
    return Window.symmetric(("z", "w"), 5, hmax=3)


@pytest.fixture
def x_window() -> Window:
    return Window.of({"x": (-8, 8)}, hmax=5)
