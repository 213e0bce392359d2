"""Tests for the insert-only expansion cache."""

from __future__ import annotations

import logging
import sqlite3
from pathlib import Path

import pytest

from src.kernels.expand import cached_expansions, expand
from src.kernels.factors import IotaKernel, pair
from src.series.codec import sha256_hex
from src.storage.cache import ExpansionCache, expansion_key
from src.series.window import Window

POLE = IotaKernel.make(1, 0, (pair("z", "w", 0, -1),))
SHIFTED = IotaKernel.make(1, 0, (pair("z", "w", 1, -1),))


@pytest.fixture
def cache(tmp_path: Path):
    with ExpansionCache(tmp_path / "cache") as c:
        yield c


def test_put_then_get(cache, zw_window):
    series = expand(POLE, zw_window)
    assert cache.get(POLE, zw_window) is None
    assert cache.put(POLE, zw_window, series)
    assert cache.get(POLE, zw_window) == series
    assert cache.stats() == {"hits": 1, "misses": 1, "discarded": 0}


def test_existing_entry_is_never_overwritten(cache, zw_window):
    series = expand(POLE, zw_window)
    assert cache.put(POLE, zw_window, series)
    assert not cache.put(POLE, zw_window, expand(SHIFTED, zw_window))
    assert cache.get(POLE, zw_window) == series
    assert cache.size() == 1


def test_keys_separate_kernels_and_windows(zw_window):
    wider = Window.symmetric(("z", "w"), 6, hmax=3)
    keys = {
        expansion_key(POLE, zw_window),
        expansion_key(SHIFTED, zw_window),
        expansion_key(POLE, wider),
    }
    assert len(keys) == 3


def test_tampered_entry_is_discarded(cache, zw_window, caplog):
    cache.put(POLE, zw_window, expand(POLE, zw_window))
    conn = sqlite3.connect(cache._db_path)
    conn.execute("UPDATE expansions SET body = body || ' '")
    conn.commit()
    conn.close()

    with caplog.at_level(logging.WARNING, logger="src.storage.cache"):
        assert cache.get(POLE, zw_window) is None
    assert "discarding corrupt cache entry" in caplog.text
    assert cache.stats()["discarded"] == 1
    assert cache.size() == 0


def test_unparseable_entry_is_discarded(cache, zw_window):
    cache.put(POLE, zw_window, expand(POLE, zw_window))
    conn = sqlite3.connect(cache._db_path)
    conn.execute("UPDATE expansions SET body = ?, checksum = ?", ("not json", sha256_hex("not json")))
    conn.commit()
    conn.close()
    assert cache.get(POLE, zw_window) is None
    assert cache.stats()["discarded"] == 1


def test_expand_uses_active_cache(cache, zw_window):
    direct = expand(POLE, zw_window)
    with cached_expansions(cache):
        first = expand(POLE, zw_window)
        second = expand(POLE, zw_window)
    assert first == second == direct
    assert cache.stats()["hits"] == 1
    assert cache.size() == 1
    # outside the context nothing is recorded
    expand(SHIFTED, zw_window)
    assert cache.size() == 1


def test_cache_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("DYV_CACHE_DIR", str(tmp_path / "env-cache"))
    with ExpansionCache() as c:
        assert c.size() == 0
    assert (tmp_path / "env-cache" / "expansions.sqlite").exists()
