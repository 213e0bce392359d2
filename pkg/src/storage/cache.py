"""
Cache — SQLite store of kernel expansions, insert-only, keyed by sha256 digests.

The key digests the canonical JSON of the kernel (factors, shifts and
expansion directions) together with the window and the ħ-order. Bodies
are canonical series JSON with their own checksum; a row whose body does
not match its checksum or does not parse is discarded, never trusted.
"""

from __future__ import annotations

import logging
import os
import sqlite3
import threading
from pathlib import Path
from typing import Any

from dotenv import load_dotenv

from src.errors import ConfigError
from src.kernels.factors import IotaKernel
from src.series.codec import canonical_json, dumps, loads, sha256_hex
from src.series.hseries import HSeries
from src.series.window import Window

load_dotenv()

logger = logging.getLogger(__name__)

SCHEMA = """
CREATE TABLE IF NOT EXISTS expansions (
    digest TEXT PRIMARY KEY,
    body TEXT NOT NULL,
    checksum TEXT NOT NULL,
    created_at TEXT DEFAULT (datetime('now'))
);
"""


def expansion_key(kernel: IotaKernel, window: Window) -> str:
    """Digest of kernel + directions + window + N."""
    return sha256_hex(canonical_json({
        "kernel": kernel.to_json(),
        "window": [[v, lo, hi] for v, lo, hi in window.bounds],
        "hmin": window.hmin,
        "hmax": window.hmax,
    }))


class ExpansionCache:
    """Insert-only expansion store, safe to share between worker threads."""

    def __init__(self, cache_dir: str | Path | None = None) -> None:
        root = Path(cache_dir or os.getenv("DYV_CACHE_DIR", ".dyv-cache"))
        root.mkdir(parents=True, exist_ok=True)
        self._db_path = str(root / "expansions.sqlite")
        self._conn: sqlite3.Connection | None = None
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        self.discarded = 0

    def connect(self) -> sqlite3.Connection:
        if self._conn is None:
            self._conn = sqlite3.connect(self._db_path, timeout=30, check_same_thread=False)
            self._conn.executescript(SCHEMA)
        return self._conn

    def close(self) -> None:
        with self._lock:
            if self._conn is not None:
                self._conn.close()
                self._conn = None

    def __enter__(self) -> ExpansionCache:
        return self

    def __exit__(self, *exc: Any) -> None:
        self.close()

    # ── Access ───────────────────────────────────────────────

    def get(self, kernel: IotaKernel, window: Window) -> HSeries | None:
        digest = expansion_key(kernel, window)
        with self._lock:
            row = self.connect().execute(
                "SELECT body, checksum FROM expansions WHERE digest = ?", (digest,)
            ).fetchone()
        if row is None:
            self.misses += 1
            return None
        body, checksum = row
        if sha256_hex(body) != checksum:
            self._discard(digest, "checksum mismatch")
            return None
        try:
            series = loads(body)
        except ConfigError as exc:
            self._discard(digest, str(exc))
            return None
        self.hits += 1
        return series

    def put(self, kernel: IotaKernel, window: Window, series: HSeries) -> bool:
        """Store an expansion; an existing entry is never overwritten. True if inserted."""
        digest = expansion_key(kernel, window)
        body = dumps(series)
        with self._lock:
            conn = self.connect()
            cursor = conn.execute(
                "INSERT OR IGNORE INTO expansions (digest, body, checksum) VALUES (?, ?, ?)",
                (digest, body, sha256_hex(body)),
            )
            conn.commit()
        return cursor.rowcount == 1

    def size(self) -> int:
        with self._lock:
            return self.connect().execute("SELECT COUNT(*) FROM expansions").fetchone()[0]

    def _discard(self, digest: str, reason: str) -> None:
        logger.warning("discarding corrupt cache entry %s…: %s", digest[:12], reason)
        self.discarded += 1
        with self._lock:
            conn = self.connect()
            conn.execute("DELETE FROM expansions WHERE digest = ?", (digest,))
            conn.commit()

    def stats(self) -> dict[str, int]:
        return {"hits": self.hits, "misses": self.misses, "discarded": self.discarded}
