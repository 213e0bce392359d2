"""
GCM — simply-laced generalized Cartan matrices, presets and file loading.

A GCM file is JSON: {"labels": ["1", "2"], "matrix": [[2, -1], [-1, 2]]}.
Validation errors name the invariant that failed.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

from src.errors import ConfigError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GCM:
    """Index labels plus the integer matrix a_ij."""

    name: str
    labels: tuple[str, ...]
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.labels)
        if n == 0:
            raise ConfigError(f"GCM {self.name}: empty index set")
        if len(set(self.labels)) != n:
            raise ConfigError(f"GCM {self.name}: labels must be distinct")
        if len(self.matrix) != n or any(len(row) != n for row in self.matrix):
            raise ConfigError(f"GCM {self.name}: matrix must be {n}×{n}")
        for i in range(n):
            if self.matrix[i][i] != 2:
                raise ConfigError(f"GCM {self.name}: diagonal entry a[{i}][{i}] must be 2")
            for j in range(n):
                if self.matrix[i][j] != self.matrix[j][i]:
                    raise ConfigError(f"GCM {self.name}: not symmetric at ({i},{j})")
                if i != j and self.matrix[i][j] not in (0, -1):
                    raise ConfigError(
                        f"GCM {self.name}: not simply-laced, a[{i}][{j}] = {self.matrix[i][j]}"
                    )

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def nodes(self) -> range:
        return range(self.size)

    def a(self, i: int, j: int) -> int:
        return self.matrix[i][j]

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i in self.nodes for j in self.nodes]

    def is_finite_type(self) -> bool:
        """Positive definiteness by exact Gaussian elimination (all pivots positive)."""
        m = [[Fraction(x) for x in row] for row in self.matrix]
        n = self.size
        for k in range(n):
            if m[k][k] <= 0:
                return False
            for i in range(k + 1, n):
                factor = m[i][k] / m[k][k]
                for j in range(k, n):
                    m[i][j] -= factor * m[k][j]
        return True

    def to_json(self) -> dict[str, Any]:
        return {"labels": list(self.labels), "matrix": [list(row) for row in self.matrix]}


def _chain(name: str, n: int) -> GCM:
    matrix = [[2 if i == j else (-1 if abs(i - j) == 1 else 0) for j in range(n)] for i in range(n)]
    return GCM(name, tuple(str(i + 1) for i in range(n)), tuple(tuple(r) for r in matrix))


PRESETS: dict[str, GCM] = {
    "A1": _chain("A1", 1),
    "A2": _chain("A2", 2),
    "A1xA1": GCM("A1xA1", ("1", "2"), ((2, 0), (0, 2))),
    # central node 2 joined to 1, 3, 4
    "D4": GCM(
        "D4", ("1", "2", "3", "4"),
        ((2, -1, 0, 0), (-1, 2, -1, -1), (0, -1, 2, 0), (0, -1, 0, 2)),
    ),
}


def gcm_from_json(data: Any, name: str = "file") -> GCM:
    if not isinstance(data, dict) or "matrix" not in data:
        raise ConfigError(f"GCM {name}: expected an object with a 'matrix' field")
    matrix = data["matrix"]
    if not isinstance(matrix, list) or not all(isinstance(r, list) for r in matrix):
        raise ConfigError(f"GCM {name}: 'matrix' must be a list of rows")
    try:
        rows = tuple(tuple(int(x) for x in r) for r in matrix)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"GCM {name}: entries must be integers ({exc})") from exc
    labels = tuple(str(x) for x in data.get("labels", [str(i + 1) for i in range(len(rows))]))
    return GCM(name, labels, rows)


def load_gcm(source: str) -> GCM:
    """A preset name (A1, A2, A1xA1, D4) or the path of a GCM JSON file."""
    if source in PRESETS:
        return PRESETS[source]
    path = Path(source)
    if not path.exists():
        raise ConfigError(f"GCM {source!r} is neither a preset ({', '.join(PRESETS)}) nor a file")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"GCM file {path}, line {exc.lineno}: {exc.msg}") from exc
    gcm = gcm_from_json(data, path.stem)
    logger.debug("loaded GCM %s (%d nodes)", gcm.name, gcm.size)
    return gcm
