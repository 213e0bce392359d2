"""Tests for Cartan matrix validation, presets and file loading."""

from __future__ import annotations

import json

import pytest

from src.errors import ConfigError
from src.fock.gcm import GCM, PRESETS, gcm_from_json, load_gcm


def test_presets_are_finite_type():
    for name in ("A1", "A2", "A1xA1", "D4"):
        assert PRESETS[name].is_finite_type(), name


def test_affine_cycle_is_not_finite_type():
    cycle = GCM("A2(1)", ("0", "1", "2"), ((2, -1, -1), (-1, 2, -1), (-1, -1, 2)))
    assert not cycle.is_finite_type()


def test_pairs_cover_all_ordered_nodes():
    assert PRESETS["A2"].pairs() == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert PRESETS["D4"].a(1, 3) == -1


@pytest.mark.parametrize(
    "matrix, fragment",
    [
        ([[2, -1], [0, 2]], "not symmetric"),
        ([[1, 0], [0, 2]], "diagonal"),
        ([[2, -2], [-2, 2]], "simply-laced"),
        ([[2, -1]], "matrix must be"),
    ],
)
def test_invalid_matrices_name_the_failure(matrix, fragment):
    with pytest.raises(ConfigError, match=fragment):
        gcm_from_json({"matrix": matrix}, "bad")


def test_duplicate_labels_rejected():
    with pytest.raises(ConfigError, match="distinct"):
        gcm_from_json({"labels": ["a", "a"], "matrix": [[2, 0], [0, 2]]})


def test_missing_matrix_field():
    with pytest.raises(ConfigError, match="'matrix'"):
        gcm_from_json({"labels": ["1"]})


def test_non_integer_entries():
    with pytest.raises(ConfigError, match="integers"):
        gcm_from_json({"matrix": [["two"]]})


def test_load_preset_by_name():
    assert load_gcm("A2") is PRESETS["A2"]


def test_load_from_file(tmp_path):
    path = tmp_path / "b.json"
    path.write_text(json.dumps({"labels": ["x", "y"], "matrix": [[2, -1], [-1, 2]]}), encoding="utf-8")
    gcm = load_gcm(str(path))
    assert gcm.name == "b"
    assert gcm.labels == ("x", "y")
    assert gcm.to_json() == {"labels": ["x", "y"], "matrix": [[2, -1], [-1, 2]]}


def test_load_reports_json_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "matrix": [[2]\n', encoding="utf-8")
    with pytest.raises(ConfigError, match="line"):
        load_gcm(str(path))


def test_unknown_source():
    with pytest.raises(ConfigError, match="neither a preset"):
        load_gcm("E8-does-not-exist")
