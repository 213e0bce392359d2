"""Tests for the classical vacuum module of the affine algebra at ħ = 0."""

from __future__ import annotations

import pytest

from src.errors import ConfigError
from src.fock.affine import (
    AFFINE_KMAX,
    LoopBasis,
    ModeWords,
    affine_restrictedness_check,
    affine_vacuum_check,
    affine_weak_assoc_check,
    classical_affine,
    dimension_check,
    relation_checks,
)
from src.fock.gcm import GCM, PRESETS
from src.fock.vertex import weak_assoc_reach


@pytest.fixture(scope="module")
def a1_module():
    return classical_affine(PRESETS["A1"], 1, depth=2)


# ── Loop basis ───────────────────────────────────────────────


def test_loop_basis_dimensions():
    assert LoopBasis(2).dim == 3
    assert LoopBasis(3).dim == 8


def test_loop_basis_sl2_brackets():
    basis = LoopBasis(2)
    e, f, h = (basis.position[name] for name in ("E12", "E21", "H1"))
    assert basis.bracket[(e, f)] == {h: 1}
    assert basis.bracket[(h, e)] == {e: 2}
    assert basis.form[(h, h)] == 2
    assert basis.form[(e, f)] == 1


# ── Module ───────────────────────────────────────────────────


def test_graded_dimensions_a1():
    module = classical_affine(PRESETS["A1"], 1, depth=4)
    assert module.graded_dimensions() == [1, 3, 9, 22, 51]
    assert dimension_check(module)["status"] == "pass"


def test_graded_dimensions_a2():
    module = classical_affine(PRESETS["A2"], 1, depth=2)
    assert module.graded_dimensions() == [1, 8, 44]


def test_only_type_a_is_realized():
    with pytest.raises(ConfigError):
        classical_affine(PRESETS["D4"], 1, depth=1)


def test_affine_type_is_rejected():
    cycle = GCM("A2(1)", ("0", "1", "2"), ((2, -1, -1), (-1, 2, -1), (-1, -1, 2)))
    with pytest.raises(ConfigError):
        classical_affine(cycle, 1, depth=1)


def test_vacuum(a1_module):
    assert affine_vacuum_check(a1_module)["status"] == "pass"


def test_central_term_on_vacuum(a1_module):
    e, f, h = a1_module.chevalley(0)
    vac = a1_module.vacuum
    assert e.mode(1, f.mode(-1, vac)) == a1_module.scalar(1)
    assert h.mode(1, h.mode(-1, vac)) == a1_module.scalar(2)


def test_level_scales_central_term():
    module = classical_affine(PRESETS["A1"], 3, depth=1)
    e, f, _ = module.chevalley(0)
    assert e.mode(1, f.mode(-1, module.vacuum)) == module.scalar(3)


def test_straightening_reorders_modes(a1_module):
    e, f, h = a1_module.chevalley(0)
    vac = a1_module.vacuum
    # e(-1)f(-1)1 - f(-1)e(-1)1 = h(-2)1
    lhs = e.mode(-1, f.mode(-1, vac)) - f.mode(-1, e.mode(-1, vac))
    assert lhs == h.mode(-2, vac)


# ── Relations ────────────────────────────────────────────────


def test_relations_a1(a1_module):
    results = relation_checks(a1_module, modes=1)
    assert [r["check"] for r in results] == [f"affine.L{k}" for k in range(1, 7)]
    assert all(r["status"] == "pass" for r in results), results


def test_relations_a2_exercise_serre():
    module = classical_affine(PRESETS["A2"], 1, depth=1)
    results = {r["check"]: r for r in relation_checks(module, modes=1)}
    for tag in ("affine.L5", "affine.L6"):
        assert results[tag]["status"] == "pass", results[tag]


def test_mode_words_reuse_their_suffixes(a1_module):
    e, f, h = a1_module.chevalley(0)
    words = ModeWords(a1_module, a1_module.vacuum)
    assert words(((e, -1), (f, -1))) == e.mode(-1, f.mode(-1, a1_module.vacuum))
    assert words.applications == 2
    words(((f, -1),))
    words(((h, 0), (e, -1), (f, -1)))
    assert words.applications == 3
    assert words.evaluate([(1, ((e, -1), (f, -1))), (-1, ((f, -1), (e, -1)))]) == h.mode(-2, a1_module.vacuum)


def test_relations_skip_cases_that_leave_the_module():
    module = classical_affine(PRESETS["A2"], 1, depth=1)
    results = {r["check"]: r for r in relation_checks(module, modes=2)}
    serre = results["affine.L6"]
    assert serre["status"] == "pass", serre
    assert serre["skipped"] > 0 and serre["evaluated"] > 0
    # on the vacuum only the 72 triples with m1 + m2 + n ≤ 0 run, for four (pair, kind) choices
    assert serre["evaluated"] >= 4 * 72


def test_weak_associativity_of_e_and_f(a1_module):
    result = affine_weak_assoc_check(a1_module, vectors=a1_module.basis(1))
    assert result["status"] == "pass", result


@pytest.mark.parametrize("depth", [3, 4])
def test_weak_associativity_at_larger_depth(depth):
    module = classical_affine(PRESETS["A1"], 1, depth=depth)
    assert module.max_mode == weak_assoc_reach(depth, kmax=AFFINE_KMAX)
    result = affine_weak_assoc_check(module, vectors=module.basis(1))
    assert result["status"] == "pass", result


def test_restrictedness_of_e_and_f(a1_module):
    result = affine_restrictedness_check(a1_module, vectors=a1_module.basis(1))
    assert result["status"] == "pass", result
