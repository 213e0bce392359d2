"""
Registry — declarative suite table: suite name → builder of check tasks.

A builder turns a RunConfig into Tasks; each task carries its anchor and
parameters and returns one result dict or a list of them. Adding coverage
means registering another builder, nothing else changes.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

from src.errors import PASS, ConfigError, check_result
from src.fock.affine import (
    affine_restrictedness_check,
    affine_vacuum_check,
    affine_weak_assoc_check,
    classical_affine,
    dimension_check,
    relation_checks,
)
from src.fock.gcm import PRESETS, GCM, load_gcm
from src.fock.heisenberg import (
    bracket_fidelity_check,
    build_h_fields,
    classical_limit_check,
    derive_gamma,
    fock_space,
    gamma_check,
    log_pair_data,
    vacuum_check,
)
from src.fock.vertex import (
    cartan_relation,
    ci_check,
    exchange_pair,
    restrictedness_check,
    s_jacobi_check,
    shift_part,
    split_pair,
    verify_exp_cal,
    verify_iterate,
    weak_assoc_check,
    ye_k_independence_check,
    zero_mode_formula_check,
)
from src.kernels.catalog import CATALOG, identity_catalog
from src.rewrite.presentation import DIRECTIONS, dy7_control, verify_mainDY
from src.rewrite.serre import VARIABLES as SERRE_VARIABLES
from src.rewrite.serre import verify_serre_equivalence
from src.series.window import Window
from src.suites.anchors import require
from src.suites.config import RunConfig

logger = logging.getLogger(__name__)

Result = dict[str, Any]

# random polynomials per pole position in the Sing/Res suite
SEEDED_CASES = 20


@dataclass(frozen=True)
class Task:
    suite: str
    label: str
    anchor: str
    run: Callable[[], Result | list[Result]]
    params: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        require(self.anchor)


@dataclass(frozen=True)
class Suite:
    name: str
    description: str
    build: Callable[[RunConfig], list[Task]]
    default: bool = True


REGISTRY: dict[str, Suite] = {}


def suite(name: str, description: str, default: bool = True):
    """Register a builder under a suite name."""

    def register(build: Callable[[RunConfig], list[Task]]) -> Callable[[RunConfig], list[Task]]:
        REGISTRY[name] = Suite(name, description, build, default)
        return build

    return register


def select(names: tuple[str, ...] | None) -> list[Suite]:
    """The named suites in order (the default set for None)."""
    if names is None:
        return [s for s in REGISTRY.values() if s.default]
    unknown = [n for n in names if n not in REGISTRY]
    if unknown:
        raise ConfigError(f"suite: unknown {', '.join(unknown)}; known: {', '.join(REGISTRY)}")
    return [REGISTRY[n] for n in dict.fromkeys(names)]


def _params(**values: Any) -> dict[str, str]:
    return {k: str(v) for k, v in values.items()}


def _half(config: RunConfig) -> int:
    """Degree half-width for operator sampling."""
    return max(2, config.window // 2)


# ── Kernel catalog ───────────────────────────────────────────


def _catalog_task(name: str, **params: Any) -> Task:
    return Task("catalog", name, CATALOG[name].anchor,
                lambda: identity_catalog(name, **params), _params(**params))


@suite("catalog", "exact kernel identities: logs, Sing/Res, δ decompositions, operator identities")
def catalog_suite(config: RunConfig) -> list[Task]:
    tasks = [_catalog_task("log_two_terms", m=m) for m in (-1, 0, 1, 2)]
    tasks += [_catalog_task("log_four_terms", m=m, kappa=k) for m, k in ((2, 1), (2, 3), (-1, 2))]
    tasks += [
        _catalog_task("sing_res_fact", b=b, seed=config.seed + k)
        for b in (1, -1, 2, -2) for k in range(SEEDED_CASES)
    ]
    tasks += [_catalog_task("sing_simple_pole", mu=mu, seed=config.seed) for mu in (1, -1)]
    tasks += [_catalog_task("serre_kernel", which=w) for w in (1, 2)]
    tasks += [_catalog_task("delta_decomp", j=j, half=config.window, N=config.hbar_order) for j in range(4)]
    tasks += [_catalog_task("delta_shifted", c=c, half=config.window, N=config.hbar_order) for c in (1, -1)]
    tasks += [
        _catalog_task("GL_relation"),
        _catalog_task("GqL_level", level=config.level),
        _catalog_task("F_G_inverse"),
        _catalog_task("G_bracket", m=2),
    ]
    return tasks


# ── Fock model ───────────────────────────────────────────────


def _heisenberg(config: RunConfig):
    gcm = load_gcm(config.gcm)
    data = derive_gamma(gcm, config.level, config.hbar_order)
    space = fock_space(data, config.depth)
    return gcm, data, space, build_h_fields(data, space)


@suite("heisenberg", "γ structure constants, classical limit and mode brackets of the Cartan currents")
def heisenberg_suite(config: RunConfig) -> list[Task]:
    gcm, data, space, fields = _heisenberg(config)
    common = _params(gcm=gcm.name, level=config.level, N=config.hbar_order)
    modes = min(3, config.window)
    return [
        Task("heisenberg", "gamma", "heisenberg-gamma",
             lambda: gamma_check(gcm, config.level, config.hbar_order), common),
        Task("heisenberg", "classical", "heisenberg-classical",
             lambda: classical_limit_check(gcm, config.level, config.window), common),
        Task("heisenberg", "bracket", "heisenberg-bracket",
             lambda: bracket_fidelity_check(data, gcm, space, fields, modes),
             {**common, "depth": str(config.depth), "modes": str(modes)}),
        Task("heisenberg", "vacuum", "heisenberg-vacuum", lambda: vacuum_check(space, fields), common),
    ]


def _restricted_width(N: int) -> int:
    # band 4 + |mode| ≤ 3 + room for the ∂ shifts of the q-brackets
    return 4 + 3 + 2 * N + 8


@suite("fock", "Y_E products, zero-mode formula, exponential calculus and iterate formula on the Fock space")
def fock_suite(config: RunConfig) -> list[Task]:
    gcm, data, space, fields = _heisenberg(config)
    N, half = config.hbar_order, _half(config)
    degrees = range(-half, half + 1)
    vectors = space.basis()
    low = space.basis(min(1, config.depth))
    labels = gcm.labels
    tasks: list[Task] = []

    for n in (-1, 0, 1):
        tasks.append(Task("fock", f"ye_k[{n}]", "ye-k-independence",
                          lambda n=n: ye_k_independence_check(fields[0], fields[0], n, vectors, degrees),
                          _params(node=labels[0], n=n)))

    for mu, nu in ((1, 0), (0, 1), (0, 0)):
        def zero_mode(mu=mu, nu=nu) -> Result:
            pair_space, a, b = exchange_pair(mu, nu, N, config.depth)
            return zero_mode_formula_check(a, b, mu, nu, pair_space.basis(), degrees)

        tasks.append(Task("fock", f"zero_mode[{mu},{nu}]", "zero-mode-formula", zero_mode,
                          _params(mu=mu, nu=nu, N=N, depth=config.depth)))

    for i in gcm.nodes:
        node = _params(node=labels[i], level=config.level, N=N)

        def exp_cal(i=i) -> Result:
            return verify_exp_cal(*split_pair(data, space, i), vectors, degrees)

        tasks.append(Task("fock", f"exp_cal[{labels[i]}]", "exp-calculus", exp_cal, node))
        for j in gcm.nodes:
            if i != j and gcm.a(i, j) == 0:
                def exp_cal_pair(i=i, j=j) -> Result:
                    return verify_exp_cal(*split_pair(data, space, i, j), vectors, degrees)

                tasks.append(Task("fock", f"exp_cal[{labels[i]},{labels[j]}]", "exp-calculus",
                                  exp_cal_pair, {**node, "with": labels[j]}))
        for c in (-2, 1):
            tasks.append(Task("fock", f"iterate[{labels[i]},{c}]", "iterate-formula",
                              lambda i=i, c=c: verify_iterate(data, space, i, c, vectors, degrees),
                              {**node, "z": f"{c}ħ"}))
        tasks.append(Task("fock", f"ci[{labels[i]}]", "ci-expression",
                          lambda i=i: ci_check(data, space, i, vectors, degrees), node))

    for i, j in gcm.pairs():
        pair = _params(pair=f"{labels[i]},{labels[j]}", level=config.level, N=N)
        tasks.append(Task("fock", f"weak_assoc[{labels[i]},{labels[j]}]", "weak-associativity",
                          lambda i=i, j=j: weak_assoc_check(fields[i], fields[j], low, order=N), pair))
        tasks.append(Task("fock", f"s_jacobi[{labels[i]},{labels[j]}]", "s-jacobi",
                          lambda i=i, j=j: s_jacobi_check(fields[i], fields[j], shift_part(data, i, j),
                                                          low, range(-half - 1, half), range(-half - 2, half + 1)),
                          pair))

        def restricted(i=i, j=j) -> Result:
            relation = cartan_relation(gcm, config.level, i, j, _restricted_width(N), N)
            return restrictedness_check(fields[i], fields[j], low, relation)

        tasks.append(Task("fock", f"restricted[{labels[i]},{labels[j]}]", "restrictedness", restricted, pair))
    return tasks


# ── Classical affine module ──────────────────────────────────


@suite("affine", "classical vacuum module: graded dimensions and the ħ = 0 relations")
def affine_suite(config: RunConfig) -> list[Task]:
    gcm = load_gcm(config.gcm)
    try:
        module = classical_affine(gcm, config.level, config.depth)
    except ConfigError as exc:
        logger.warning("affine suite skipped: %s", exc)
        return []
    common = _params(gcm=gcm.name, level=config.level, depth=config.depth)
    low = module.basis(min(1, config.depth))
    tasks = [
        Task("affine", "dimensions", "affine-dimensions", lambda: dimension_check(module), common),
        Task("affine", "vacuum", "affine-vacuum", lambda: affine_vacuum_check(module), common),
        Task("affine", "relations", "affine-relations", lambda: relation_checks(module, modes=2),
             {**common, "modes": "2"}),
    ]
    for i in gcm.nodes:
        node = {**common, "node": gcm.labels[i]}
        tasks.append(Task("affine", f"weak_assoc[{gcm.labels[i]}]", "affine-weak-associativity",
                          lambda i=i: affine_weak_assoc_check(module, i, vectors=low), node))
        tasks.append(Task("affine", f"restricted[{gcm.labels[i]}]", "affine-restrictedness",
                          lambda i=i: affine_restrictedness_check(module, i, vectors=low), node))
    return tasks


# ── Presentations ────────────────────────────────────────────


@suite("presentation", "old and new current presentations, both directions")
def presentation_suite(config: RunConfig) -> list[Task]:
    gcm = load_gcm(config.gcm)
    return [
        Task("presentation", direction, "presentation",
             lambda direction=direction: verify_mainDY(
                 gcm, config.level, config.window, config.hbar_order, direction, seed=config.seed),
             _params(gcm=gcm.name, level=config.level, window=config.window,
                     N=config.hbar_order, direction=direction))
        for direction in DIRECTIONS
    ]


@suite("dy7", "the a_ij = 0 commutation control on the D4 preset")
def dy7_suite(config: RunConfig) -> list[Task]:
    gcm = PRESETS["D4"]
    return [Task("dy7", "dy7_control", "dy7-control",
                 lambda: dy7_control(gcm, config.level, half_width=4, N=2),
                 _params(gcm=gcm.name, level=config.level, window=4, N=2))]


@suite("serre", "Serre relation equivalences for ν = ±1 and the commuting case")
def serre_suite(config: RunConfig) -> list[Task]:
    N = config.hbar_order
    window = Window.symmetric(SERRE_VARIABLES, config.window, hmax=N)
    tasks = [
        Task("serre", f"nu={nu}", "serre-equivalence",
             lambda nu=nu: verify_serre_equivalence(nu, window, N, seed=config.seed),
             _params(nu=nu, window=config.window, N=N))
        for nu in (1, -1)
    ]
    tasks.append(Task("serre", "commuting", "serre-equivalence",
                      lambda: verify_serre_equivalence(1, window, N, commuting=True, seed=config.seed),
                      _params(commuting=True, window=config.window, N=N)))
    return tasks


# ── Negative controls ────────────────────────────────────────


def control_entry(check: str, results: Result | list[Result]) -> Result:
    """
    One entry per perturbed run. It fails, carrying the first non-passing
    check as witness, when the perturbation was caught; an undetected
    perturbation passes, which breaks the suite's all-fail expectation.
    """
    results = results if isinstance(results, list) else [results]
    caught = [r for r in results if r["status"] != PASS]
    if not caught:
        logger.warning("%s: perturbation went undetected by %d checks", check, len(results))
        return check_result(check, True, f"perturbation went undetected by {len(results)} checks")
    first = caught[0]
    return check_result(
        check, False, f"perturbation caught by {first['check']}: {first['message']}",
        {"caught_by": first["check"], "status": first["status"], "detail": first["witness"],
         "caught": len(caught), "checks": len(results)},
    )


@suite("negative-controls", "deliberately perturbed inputs; every entry is expected to fail", default=False)
def negative_suite(config: RunConfig) -> list[Task]:
    gcm: GCM = load_gcm(config.gcm)
    N = config.hbar_order

    def perturbed_gamma() -> Result:
        data = derive_gamma(gcm, config.level, N).perturbed(0, 0, 3, 1)
        space = fock_space(data, min(config.depth, 2))
        return control_entry("control.perturbed_gamma", bracket_fidelity_check(
            data, gcm, space, build_h_fields(data, space), modes=2))

    def perturbed_zero_mode() -> Result:
        # the exchange pair needs one ħ beyond the perturbation to see it
        order = max(N, 2)
        data = log_pair_data(1, 0, order).perturbed(0, 0, 2, 0)
        space, a, b = exchange_pair(1, 0, order, min(config.depth, 2), data=data)
        degrees = range(-_half(config), _half(config) + 1)
        return control_entry("control.perturbed_zero_mode",
                             zero_mode_formula_check(a, b, 1, 0, space.basis(), degrees, rs=range(-2, 2)))

    def perturbed_serre() -> Result:
        window = Window.symmetric(SERRE_VARIABLES, config.window, hmax=N)
        return control_entry("control.perturbed_serre",
                             verify_serre_equivalence(1, window, N, perturb=1, seed=config.seed))

    return [
        Task("negative-controls", "perturbed_gamma", "negative-control", perturbed_gamma,
             _params(gcm=gcm.name, perturbation="ħ·x^-3 in γ_11")),
        Task("negative-controls", "perturbed_zero_mode", "negative-control", perturbed_zero_mode,
             _params(mu=1, nu=0, perturbation="x^-2 in the log-pair γ")),
        Task("negative-controls", "perturbed_serre", "negative-control", perturbed_serre,
             _params(nu=1, perturbation="+ħ in one exchange factor")),
    ]
