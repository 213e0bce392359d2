"""
Affine — the classical (ħ=0) vacuum module of the affine algebra of type A_r at level ℓ.

The loop algebra is realized on sl_{r+1} matrices: basis E_ij (i ≠ j) and
H_k = E_kk - E_{k+1,k+1}, structure constants from matrix commutators,
invariant form (x|y) = tr(xy), so (e, f) = 1 and (h, h) = 2. The module is
spanned by ordered monomials x_1(-n_1)···x_k(-n_k)1; modes act by
straightening through

    [x(m), y(n)] = [x, y](m+n) + m·δ_{m+n,0}·(x|y)·ℓ.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from fractions import Fraction
from typing import Any

import sympy

from src.errors import ConfigError, OutOfWindowError, check_result, guarded
from src.fock.fields import Field, IdentityField, ModeField, ScaledField
from src.fock.gcm import GCM
from src.fock.space import GradedSpace, Monom, Vector, colored_partition_counts
from src.fock.vertex import CommutatorRelation, restrictedness_check, weak_assoc_check, weak_assoc_reach
from src.series.hseries import Scalar, to_scalar

logger = logging.getLogger(__name__)

# e_i, f_i are local of order 2 at ħ=0
AFFINE_KMAX = 4


def _fraction(x: Any) -> Fraction:
    r = sympy.Rational(x)
    return Fraction(int(r.p), int(r.q))


class LoopBasis:
    """Structure constants and trace form of sl_n in the matrix-unit basis."""

    def __init__(self, n: int) -> None:
        self.n = n
        self.names: list[str] = []
        self.matrices: list[sympy.Matrix] = []
        for i in range(n):
            for j in range(n):
                if i != j:
                    self.names.append(f"E{i + 1}{j + 1}")
                    self.matrices.append(self._unit(i, j))
        for k in range(n - 1):
            self.names.append(f"H{k + 1}")
            self.matrices.append(self._unit(k, k) - self._unit(k + 1, k + 1))
        self.position = {name: b for b, name in enumerate(self.names)}
        size = len(self.names)
        self.bracket: dict[tuple[int, int], dict[int, Fraction]] = {}
        self.form: dict[tuple[int, int], Fraction] = {}
        for a in range(size):
            for b in range(size):
                x, y = self.matrices[a], self.matrices[b]
                self.bracket[(a, b)] = self.coordinates(x * y - y * x)
                self.form[(a, b)] = _fraction((x * y).trace())

    def _unit(self, i: int, j: int) -> sympy.Matrix:
        m = sympy.zeros(self.n, self.n)
        m[i, j] = 1
        return m

    @property
    def dim(self) -> int:
        return len(self.names)

    def coordinates(self, m: sympy.Matrix) -> dict[int, Fraction]:
        """m as a combination of the basis; m must be traceless."""
        out: dict[int, Fraction] = {}
        for i in range(self.n):
            for j in range(self.n):
                if i != j and m[i, j] != 0:
                    out[self.position[f"E{i + 1}{j + 1}"]] = _fraction(m[i, j])
        running = sympy.Integer(0)
        for k in range(self.n - 1):
            running += m[k, k]
            if running != 0:
                out[self.position[f"H{k + 1}"]] = _fraction(running)
        return out


def _is_chain(gcm: GCM) -> bool:
    n = gcm.size
    return all(
        gcm.a(i, j) == (2 if i == j else (-1 if abs(i - j) == 1 else 0))
        for i in range(n) for j in range(n)
    )


class ClassicalAffine(GradedSpace):
    """PBW-spanned vacuum module of level ℓ; generator u_{x,n} stands for x(-n)."""

    def __init__(self, gcm: GCM, level: Scalar, depth: int, max_mode: int | None = None) -> None:
        if not gcm.is_finite_type():
            raise ConfigError(f"GCM {gcm.name} is not of finite type; the classical module needs finite type")
        if not _is_chain(gcm):
            raise ConfigError(f"GCM {gcm.name}: the classical module is realized for type A only")
        self.gcm = gcm
        self.level = to_scalar(level)
        self.algebra = LoopBasis(gcm.size + 1)
        # generators cover every mode the weak associativity sweep creates from weight ≤ depth
        self.max_mode = max_mode if max_mode is not None else weak_assoc_reach(depth, kmax=AFFINE_KMAX)
        generators = [(f"u_{name}_{k}", k) for name in self.algebra.names for k in range(1, self.max_mode + 1)]
        super().__init__(f"V[{gcm.name}, ℓ={self.level}]", generators, 1, depth)
        self._acts: dict[tuple[int, int, Monom], Vector] = {}
        logger.debug("%s: dim g = %d, depth %d", self.name, self.algebra.dim, depth)

    # ── PBW straightening ────────────────────────────────────

    def index(self, b: int, n: int) -> int:
        if not 1 <= n <= self.max_mode:
            raise OutOfWindowError(f"{self.name}: mode -{n} outside the generator range 1..{self.max_mode}")
        return 1 + b * self.max_mode + (n - 1)

    def decode(self, pos: int) -> tuple[int, int]:
        """(basis element, n) of the generator at a monomial position."""
        return (pos - 1) // self.max_mode, (pos - 1) % self.max_mode + 1

    def act(self, b: int, m: int, monom: Monom) -> Vector:
        """x_b(m) applied to the ordered monomial."""
        key = (b, m, monom)
        cached = self._acts.get(key)
        if cached is not None:
            return cached
        first = next((pos for pos in range(1, len(monom)) if monom[pos]), None)
        if m < 0:
            pos = self.index(b, -m)
            if first is None or pos <= first:
                result = self.gens[pos - 1] * self.vector(monom)
                self._acts[key] = result
                return result
        if first is None:
            result = self.zero
        else:
            c, n = self.decode(first)
            rest = monom[:first] + (monom[first] - 1,) + monom[first + 1:]
            result = self.apply(c, -n, self.act(b, m, rest))
            for d, coeff in self.algebra.bracket[(b, c)].items():
                result += self.apply(d, m - n, self.vector(rest)) * self.scalar(coeff)
            if m == n:
                result += self.vector(rest) * self.scalar(m * self.algebra.form[(b, c)] * self.level)
        self._acts[key] = result
        return result

    def apply(self, b: int, m: int, v: Vector) -> Vector:
        out = self.zero
        for _, monom, c in self.split(v):
            piece = self.act(b, m, monom)
            if piece:
                out += piece * self.hterm(c, 0)
        return out

    # ── Fields ───────────────────────────────────────────────

    def field(self, name: str) -> ModeField:
        b = self.algebra.position[name]

        def lower(monom: Monom) -> int:
            wt = self.weight(monom)
            return -wt - 1 if wt else 0

        return ModeField(name, self, lambda m, monom: self.act(b, m, monom), lower)

    def chevalley(self, i: int) -> tuple[ModeField, ModeField, ModeField]:
        """(e_i, f_i, h_i) for node i (0-based)."""
        return self.field(f"E{i + 1}{i + 2}"), self.field(f"E{i + 2}{i + 1}"), self.field(f"H{i + 1}")

    def fields(self) -> list[ModeField]:
        return [self.field(name) for name in self.algebra.names]


def classical_affine(gcm: GCM, level: Scalar, depth: int, max_mode: int | None = None) -> ClassicalAffine:
    return ClassicalAffine(gcm, level, depth, max_mode)


# ── Checks ───────────────────────────────────────────────────


def dimension_check(module: ClassicalAffine) -> dict[str, Any]:
    """Graded dimensions against the dim(g)-colored partition numbers."""
    dims = module.graded_dimensions()
    expected = colored_partition_counts(module.algebra.dim, module.depth)
    if dims != expected:
        return check_result("affine.dimensions", False, f"graded dimensions of {module.name} are off",
                            {"dimensions": dims, "expected": expected})
    return check_result("affine.dimensions", True, f"graded dimensions {dims}", dimensions=dims)


def affine_vacuum_check(module: ClassicalAffine, modes: int = 3) -> dict[str, Any]:
    for b, x in enumerate(module.fields()):
        for m in range(modes + 1):
            out = x.mode(m, module.vacuum)
            if out:
                return check_result("affine.vacuum", False, f"{x.name}({m})·1 ≠ 0",
                                    {"field": x.name, "mode": m, "value": module.describe(out)})
        if x.mode(-1, module.vacuum) != module.gens[module.index(b, 1) - 1]:
            return check_result("affine.vacuum", False, f"{x.name}(-1)·1 is not the generator",
                                {"field": x.name})
    return check_result("affine.vacuum", True, "annihilation modes kill 1; creation recovers generators")


Word = tuple[tuple[Field, int], ...]
Terms = list[tuple[Scalar, Word]]


class ModeWords:
    """x_1(m_1)···x_k(m_k)·w for one vector w, sharing every common suffix."""

    def __init__(self, module: ClassicalAffine, w: Vector) -> None:
        self.module = module
        self.w = w
        self.applications = 0
        self._cache: dict[tuple[tuple[str, int], ...], Vector] = {}

    def __call__(self, word: Word) -> Vector:
        if not word:
            return self.w
        key = tuple((x.name, m) for x, m in word)
        hit = self._cache.get(key)
        if hit is None:
            (x, m), rest = word[0], word[1:]
            hit = x.mode(m, self(rest))
            self.applications += 1
            self._cache[key] = hit
        return hit

    def evaluate(self, terms: Terms) -> Vector:
        out = self.module.zero
        for c, word in terms:
            v = self(word)
            if v:
                out += v * self.module.scalar(c)
        return out


def _commutator(x: Field, m: int, y: Field, n: int) -> Terms:
    return [(1, ((x, m), (y, n))), (-1, ((y, n), (x, m)))]


def relation_checks(module: ClassicalAffine, modes: int = 2) -> list[dict[str, Any]]:
    """
    (L1)-(L6) at ħ=0, at the level of modes, on every basis vector:

        L1  [h_i(m), h_j(n)] = a_ij·ℓ·m·δ_{m+n,0}
        L2  [h_i(m), e_j(n)] = a_ij e_j(m+n),  [h_i(m), f_j(n)] = -a_ij f_j(m+n)
        L3  [e_i(m), f_j(n)] = δ_ij (h_i(m+n) + ℓ·m·δ_{m+n,0})
        L4  [e_i(m), e_j(n)] = [f_i(m), f_j(n)] = 0 when a_ij ≥ 0
        L5  [e_i(m+1), e_j(n)] = [e_i(m), e_j(n+1)] when a_ij = -1, and the same for f
        L6  [e_i(m1), [e_i(m2), e_j(n)]] = 0 when a_ij = -1, and the same for f

    A case whose modes lower the weight below zero holds trivially and is
    skipped on that vector.
    """
    gcm, level = module.gcm, module.level
    chev = [module.chevalley(i) for i in gcm.nodes]
    window = range(-modes, modes + 1)
    basis = [(module.max_weight(w), w) for w in module.basis()]

    def scan(check: str, cases: list[tuple[str, int, Terms, Terms]]) -> dict[str, Any]:
        evaluated = skipped = 0
        for weight, w in basis:
            words = ModeWords(module, w)
            for label, lowers, lhs, rhs in cases:
                if lowers > weight:
                    skipped += 1
                    continue
                evaluated += 1
                left, right = words.evaluate(lhs), words.evaluate(rhs)
                if left != right:
                    return check_result(check, False, f"{label} fails",
                                        {"case": label, "vector": module.describe(w),
                                         "lhs": module.describe(left), "rhs": module.describe(right)})
        return check_result(check, True, f"{check.split('.')[-1]} holds for modes in [{-modes}, {modes}]",
                            evaluated=evaluated, skipped=skipped)

    def cases_l1():
        for i in gcm.nodes:
            for j in gcm.nodes:
                hi, hj = chev[i][2], chev[j][2]
                for m in window:
                    for n in window:
                        c = gcm.a(i, j) * level * m if m + n == 0 else 0
                        yield (f"[h{i + 1}({m}), h{j + 1}({n})]", m + n,
                               _commutator(hi, m, hj, n), [(c, ())])

    def cases_l2():
        for i in gcm.nodes:
            for j in gcm.nodes:
                hi = chev[i][2]
                for sign, x in ((1, chev[j][0]), (-1, chev[j][1])):
                    for m in window:
                        for n in window:
                            yield (f"[h{i + 1}({m}), {x.name}({n})]", m + n,
                                   _commutator(hi, m, x, n), [(sign * gcm.a(i, j), ((x, m + n),))])

    def cases_l3():
        for i in gcm.nodes:
            for j in gcm.nodes:
                e, f, h = chev[i][0], chev[j][1], chev[i][2]
                for m in window:
                    for n in window:
                        rhs: Terms = []
                        if i == j:
                            rhs = [(1, ((h, m + n),)), (level * m if m + n == 0 else 0, ())]
                        yield (f"[e{i + 1}({m}), f{j + 1}({n})]", m + n, _commutator(e, m, f, n), rhs)

    def same_kind(select: int):
        for i in gcm.nodes:
            for j in gcm.nodes:
                yield i, j, chev[i][select], chev[j][select]

    def cases_l4():
        for select in (0, 1):
            for i, j, x, y in same_kind(select):
                if gcm.a(i, j) >= 0:
                    for m in window:
                        for n in window:
                            yield (f"[{x.name}({m}), {y.name}({n})]", m + n, _commutator(x, m, y, n), [])

    def cases_l5():
        for select in (0, 1):
            for i, j, x, y in same_kind(select):
                if gcm.a(i, j) == -1:
                    for m in window:
                        for n in window:
                            yield (f"(z-w)[{x.name}, {y.name}] at ({m}, {n})", m + n + 1,
                                   _commutator(x, m + 1, y, n), _commutator(x, m, y, n + 1))

    def cases_l6():
        for select in (0, 1):
            for i, j, x, y in same_kind(select):
                if gcm.a(i, j) == -1:
                    for m1 in window:
                        for m2 in window:
                            for n in window:
                                inner = _commutator(x, m2, y, n)
                                nested = [(c, ((x, m1),) + word) for c, word in inner]
                                nested += [(-c, word + ((x, m1),)) for c, word in inner]
                                yield (f"[{x.name}({m1}), [{x.name}({m2}), {y.name}({n})]]",
                                       m1 + m2 + n, nested, [])

    out = []
    for tag, cases in (("L1", cases_l1), ("L2", cases_l2), ("L3", cases_l3),
                       ("L4", cases_l4), ("L5", cases_l5), ("L6", cases_l6)):
        check = f"affine.{tag}"
        out.append(guarded(check, lambda check=check, cases=cases: scan(check, list(cases()))))
    return out


def ef_relation(module: ClassicalAffine, i: int) -> CommutatorRelation:
    """[e_i(z), f_i(w)] = h_i(w)z^{-1}δ(w/z) + ℓ∂_w z^{-1}δ(w/z)."""
    _, _, h = module.chevalley(i)
    return CommutatorRelation(local=[(0, h), (1, ScaledField(IdentityField(module), module.level))])


def affine_weak_assoc_check(module: ClassicalAffine, i: int = 0, lmax: int = 6,
                            vectors: Sequence[Vector] | None = None) -> dict[str, Any]:
    e, f, _ = module.chevalley(i)
    vectors = module.basis() if vectors is None else vectors
    return weak_assoc_check(e, f, vectors, order=1, lmax=lmax, kmax=AFFINE_KMAX, name="affine.weak_assoc")


def affine_restrictedness_check(module: ClassicalAffine, i: int = 0, modes: Sequence[int] = range(-2, 3),
                                vectors: Sequence[Vector] | None = None) -> dict[str, Any]:
    e, f, _ = module.chevalley(i)
    vectors = module.basis() if vectors is None else vectors
    return restrictedness_check(e, f, vectors, ef_relation(module, i), modes, name="affine.restricted")
