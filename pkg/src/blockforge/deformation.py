"""Lifts of modules over truncated polynomial rings and deformation rings.

A lift of ``M`` over ``k[t]/(t^m)`` replaces each arrow matrix ``M(a)`` by a
polynomial ``M(a) + A_1 t + ... + A_{m-1} t^{m-1}`` such that every relator
vanishes modulo ``t^m``.  Extending a lift by one order is a linear problem
in the new top coefficients: the linear part is the derivative of the
relators at ``M``, the constant part comes from the known coefficients.

The ring classifier turns the computable invariants (``d1 = dim Ext^1``,
the τ-period proxy for 3-tubes) plus declared metadata into the closed
forms of the universal deformation ring for ``p = 2``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .fields import GF
from .linalg import (add_array, column_basis_array, hstack, kernel_array, matmul_array,
                     rank_array, scale_array, solve_array, sub_array)
from .repmod import (Algebra, ModuleMap, Representation, _kron, end_dim, iso_test)


class PreconditionError(ValueError):
    pass


class MetadataError(KeyError):
    """A ring-classifier branch needs a metadata flag that was not supplied."""


# ---------------------------------------------------------------------------
# truncated polynomial matrices: arrays of shape (m, rows, cols)


def _tmul(a: np.ndarray, b: np.ndarray, m: int, F: GF) -> np.ndarray:
    out = np.zeros((m, a.shape[1], b.shape[2]), dtype=np.int64)
    for i in range(min(m, a.shape[0])):
        if not a[i].any():
            continue
        for j in range(min(m - i, b.shape[0])):
            if b[j].any():
                out[i + j] = add_array(out[i + j], matmul_array(a[i], b[j], F), F)
    return out


@dataclass(frozen=True, eq=False)
class TruncatedLift:
    """Lift of ``base`` over ``k[t]/(t^order)``; ``coeffs[a][j]`` is the ``t^j`` part of arrow ``a``."""

    base: Representation
    order: int
    coeffs: tuple

    @classmethod
    def constant(cls, m: Representation, order: int = 1) -> "TruncatedLift":
        co = []
        for a in m.mats:
            c = np.zeros((order,) + a.shape, dtype=np.int64)
            c[0] = a
            co.append(c)
        return cls(m, order, tuple(co))

    @classmethod
    def first_order(cls, m: Representation, derivation: Sequence[np.ndarray]) -> "TruncatedLift":
        co = []
        for a, d in zip(m.mats, derivation):
            c = np.zeros((2,) + a.shape, dtype=np.int64)
            c[0] = a
            c[1] = d
            co.append(c)
        return cls(m, 2, tuple(co))

    def evaluate(self, poly) -> np.ndarray:
        """A relator evaluated on the lift, as a truncated polynomial matrix."""
        m, F, M = self.order, self.base.F, self.base
        m0 = next(iter(poly))
        s, t = m0[0], m0[1]
        acc = np.zeros((m, M.dims[t], M.dims[s]), dtype=np.int64)
        for mono, c in poly.items():
            word = mono[2]
            if not word:
                cur = np.zeros((m, M.dims[s], M.dims[s]), dtype=np.int64)
                cur[0] = np.eye(M.dims[s], dtype=np.int64)
            else:
                cur = self.coeffs[word[-1]]
                for a in reversed(word[:-1]):
                    cur = _tmul(self.coeffs[a], cur, m, F)
            acc = add_array(acc, scale_array(c, cur, F), F)
        return acc

    def is_valid(self) -> bool:
        return all(not self.evaluate(r).any() for r in self.base.algebra.relators)

    def truncate(self, order: int) -> "TruncatedLift":
        return TruncatedLift(self.base, order, tuple(c[:order].copy() for c in self.coeffs))

    def as_representation(self) -> Representation:
        """The lift viewed as a module of dimension ``order * dim M`` (basis ``t^j x``)."""
        m = self.order
        M = self.base
        q = M.quiver
        mats = []
        for a, (s, t) in enumerate(zip(q.sources, q.targets)):
            big = np.zeros((m * M.dims[t], m * M.dims[s]), dtype=np.int64)
            for i in range(m):  # output degree block i gets A_j applied to input degree i - j
                for j in range(i + 1):
                    big[i * M.dims[t]:(i + 1) * M.dims[t], (i - j) * M.dims[s]:(i - j + 1) * M.dims[s]] = self.coeffs[a][j]
            mats.append(big)
        return Representation(M.algebra, [m * d for d in M.dims], mats)


@dataclass(frozen=True)
class Obstructed:
    """No lift to ``order``; ``defect`` is the rank jump of the augmented system."""

    order: int
    defect: int


# ---------------------------------------------------------------------------
# the linearized relator system


@dataclass(frozen=True, eq=False)
class TangentData:
    base: Representation
    linear: np.ndarray  # derivative of the relators at M, acting on stacked arrow unknowns
    offsets: tuple  # unknown offsets per arrow (row-major blocks)
    cocycles: np.ndarray  # columns spanning Z = ker(linear)
    coboundaries: np.ndarray  # columns spanning B = image of conjugation
    classes: np.ndarray  # columns completing B to Z: a basis of Z / B

    @property
    def dimension(self) -> int:
        return self.classes.shape[1]

    def derivation(self, vec: np.ndarray) -> list[np.ndarray]:
        M = self.base
        q = M.quiver
        out = []
        for a, (s, t) in enumerate(zip(q.sources, q.targets)):
            out.append(np.asarray(vec[self.offsets[a]:self.offsets[a + 1]], dtype=np.int64).reshape(M.dims[t], M.dims[s]))
        return out

    def direction(self, coords: Sequence[int]) -> list[np.ndarray]:
        F = self.base.F
        vec = np.zeros(self.linear.shape[1], dtype=np.int64)
        for c, j in zip(coords, range(self.dimension)):
            if c:
                vec = add_array(vec, scale_array(int(c) % F.q, self.classes[:, j], F), F)
        return self.derivation(vec)

    def coset_reps(self) -> list[np.ndarray]:
        """All elements of ``span(classes)``: one representative per class of ``Z / B``."""
        F = self.base.F
        reps = []
        for coords in itertools.product(range(F.q), repeat=self.dimension):
            vec = np.zeros(self.linear.shape[1], dtype=np.int64)
            for c, j in zip(coords, range(self.dimension)):
                if c:
                    vec = add_array(vec, scale_array(c, self.classes[:, j], F), F)
            reps.append(vec)
        return reps

    def class_of(self, derivation: Sequence[np.ndarray]) -> np.ndarray:
        """Coordinates of a cocycle modulo coboundaries."""
        F = self.base.F
        vec = np.concatenate([np.asarray(d, dtype=np.int64).reshape(-1) for d in derivation])
        A = hstack([self.coboundaries, self.classes], len(vec))
        x = solve_array(A, vec, F)
        if x is None:
            raise ValueError("not a cocycle")
        return x[self.coboundaries.shape[1]:]


def _linearization(m: Representation) -> tuple[np.ndarray, tuple]:
    F = m.F
    q = m.quiver
    offs = [0]
    for s, t in zip(q.sources, q.targets):
        offs.append(offs[-1] + m.dims[t] * m.dims[s])
    blocks = []
    for r in m.algebra.relators:
        m0 = next(iter(r))
        rs, rt = m0[0], m0[1]
        rows = np.zeros((m.dims[rt] * m.dims[rs], offs[-1]), dtype=np.int64)
        if rows.shape[0] == 0:
            continue
        for mono, c in r.items():
            word = mono[2]
            for i, a in enumerate(word):
                left = m.word_matrix(word[:i], rt)
                right = m.word_matrix(word[i + 1:], rs)
                blk = scale_array(c, _kron(left, right.T, F), F)
                rows[:, offs[a]:offs[a + 1]] = add_array(rows[:, offs[a]:offs[a + 1]], blk, F)
        blocks.append(rows)
    L = np.concatenate(blocks, axis=0) if blocks else np.zeros((0, offs[-1]), dtype=np.int64)
    return L, tuple(offs)


def _coboundary_map(m: Representation, offs: tuple) -> np.ndarray:
    """``X -> (M(a) X_s - X_t M(a))_a`` on stacked ``X_v`` (row-major)."""
    F = m.F
    q = m.quiver
    xo = [0]
    for d in m.dims:
        xo.append(xo[-1] + d * d)
    out = np.zeros((offs[-1], xo[-1]), dtype=np.int64)
    for a, (s, t) in enumerate(zip(q.sources, q.targets)):
        if offs[a + 1] == offs[a]:
            continue
        blk_s = _kron(m.mats[a], np.eye(m.dims[s], dtype=np.int64), F)
        blk_t = F.neg_table[_kron(np.eye(m.dims[t], dtype=np.int64), m.mats[a].T, F)]
        out[offs[a]:offs[a + 1], xo[s]:xo[s + 1]] = add_array(out[offs[a]:offs[a + 1], xo[s]:xo[s + 1]], blk_s, F)
        out[offs[a]:offs[a + 1], xo[t]:xo[t + 1]] = add_array(out[offs[a]:offs[a + 1], xo[t]:xo[t + 1]], blk_t, F)
    return out


def tangent_data(m: Representation) -> TangentData:
    F = m.F
    L, offs = _linearization(m)
    n = offs[-1]
    Z = kernel_array(L, F) if L.shape[0] else np.eye(n, dtype=np.int64)
    B = column_basis_array(_coboundary_map(m, offs), F)
    classes = []
    cur = B
    for j in range(Z.shape[1]):
        col = Z[:, j:j + 1]
        if rank_array(hstack([cur, col], n), F) > cur.shape[1]:
            cur = hstack([cur, col], n)
            classes.append(col)
    C = hstack(classes, n)
    return TangentData(m, L, offs, Z, B, C)


def tangent_dim(m: Representation, check_end: bool = True) -> int:
    """First-order lifts modulo conjugation, cross-checked against ``dim Ext^1(M, M)``."""
    from .homology import ext_dim
    if check_end and end_dim(m) != 1:
        raise PreconditionError("tangent_dim is only meaningful when End(M) = k")
    d = tangent_data(m).dimension
    e = ext_dim(m, m, 1)
    if d != e:
        raise AssertionError(f"tangent space has dimension {d} but Ext^1(M, M) has dimension {e}")
    return d


# ---------------------------------------------------------------------------
# extending lifts


def _lift_system(lift: TruncatedLift, td: TangentData) -> tuple[np.ndarray, np.ndarray]:
    """``(L, rhs)`` such that the next coefficients ``C`` must satisfy ``L C = rhs``."""
    F = lift.base.F
    m = lift.order
    grown = TruncatedLift(lift.base, m + 1, tuple(
        np.concatenate([c, np.zeros((1,) + c.shape[1:], dtype=np.int64)]) for c in lift.coeffs))
    parts = []
    for r in lift.base.algebra.relators:
        val = grown.evaluate(r)
        if val.shape[1] * val.shape[2]:
            parts.append(val[m].reshape(-1))
    K = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
    return td.linear, F.neg_table[K]


def extend_lift(lift: TruncatedLift, td: TangentData | None = None,
                choice: np.ndarray | None = None) -> TruncatedLift | Obstructed:
    """A lift one order higher with the same lower coefficients, or :class:`Obstructed`.

    The new top coefficients are the particular solution (free variables zero)
    plus ``choice``, an optional element of the cocycle space.
    """
    if lift.order < 1:
        raise ValueError("lift order must be positive")
    F = lift.base.F
    td = td or tangent_data(lift.base)
    L, rhs = _lift_system(lift, td)
    n = td.linear.shape[1]
    if L.shape[0] == 0:
        x = np.zeros(n, dtype=np.int64)
    else:
        x = solve_array(L, rhs, F)
        if x is None:
            defect = rank_array(hstack([L, rhs.reshape(-1, 1)], L.shape[0]), F) - rank_array(L, F)
            return Obstructed(lift.order + 1, defect)
    if choice is not None:
        x = add_array(x, np.asarray(choice, dtype=np.int64), F)
    top = td.derivation(x)
    co = tuple(np.concatenate([c, t[None]]) for c, t in zip(lift.coeffs, top))
    return TruncatedLift(lift.base, lift.order + 1, co)


def _direction_vector(m: Representation, direction, td: TangentData) -> list[np.ndarray]:
    from .homology import ExtClass
    if isinstance(direction, ExtClass):
        if direction.is_zero():
            return [np.zeros_like(a) for a in m.mats]
        return derivation_from_extension(m, direction)
    return td.direction(direction)


def lift_profile(m: Representation, direction, max_order: int = 5) -> int:
    """Largest order ``<= max_order`` reached from the first-order lift in ``direction``.

    At every order all classes of new coefficients modulo coboundaries are
    tried (breadth first), so an order counts as reached if some choice of
    the earlier corrections makes it possible.
    """
    td = tangent_data(m)
    der = _direction_vector(m, direction, td)
    if max_order <= 1:
        return max_order
    if not any(d.any() for d in der):
        return max_order
    frontier = [TruncatedLift.first_order(m, der)]
    if not frontier[0].is_valid():
        raise ValueError("direction is not a first-order lift")
    reps = td.coset_reps()
    order = 2
    while order < max_order:
        nxt = []
        for lift in frontier:
            for rep in reps:
                out = extend_lift(lift, td, rep)
                if isinstance(out, Obstructed):
                    break  # the obstruction does not depend on the choice
                nxt.append(out)
        if not nxt:
            return order
        frontier = nxt
        order += 1
    return order


# ---------------------------------------------------------------------------
# self-extensions


def derivation_from_extension(m: Representation, cls) -> list[np.ndarray]:
    """The cocycle ``D`` with ``E ≅ [[M, D], [0, M]]`` for a self-extension class of ``M``."""
    from .homology import extension_module
    F = m.F
    q = m.quiver
    E, inc, proj = extension_module(m, m, cls)
    sect, inc_pinv = [], []
    for v in range(len(m.dims)):
        # a linear section of E -> M and a left inverse of M -> E at each vertex
        s = solve_array(proj.blocks[v], np.eye(m.dims[v], dtype=np.int64), F)
        sect.append(s)
        inc_pinv.append(inc.blocks[v])
    out = []
    for a, (s, t) in enumerate(zip(q.sources, q.targets)):
        diff = sub_array(matmul_array(E.mats[a], sect[s], F), matmul_array(sect[t], m.mats[a], F), F)
        d = solve_array(inc.blocks[t], diff, F)
        out.append(d)
    return out


@dataclass(frozen=True, eq=False)
class Ubar:
    """Self-extension ``0 -> V -> U -> V -> 0`` with ``t = ι∘π`` acting on ``U``."""

    module: Representation
    inclusion: ModuleMap
    projection: ModuleMap
    t: np.ndarray  # global matrix of ι∘π

    @property
    def lift(self) -> TruncatedLift:
        return self._lift

    def as_json(self) -> dict:
        return {"module": self.module.to_json(), "t": self.t.tolist()}


def build_Ubar(m: Representation) -> Ubar:
    """The nonsplit self-extension of ``M`` (requires ``dim Ext^1(M, M) = 1``).

    Built twice: as a pushout along the Ext cocycle and as the first-order
    lift ``[[M, D], [0, M]]`` from a derivation; the two must be isomorphic.
    """
    from .homology import ext_class, ext_space, extension_module
    sp = ext_space(m, m)
    if sp.dimension != 1:
        raise PreconditionError(f"Ū needs dim Ext^1(M, M) = 1, got {sp.dimension}")
    E, inc, proj = extension_module(m, m, ext_class(sp, [1]))
    td = tangent_data(m)
    second = TruncatedLift.first_order(m, td.direction([1])).as_representation()
    if not iso_test(E, second):
        raise AssertionError("the two constructions of Ū disagree")
    t = matmul_array(inc.global_matrix(), proj.global_matrix(), m.F)
    u = Ubar(E, inc, proj, t)
    object.__setattr__(u, "_lift", TruncatedLift.first_order(m, derivation_from_extension(m, ext_class(sp, [1]))))
    return u


# ---------------------------------------------------------------------------
# ring classification

QUIVER_CLASS = {"SD2A1": "2A", "Q3B": "3B", "KleinFourLocal": "local"}


@dataclass
class FamilyMetadata:
    """Facts the computation cannot decide, keyed by module name."""

    family: str
    n: int
    quiver: str
    flags: dict = dc_field(default_factory=dict)
    provenance: str = ""

    @classmethod
    def from_json(cls, data: Mapping, family: str | None = None, n: int | None = None) -> "FamilyMetadata":
        data = dict(data)
        fam = family or data.pop("family", "")
        data.pop("family", None)
        nn = n if n is not None else data.pop("n", 2)
        data.pop("n", None)
        quiver = data.pop("quiver", QUIVER_CLASS.get(fam, ""))
        prov = data.pop("provenance", "")
        mods = data.pop("modules", data)
        return cls(fam, int(nn), quiver, {k: dict(v) for k, v in mods.items()}, prov)

    @classmethod
    def load(cls, path: str | Path, family: str | None = None, n: int | None = None) -> "FamilyMetadata":
        return cls.from_json(json.loads(Path(path).read_text()), family, n)

    def flag(self, module: str, name: str) -> bool:
        try:
            return bool(self.flags[module][name])
        except KeyError:
            raise MetadataError(f"metadata has no {name!r} flag for {module}") from None


@dataclass(frozen=True)
class RingPresentation:
    base: str  # "W" or "k"
    variables: tuple
    relators: tuple
    q_degree: Optional[int] = None
    branch: str = ""
    proxy: bool = False

    @property
    def text(self) -> str:
        if not self.variables:
            return self.base
        return f"{self.base}[[{','.join(self.variables)}]]/({','.join(self.relators)})"

    def __str__(self) -> str:
        return self.text

    def to_json(self) -> dict:
        out = {"ring": self.text, "branch": self.branch}
        if self.q_degree is not None:
            out["q_degree"] = self.q_degree
        if self.proxy:
            out["proxy"] = True
        return out


def classify_udr(md: FamilyMetadata, cm) -> RingPresentation:
    """Universal deformation ring of a classified module (``p = 2``)."""
    d1 = cm.d1
    name = cm.name
    n = md.n
    if d1 == 2:
        return RingPresentation("W", ("t_1", "t_2"), ("t_1^2-2t_1", "t_2^2-2t_2"), branch="d1=2")
    if d1 == 0:
        if cm.tau3 == "yes":
            return RingPresentation("k", (), (), branch="E3", proxy=True)
        if cm.tau3 == "indeterminate":
            raise PreconditionError(f"τ-period of {name} is indeterminate")
        if not md.flag(name, "lifts_over_W"):
            raise MetadataError(f"{name} has Ext^1 = 0 but is declared not to lift over W")
        return RingPresentation("W", (), (), branch="E4")
    if d1 == 1:
        if md.flag(name, "height1"):
            deg = 2 ** (n - 2) - 1
            q = f"q_{n}(t)"
            if md.flag(name, "tube_correspondence"):
                return RingPresentation("W", ("t",), (f"t*{q}", f"2*{q}"), q_degree=deg, branch="E1")
            return RingPresentation("W", ("t",), (q,), q_degree=deg, branch="E1")
        if md.quiver in ("2A", "2B"):
            return RingPresentation("W", ("t",), ("t^2-2*mu*t",), branch="E2")
        return RingPresentation("W", ("t",), ("t^2", "2*t"), branch="E2")
    raise PreconditionError(f"no closed form for d1 = {d1}")
