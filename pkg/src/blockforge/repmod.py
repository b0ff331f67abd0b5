"""Finite-dimensional modules over ``kQ/I`` as quiver representations.

A :class:`Representation` stores one matrix per arrow, of shape
``dims[target] x dims[source]``.  Vectors of the whole module are the
concatenation of the vertex spaces in vertex order ("global" coordinates).
Submodules are graded by vertex and stored as canonical column bases, so
equal submodules have equal keys and quotients are bit-reproducible.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import _kernels
from .fields import GF
from .linalg import (FieldMatrix, add_array, column_basis_array, hstack, kernel_array,
                     matmul_array, rank_array, rref_array, scale_array, sub_array)
from .presentations import (AlgebraPresentation, FamilyId, Monomial, Poly, Quiver,
                            UnknownSymbol, instantiate_family, mono_mul)
from .rewriting import NormalBasis, RewriteSystem, basis, complete

ENUM_LIMIT = 2**20
_SEED = [0]


def set_seed(seed: int) -> None:
    """Seed for the random trials in isomorphism searches (answers never depend on it)."""
    _SEED[0] = int(seed)


class Indeterminate(RuntimeError):
    """The isomorphism search was exhausted without a decision."""


class NoSuchModule(LookupError):
    pass


class NotUnique(LookupError):
    pass


class RelationError(ValueError):
    """Arrow matrices do not satisfy the relations."""


# ---------------------------------------------------------------------------
# the algebra


class Algebra:
    """A presentation together with its completed rewrite system and basis."""

    def __init__(self, pres: AlgebraPresentation, degree_cap: int | None = None):
        self.pres = pres
        self.quiver: Quiver = pres.quiver
        self.F: GF = pres.field
        self.relators: list[Poly] = [r for r in pres.relator_polys() if r]
        self.degree_cap = degree_cap
        self._projectives: dict[int, Representation] = {}

    @classmethod
    def family(cls, fid: FamilyId, n: int | None = None, scalars: Mapping[str, int] | None = None,
               e: int | None = None) -> "Algebra":
        return cls(instantiate_family(fid, n, scalars, e))

    @property
    def name(self) -> str:
        return self.pres.name

    @property
    def nvert(self) -> int:
        return len(self.quiver.vertices)

    @property
    def narrows(self) -> int:
        return len(self.quiver.arrows)

    @cached_property
    def rewriting(self) -> RewriteSystem:
        return complete(self.pres, self.degree_cap)

    @cached_property
    def nb(self) -> NormalBasis:
        return basis(self.rewriting)

    def vertex(self, v) -> int:
        """Vertex index from an index (int) or a label (str)."""
        if isinstance(v, (int, np.integer)):
            if not 0 <= v < self.nvert:
                raise UnknownSymbol(f"unknown vertex {v!r}")
            return int(v)
        return self.quiver.vertex_index(v)

    def label(self, v: int) -> str:
        return self.quiver.vertices[v]

    @cached_property
    def arrow_words(self) -> list[tuple[int, ...]]:
        """All composable arrow words of length 1 to 3 (leftmost arrow first)."""
        src, tgt = self.quiver.sources, self.quiver.targets
        out: list[tuple[int, ...]] = [(a,) for a in range(self.narrows)]
        layer = list(out)
        for _ in range(2):
            nxt = [(a,) + w for w in layer for a in range(self.narrows) if src[a] == tgt[w[0]]]
            out.extend(nxt)
            layer = nxt
        return out

    def __repr__(self) -> str:
        return f"Algebra({self.name or 'unnamed'}, {self.F!r}, {self.pres.values})"


# ---------------------------------------------------------------------------
# representations


def _ro(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.int64)
    a.setflags(write=False)
    return a


class Representation:
    """A module given by arrow matrices; immutable."""

    __slots__ = ("algebra", "dims", "mats", "__dict__")

    def __init__(self, algebra: Algebra, dims: Sequence[int], mats: Sequence[np.ndarray], check: bool = True):
        q = algebra.quiver
        dims = tuple(int(d) for d in dims)
        if len(dims) != len(q.vertices):
            raise ValueError(f"expected {len(q.vertices)} vertex dimensions, got {len(dims)}")
        if len(mats) != len(q.arrows):
            raise ValueError(f"expected {len(q.arrows)} arrow matrices, got {len(mats)}")
        fixed = []
        for k, (a, s, t) in enumerate(zip(q.arrows, q.sources, q.targets)):
            m = np.asarray(mats[k], dtype=np.int64)
            if m.size == 0:
                m = np.zeros((dims[t], dims[s]), dtype=np.int64)
            if m.shape != (dims[t], dims[s]):
                raise ValueError(f"arrow {a.name} needs shape {(dims[t], dims[s])}, got {m.shape}")
            if m.size and (m.min() < 0 or m.max() >= algebra.F.q):
                raise ValueError(f"arrow {a.name} has entries outside {algebra.F}")
            fixed.append(_ro(m))
        self.algebra = algebra
        self.dims = dims
        self.mats = tuple(fixed)
        if check and not self.check_relations():
            raise RelationError("arrow matrices violate the relations")

    # basic data
    @property
    def F(self) -> GF:
        return self.algebra.F

    @property
    def quiver(self) -> Quiver:
        return self.algebra.quiver

    @property
    def dim(self) -> int:
        return sum(self.dims)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.concatenate([[0], np.cumsum(self.dims)]))

    def dim_vector(self) -> dict[str, int]:
        return dict(zip(self.quiver.vertices, self.dims))

    def arrow(self, a: int) -> np.ndarray:
        return self.mats[a]

    def arrow_matrix(self, name: str) -> FieldMatrix:
        return FieldMatrix._wrap(self.mats[self.quiver.arrow_index(name)], self.F)

    @property
    def arrows(self) -> dict[str, FieldMatrix]:
        return {a.name: FieldMatrix._wrap(m, self.F) for a, m in zip(self.quiver.arrows, self.mats)}

    def word_matrix(self, word: tuple[int, ...], vertex: int | None = None) -> np.ndarray:
        """Matrix of a path, leftmost arrow applied last; the empty word needs ``vertex``."""
        if not word:
            return np.eye(self.dims[vertex], dtype=np.int64)
        F = self.F
        out = self.mats[word[-1]]
        for a in reversed(word[:-1]):
            out = matmul_array(self.mats[a], out, F)
        return out

    def poly_matrix(self, poly: Poly) -> np.ndarray:
        m0 = next(iter(poly))
        s, t = m0[0], m0[1]
        F = self.F
        acc = np.zeros((self.dims[t], self.dims[s]), dtype=np.int64)
        for m, c in poly.items():
            acc = add_array(acc, scale_array(c, self.word_matrix(m[2], m[0]), F), F)
        return acc

    def check_relations(self) -> bool:
        return all(not self.poly_matrix(r).any() for r in self.algebra.relators)

    def global_arrow(self, a: int) -> np.ndarray:
        """The arrow as an endomorphism of the whole module, in global coordinates."""
        out = np.zeros((self.dim, self.dim), dtype=np.int64)
        s, t = self.quiver.sources[a], self.quiver.targets[a]
        o = self.offsets
        out[o[t]:o[t + 1], o[s]:o[s + 1]] = self.mats[a]
        return out

    def split(self, x: np.ndarray) -> list[np.ndarray]:
        o = self.offsets
        return [np.asarray(x[o[v]:o[v + 1]], dtype=np.int64) for v in range(len(self.dims))]

    def act(self, word: tuple[int, ...], x: np.ndarray) -> np.ndarray:
        """Apply a path to a global vector."""
        out = np.zeros(self.dim, dtype=np.int64)
        if not word:
            return np.array(x, dtype=np.int64)
        s, t = self.quiver.sources[word[-1]], self.quiver.targets[word[0]]
        o = self.offsets
        y = matmul_array(self.word_matrix(word), np.asarray(x[o[s]:o[s + 1]], dtype=np.int64).reshape(-1, 1), self.F)
        out[o[t]:o[t + 1]] = y[:, 0]
        return out

    # serialization
    def to_json(self) -> dict:
        return {
            "dims": self.dim_vector(),
            "arrows": {a.name: m.tolist() for a, m in zip(self.quiver.arrows, self.mats)},
        }

    @classmethod
    def from_json(cls, algebra: Algebra, data: Mapping) -> "Representation":
        q = algebra.quiver
        dmap = data["dims"]
        unknown = set(dmap) - set(q.vertices)
        if unknown:
            raise UnknownSymbol(f"unknown vertices {sorted(unknown)}")
        dims = [int(dmap.get(v, 0)) for v in q.vertices]
        amap = data.get("arrows", {})
        unknown = set(amap) - {a.name for a in q.arrows}
        if unknown:
            raise UnknownSymbol(f"unknown arrows {sorted(unknown)}")
        mats = [np.array(amap.get(a.name, []), dtype=np.int64).reshape(dims[t], dims[s])
                for a, s, t in zip(q.arrows, q.sources, q.targets)]
        return cls(algebra, dims, mats)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Representation):
            return NotImplemented
        return (self.algebra is other.algebra and self.dims == other.dims
                and all(np.array_equal(a, b) for a, b in zip(self.mats, other.mats)))

    def __hash__(self) -> int:
        return hash((self.dims, tuple(m.tobytes() for m in self.mats)))

    def __repr__(self) -> str:
        return f"Representation(dims={self.dim_vector()})"


def zero_module(alg: Algebra) -> Representation:
    return Representation(alg, [0] * alg.nvert, [[]] * alg.narrows, check=False)


def simple(alg: Algebra, v) -> Representation:
    vi = alg.vertex(v)
    dims = [0] * alg.nvert
    dims[vi] = 1
    return Representation(alg, dims, [[]] * alg.narrows)


def projective(alg: Algebra, v) -> Representation:
    """``P_v = Λ e_v`` with the left regular action, in the normal-form basis."""
    vi = alg.vertex(v)
    if vi in alg._projectives:
        return alg._projectives[vi]
    nb = alg.nb
    F = alg.F
    q = alg.quiver
    mult = nb.mult.astype(np.int64)
    mons = nb.monomials
    blocks = [[i for i, m in enumerate(mons) if m[0] == vi and m[1] == w] for w in range(alg.nvert)]
    mats = []
    for a in range(alg.narrows):
        s, t = q.sources[a], q.targets[a]
        c = nb.coords({(s, t, (a,)): 1})
        left = np.zeros((nb.dimension, nb.dimension), dtype=np.int64)  # [k, j]: coord k of a * b_j
        for i in np.nonzero(c)[0]:
            left = add_array(left, scale_array(int(c[i]), mult[i].T, F), F)
        mats.append(left[np.ix_(blocks[t], blocks[s])])
    P = Representation(alg, [len(b) for b in blocks], mats)
    alg._projectives[vi] = P
    return P


def projective_generator(alg: Algebra, v) -> np.ndarray:
    """Global coordinates of ``e_v`` inside :func:`projective`."""
    vi = alg.vertex(v)
    P = projective(alg, vi)
    x = np.zeros(P.dim, dtype=np.int64)
    x[P.offsets[vi]] = 1  # the idempotent is the first basis monomial of its block
    return x


def direct_sum(*mods: Representation) -> Representation:
    alg = mods[0].algebra
    q = alg.quiver
    dims = [sum(m.dims[v] for m in mods) for v in range(alg.nvert)]
    mats = []
    for a in range(alg.narrows):
        s, t = q.sources[a], q.targets[a]
        out = np.zeros((dims[t], dims[s]), dtype=np.int64)
        r = c = 0
        for m in mods:
            out[r:r + m.dims[t], c:c + m.dims[s]] = m.mats[a]
            r += m.dims[t]
            c += m.dims[s]
        mats.append(out)
    return Representation(alg, dims, mats, check=False)


def power(m: Representation, k: int) -> Representation:
    return direct_sum(*([m] * k)) if k else zero_module(m.algebra)


# ---------------------------------------------------------------------------
# submodules


@dataclass(frozen=True, eq=False)
class Submodule:
    """Arrow-closed graded subspace; ``bases[v]`` is a canonical column basis."""

    ambient: Representation
    bases: tuple

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(b.shape[1] for b in self.bases)

    @property
    def dim(self) -> int:
        return sum(self.dims)

    def is_zero(self) -> bool:
        return self.dim == 0

    @cached_property
    def key(self) -> bytes:
        return b"|".join(np.ascontiguousarray(b.T).tobytes() + bytes([b.shape[1]]) for b in self.bases)

    def __eq__(self, other) -> bool:
        return isinstance(other, Submodule) and self.ambient is other.ambient and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __le__(self, other: "Submodule") -> bool:
        F = self.ambient.F
        return all(rank_array(hstack([b, c], b.shape[0]), F) == c.shape[1]
                   for b, c in zip(self.bases, other.bases))

    def contains(self, x: np.ndarray) -> bool:
        F = self.ambient.F
        for b, xv in zip(self.bases, self.ambient.split(x)):
            if rank_array(hstack([b, xv.reshape(-1, 1)], b.shape[0]), F) != b.shape[1]:
                return False
        return True

    def as_representation(self) -> Representation:
        return restrict(self)

    def __repr__(self) -> str:
        return f"Submodule(dims={dict(zip(self.ambient.quiver.vertices, self.dims))})"


def _canon(cols: np.ndarray, F: GF) -> np.ndarray:
    return _ro(column_basis_array(cols, F))


def _pivots(b: np.ndarray) -> list[int]:
    """Pivot rows of a canonical column basis."""
    out = []
    for j in range(b.shape[1]):
        out.append(int(np.nonzero(b[:, j])[0][0]))
    return out


def make_submodule(m: Representation, spaces: Sequence[np.ndarray]) -> Submodule:
    """Wrap per-vertex spaces that are already known to be arrow closed."""
    return Submodule(m, tuple(_canon(np.asarray(s, dtype=np.int64).reshape(m.dims[v], -1), m.F)
                              for v, s in enumerate(spaces)))


def whole(m: Representation) -> Submodule:
    return Submodule(m, tuple(_ro(np.eye(d, dtype=np.int64)) for d in m.dims))


def zero_sub(m: Representation) -> Submodule:
    return Submodule(m, tuple(_ro(np.zeros((d, 0), dtype=np.int64)) for d in m.dims))


def _close(m: Representation, spaces: list[np.ndarray]) -> Submodule:
    F = m.F
    q = m.quiver
    spaces = [column_basis_array(s, F) for s in spaces]
    changed = True
    while changed:
        changed = False
        for a in range(len(q.arrows)):
            s, t = q.sources[a], q.targets[a]
            if not spaces[s].shape[1]:
                continue
            img = matmul_array(m.mats[a], spaces[s], F)
            new = column_basis_array(hstack([spaces[t], img], m.dims[t]), F)
            if new.shape[1] > spaces[t].shape[1]:
                spaces[t] = new
                changed = True
    return Submodule(m, tuple(_ro(s) for s in spaces))


def sub_from_generators(m: Representation, vectors: Iterable[np.ndarray]) -> Submodule:
    """Smallest submodule containing the given global vectors."""
    spaces = [np.zeros((d, 0), dtype=np.int64) for d in m.dims]
    for x in vectors:
        x = np.asarray(x, dtype=np.int64) % m.F.q
        if x.shape != (m.dim,):
            raise ValueError(f"vector of length {x.shape} does not lie in a module of dimension {m.dim}")
        for v, xv in enumerate(m.split(x)):
            if xv.any():
                spaces[v] = hstack([spaces[v], xv.reshape(-1, 1)], m.dims[v])
    return _close(m, spaces)


def sub_sum(a: Submodule, b: Submodule) -> Submodule:
    m = a.ambient
    return Submodule(m, tuple(_canon(hstack([x, y], x.shape[0]), m.F) for x, y in zip(a.bases, b.bases)))


def sub_intersection(a: Submodule, b: Submodule) -> Submodule:
    m = a.ambient
    F = m.F
    out = []
    for x, y in zip(a.bases, b.bases):
        k = kernel_array(hstack([x, sub_array(np.zeros_like(y), y, F)], x.shape[0]), F)
        out.append(_canon(matmul_array(x, k[:x.shape[1]], F), F))
    return Submodule(m, tuple(out))


def image_of_arrows(w: Submodule) -> Submodule:
    """``J W``: the span of all arrow images of ``W``."""
    m = w.ambient
    F = m.F
    q = m.quiver
    spaces = [np.zeros((d, 0), dtype=np.int64) for d in m.dims]
    for a in range(len(q.arrows)):
        s, t = q.sources[a], q.targets[a]
        spaces[t] = hstack([spaces[t], matmul_array(m.mats[a], w.bases[s], F)], m.dims[t])
    return Submodule(m, tuple(_canon(s, F) for s in spaces))


def radical(m: Representation) -> Submodule:
    return image_of_arrows(whole(m))


def socle(m: Representation) -> Submodule:
    return preimage_under_arrows(m, zero_sub(m))


def preimage_under_arrows(m: Representation, s: Submodule) -> Submodule:
    """``{x : a x in S for every arrow a}``; with ``S = 0`` this is the socle."""
    F = m.F
    q = m.quiver
    proj = [_projector(b, F) for b in s.bases]
    out = []
    for v in range(len(m.dims)):
        rows = [matmul_array(proj[t], m.mats[a], F)
                for a, (src, t) in enumerate(zip(q.sources, q.targets)) if src == v]
        rows = [r for r in rows if r.shape[0]]
        if not rows:
            out.append(_ro(np.eye(m.dims[v], dtype=np.int64)))
            continue
        out.append(_canon(kernel_array(np.concatenate(rows, axis=0), F), F))
    return Submodule(m, tuple(out))


def _projector(b: np.ndarray, F: GF) -> np.ndarray:
    """Matrix of ``V -> V / span(b)`` in the canonical complement coordinates."""
    d = b.shape[0]
    piv = _pivots(b)
    keep = [i for i in range(d) if i not in set(piv)]
    full = np.eye(d, dtype=np.int64)
    if piv:
        full = sub_array(full, matmul_array(b, full[piv], F), F)
    return full[keep]


def radical_series(m: Representation) -> list[Submodule]:
    """``[M, rad M, rad^2 M, ..., 0]``."""
    out = [whole(m)]
    while not out[-1].is_zero():
        nxt = image_of_arrows(out[-1])
        if nxt.dim == out[-1].dim:
            raise RuntimeError("radical series does not terminate")
        out.append(nxt)
    return out


def socle_series(m: Representation) -> list[Submodule]:
    """``[0, soc M, soc^2 M, ..., M]``."""
    out = [zero_sub(m)]
    while out[-1].dim < m.dim:
        nxt = preimage_under_arrows(m, out[-1])
        if nxt.dim == out[-1].dim:
            raise RuntimeError("socle series does not terminate")
        out.append(nxt)
    return out


def radical_layers(m: Representation) -> list[tuple[int, ...]]:
    """Dimension vectors of ``rad^i M / rad^{i+1} M``."""
    ser = radical_series(m)
    return [tuple(a - b for a, b in zip(x.dims, y.dims)) for x, y in zip(ser, ser[1:])]


def socle_layers(m: Representation) -> list[tuple[int, ...]]:
    """Dimension vectors of ``soc^{i+1} M / soc^i M``, bottom first."""
    ser = socle_series(m)
    return [tuple(b - a for a, b in zip(x.dims, y.dims)) for x, y in zip(ser, ser[1:])]


def top(m: Representation) -> tuple[int, ...]:
    """Multiplicities of the simples in ``M / rad M``."""
    r = radical(m)
    return tuple(a - b for a, b in zip(m.dims, r.dims))


def socle_dims(m: Representation) -> tuple[int, ...]:
    return socle(m).dims


def loewy_length(m: Representation) -> int:
    return len(radical_series(m)) - 1


# ---------------------------------------------------------------------------
# quotients and restriction


def quotient_maps(s: Submodule) -> list[np.ndarray]:
    return [_projector(b, s.ambient.F) for b in s.bases]


def quotient(m: Representation, s: Submodule) -> Representation:
    """``M / S`` in the canonical complement coordinates."""
    F = m.F
    q = m.quiver
    proj = quotient_maps(s)
    sect = []
    for b in s.bases:
        piv = set(_pivots(b))
        keep = [i for i in range(b.shape[0]) if i not in piv]
        sect.append(np.eye(b.shape[0], dtype=np.int64)[:, keep])
    mats = [matmul_array(matmul_array(proj[t], m.mats[a], F), sect[src], F)
            for a, (src, t) in enumerate(zip(q.sources, q.targets))]
    dims = [p.shape[0] for p in proj]
    return Representation(m.algebra, dims, mats, check=False)


def restrict(s: Submodule) -> Representation:
    """``S`` as a module in its own canonical basis."""
    m = s.ambient
    F = m.F
    q = m.quiver
    mats = []
    for a, (src, t) in enumerate(zip(q.sources, q.targets)):
        img = matmul_array(m.mats[a], s.bases[src], F)
        mats.append(img[_pivots(s.bases[t])])
    return Representation(m.algebra, s.dims, mats, check=False)


def maximal_submodules(w: Submodule, vertices: Iterable[int] | None = None):
    """Yield the maximal submodules ``W' < W`` together with the vertex of ``W / W'``."""
    m = w.ambient
    F = m.F
    rad = image_of_arrows(w)
    allowed = range(len(m.dims)) if vertices is None else sorted(set(vertices))
    for v in allowed:
        B, R = w.bases[v], rad.bases[v]
        k = B.shape[1] - R.shape[1]
        if k == 0:
            continue
        # complement of R inside B, canonical: columns of B not in the span so far
        T = np.zeros((B.shape[0], 0), dtype=np.int64)
        cur = R
        for j in range(B.shape[1]):
            col = B[:, j:j + 1]
            if rank_array(hstack([cur, col], B.shape[0]), F) > cur.shape[1]:
                cur = hstack([cur, col], B.shape[0])
                T = hstack([T, col], B.shape[0])
        for phi in _projective_points(k, F.q):
            K = kernel_array(phi.reshape(1, -1), F)
            space = hstack([R, matmul_array(T, K, F)], B.shape[0])
            bases = list(w.bases)
            bases[v] = _canon(space, F)
            yield Submodule(m, tuple(bases)), v


def _projective_points(k: int, q: int):
    """Nonzero vectors of ``GF(q)^k`` with first nonzero coordinate equal to 1."""
    for lead in range(k):
        for rest in itertools.product(range(q), repeat=k - lead - 1):
            yield np.array((0,) * lead + (1,) + rest, dtype=np.int64)


# ---------------------------------------------------------------------------
# morphisms


@dataclass(frozen=True, eq=False)
class ModuleMap:
    source: Representation
    target: Representation
    blocks: tuple  # per-vertex arrays target.dims[v] x source.dims[v]

    @property
    def F(self) -> GF:
        return self.source.F

    def block(self, v) -> FieldMatrix:
        return FieldMatrix._wrap(self.blocks[self.source.algebra.vertex(v)], self.F)

    def global_matrix(self) -> np.ndarray:
        out = np.zeros((self.target.dim, self.source.dim), dtype=np.int64)
        for v, b in enumerate(self.blocks):
            so, to = self.source.offsets, self.target.offsets
            out[to[v]:to[v + 1], so[v]:so[v + 1]] = b
        return out

    def compose(self, other: "ModuleMap") -> "ModuleMap":
        """``self ∘ other``."""
        F = self.F
        return ModuleMap(other.source, self.target,
                         tuple(matmul_array(a, b, F) for a, b in zip(self.blocks, other.blocks)))

    def __add__(self, other: "ModuleMap") -> "ModuleMap":
        return ModuleMap(self.source, self.target,
                         tuple(add_array(a, b, self.F) for a, b in zip(self.blocks, other.blocks)))

    def scale(self, c: int) -> "ModuleMap":
        return ModuleMap(self.source, self.target, tuple(scale_array(c, b, self.F) for b in self.blocks))

    def is_zero(self) -> bool:
        return not any(b.any() for b in self.blocks)

    def rank(self) -> int:
        return sum(rank_array(b, self.F) for b in self.blocks)

    def is_invertible(self) -> bool:
        return self.source.dims == self.target.dims and self.rank() == self.source.dim

    def intertwines(self) -> bool:
        q = self.source.quiver
        F = self.F
        for a, (s, t) in enumerate(zip(q.sources, q.targets)):
            lhs = matmul_array(self.blocks[t], self.source.mats[a], F)
            rhs = matmul_array(self.target.mats[a], self.blocks[s], F)
            if not np.array_equal(lhs, rhs):
                return False
        return True

    def image(self) -> Submodule:
        return Submodule(self.target, tuple(_canon(b, self.F) for b in self.blocks))

    def kernel(self) -> Submodule:
        return Submodule(self.source, tuple(_canon(kernel_array(b, self.F), self.F) for b in self.blocks))


def identity_map(m: Representation) -> ModuleMap:
    return ModuleMap(m, m, tuple(np.eye(d, dtype=np.int64) for d in m.dims))


def _kron(a: np.ndarray, b: np.ndarray, F: GF) -> np.ndarray:
    if F.is_prime:
        return np.kron(a, b) % F.p
    out = F.mul_table[a[:, None, :, None], b[None, :, None, :]]
    return out.reshape(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1])


def intertwining_system(m: Representation, n: Representation) -> tuple[np.ndarray, list[int]]:
    """Linear system whose kernel is ``Hom(M, N)``; unknowns are the blocks, row-major."""
    F = m.F
    q = m.quiver
    nv = len(m.dims)
    sizes = [n.dims[v] * m.dims[v] for v in range(nv)]
    offs = [0]
    for s in sizes:
        offs.append(offs[-1] + s)
    rows = []
    for a, (s, t) in enumerate(zip(q.sources, q.targets)):
        nrow = n.dims[t] * m.dims[s]
        if nrow == 0:
            continue
        block = np.zeros((nrow, offs[-1]), dtype=np.int64)
        # f_t M(a) - N(a) f_s = 0, with vec(A X B) = (A kron B^T) vec(X) for row-major vec
        if sizes[t]:
            block[:, offs[t]:offs[t + 1]] = _kron(np.eye(n.dims[t], dtype=np.int64), m.mats[a].T, F)
        if sizes[s]:
            part = F.neg_table[_kron(n.mats[a], np.eye(m.dims[s], dtype=np.int64), F)]
            block[:, offs[s]:offs[s + 1]] = add_array(block[:, offs[s]:offs[s + 1]], part, F)
        rows.append(block)
    A = np.concatenate(rows, axis=0) if rows else np.zeros((0, offs[-1]), dtype=np.int64)
    return A, offs


def hom_maps(m: Representation, n: Representation) -> list[ModuleMap]:
    """A basis of ``Hom(M, N)``."""
    A, offs = intertwining_system(m, n)
    K = kernel_array(A, m.F) if A.shape[0] else np.eye(offs[-1], dtype=np.int64)
    out = []
    for j in range(K.shape[1]):
        col = K[:, j]
        blocks = tuple(col[offs[v]:offs[v + 1]].reshape(n.dims[v], m.dims[v]).copy()
                       for v in range(len(m.dims)))
        out.append(ModuleMap(m, n, blocks))
    return out


def end_dim(m: Representation) -> int:
    return len(hom_maps(m, m))


# ---------------------------------------------------------------------------
# isomorphism and indecomposability


def fingerprint(m: Representation) -> tuple:
    """Cheap isomorphism invariant: dimension vector, ranks of short arrow words, layers."""
    F = m.F
    ranks = tuple(rank_array(m.word_matrix(w), F) for w in m.algebra.arrow_words)
    return (m.dims, ranks, tuple(radical_layers(m)), tuple(socle_layers(m)))


def _combine(maps: list[ModuleMap], coeffs: np.ndarray, v: int, F: GF) -> np.ndarray:
    """Blocks at ``v`` of the linear combinations ``coeffs @ maps`` (batch first)."""
    stack = np.stack([f.blocks[v] for f in maps])  # (h, r, c)
    if F.is_prime:
        return np.einsum("bh,hrc->brc", coeffs, stack) % F.p
    out = np.zeros((coeffs.shape[0],) + stack.shape[1:], dtype=np.int64)
    for k in range(len(maps)):
        out = F.add_table[out, F.mul_table[coeffs[:, k][:, None, None], stack[k][None]]]
    return out


def _invertible_mask(maps: list[ModuleMap], coeffs: np.ndarray) -> np.ndarray:
    F = maps[0].F
    dims = maps[0].source.dims
    ok = np.ones(coeffs.shape[0], dtype=bool)
    for v, d in enumerate(dims):
        if d == 0:
            continue
        blocks = _combine(maps, coeffs, v, F)
        ok &= _kernels.batch_invertible(np.ascontiguousarray(blocks), F.add_table, F.mul_table,
                                        F.neg_table, F.inv_table).astype(bool)
    return ok


def _coefficient_chunks(h: int, q: int, chunk: int = 4096):
    total = q**h
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = np.zeros((len(idx), h), dtype=np.int64)
        for k in range(h):
            digits[:, k] = idx % q
            idx //= q
        yield digits


def find_invertible(maps: list[ModuleMap], rng: np.random.Generator | None = None,
                    trials: int = 64, limit: int = ENUM_LIMIT) -> Optional[ModuleMap]:
    """An invertible member of ``span(maps)``, or ``None`` if there is none.

    Random combinations are tried first; then the span is enumerated
    exhaustively when it has at most ``limit`` elements, otherwise
    :class:`Indeterminate` is raised.
    """
    if not maps:
        return None
    F = maps[0].F
    h = len(maps)
    if maps[0].source.dims != maps[0].target.dims:
        return None
    rng = rng if rng is not None else np.random.default_rng(_SEED[0])
    coeffs = rng.integers(0, F.q, size=(trials, h))
    hit = np.nonzero(_invertible_mask(maps, coeffs))[0]
    if len(hit) == 0:
        if F.q**h > limit:
            raise Indeterminate(f"no invertible map among {trials} random trials and the "
                                f"solution space has {F.q}^{h} elements")
        for coeffs in _coefficient_chunks(h, F.q):
            hit = np.nonzero(_invertible_mask(maps, coeffs))[0]
            if len(hit):
                break
        else:
            return None
    c = coeffs[hit[0]]
    f = maps[0].scale(int(c[0]))
    for k in range(1, h):
        f = f + maps[k].scale(int(c[k]))
    return f


def iso_test(m: Representation, n: Representation, rng: np.random.Generator | None = None) -> bool:
    """Whether ``M`` and ``N`` are isomorphic.  Never guesses; see :func:`find_invertible`."""
    if m.algebra is not n.algebra:
        raise ValueError("modules over different algebras")
    if m.dims != n.dims:
        return False
    if m.dim == 0:
        return True
    if fingerprint(m) != fingerprint(n):
        return False
    return find_invertible(hom_maps(m, n), rng) is not None


def is_indecomposable(m: Representation, limit: int = ENUM_LIMIT) -> bool:
    """``End(M)`` has no idempotent other than 0 and 1.

    Checked through Fitting's lemma: ``M`` is indecomposable iff every
    endomorphism is nilpotent or invertible.  The endomorphism space is
    enumerated exactly.
    """
    if m.dim == 0:
        return False
    maps = hom_maps(m, m)
    if len(maps) == 1:
        return True
    F = m.F
    if F.q ** len(maps) > limit:
        raise Indeterminate(f"End(M) has {F.q}^{len(maps)} elements")
    for coeffs in _coefficient_chunks(len(maps), F.q, chunk=1024):
        for c in coeffs:
            g = ModuleMap(m, m, tuple(np.zeros((d, d), dtype=np.int64) for d in m.dims))
            for k, ck in enumerate(c):
                if ck:
                    g = g + maps[k].scale(int(ck))
            gg = g.global_matrix()
            # g^N for N >= dim M splits M as im ⊕ ker
            for _ in range(max(1, int(np.ceil(np.log2(max(m.dim, 2)))))):
                gg = matmul_array(gg, gg, F)
            r = rank_array(gg, F)
            if 0 < r < m.dim:
                return False
    return True


def dedupe(mods: Sequence[Representation], rng=None) -> list[Representation]:
    """Isomorphism-class representatives, first occurrence kept; fingerprints bucket the work."""
    buckets: dict = {}
    out = []
    for x in mods:
        fp = fingerprint(x)
        reps = buckets.setdefault(fp, [])
        if any(iso_test(x, y, rng) for y in reps):
            continue
        reps.append(x)
        out.append(x)
    return out


# ---------------------------------------------------------------------------
# constructors with prescribed radical layers


def _layer_vector(alg: Algebra, labels: Iterable) -> tuple[int, ...]:
    d = [0] * alg.nvert
    for v in labels:
        d[alg.vertex(v)] += 1
    return tuple(d)


def modules_with_layers(alg: Algebra, layers: Sequence[Sequence]) -> list[Representation]:
    """Indecomposable modules with the given radical layers, up to isomorphism.

    Every such module is a quotient of the projective cover of its top, so
    the search runs over submodules ``W`` of that cover lying between
    ``rad^L`` and ``rad``, descending one simple at a time.
    """
    want = [_layer_vector(alg, layer) for layer in layers]
    if not want or not any(want[0]):
        raise ValueError("the top layer must be nonempty")
    L = len(want)
    P = direct_sum(*[projective(alg, v) for v in range(alg.nvert) for _ in range(want[0][v])])
    ser = radical_series(P)
    if len(ser) > L:
        P = quotient(P, ser[L])
    total = [sum(w[v] for w in want) for v in range(alg.nvert)]
    start = radical(P)
    frontier = {start.key: start}
    found = []
    for _ in range(sum(sum(w) for w in want[1:])):
        nxt = {}
        for W in frontier.values():
            qdims = [P.dims[v] - W.dims[v] for v in range(alg.nvert)]
            room = [v for v in range(alg.nvert) if qdims[v] < total[v]]
            for W2, v in maximal_submodules(W, room):
                nxt.setdefault(W2.key, W2)
        frontier = nxt
    for W in frontier.values():
        if tuple(P.dims[v] - W.dims[v] for v in range(alg.nvert)) != tuple(total):
            continue
        M = quotient(P, W)
        if radical_layers(M) != want:
            continue
        if not is_indecomposable(M):
            continue
        found.append(M)
    return dedupe(found)


def _unique(alg: Algebra, layers, what: str) -> Representation:
    found = modules_with_layers(alg, layers)
    if not found:
        raise NoSuchModule(f"no module {what}")
    if len(found) > 1:
        raise NotUnique(f"{len(found)} non-isomorphic modules {what}")
    return found[0]


def uniserial(alg: Algebra, labels: Sequence) -> Representation:
    """The unique uniserial module with the given composition factors, top first."""
    labels = list(labels)
    if not labels:
        raise ValueError("labels must be nonempty")
    for v in labels:
        alg.vertex(v)
    return _unique(alg, [[v] for v in labels], f"uniserial {uniserial_name(alg, labels)}")


def biserial_T(alg: Algebra, top_part, bottom_part) -> Representation:
    """``T_{u, v⊕w}`` (pair at the bottom) or ``T_{v⊕w, u}`` (pair at the top)."""
    tp = list(top_part) if isinstance(top_part, (list, tuple)) else [top_part]
    bp = list(bottom_part) if isinstance(bottom_part, (list, tuple)) else [bottom_part]
    if sorted((len(tp), len(bp))) != [1, 2]:
        raise ValueError("exactly one of top and bottom must be a pair")
    for v in tp + bp:
        alg.vertex(v)
    return _unique(alg, [tp, bp], f"T_{{{'+'.join(map(str, tp))},{'+'.join(map(str, bp))}}}")


# names like "S_0102", "S_{0102}", "S_{0,1,0}", "S", "T_{0,1+2}", "T_{1⊕2,0}"
_NAME = re.compile(r"^(?P<kind>[ST])(?:_\{?(?P<body>[^}]*)\}?)?$")


def uniserial_name(alg: Algebra, labels: Sequence) -> str:
    labels = [str(v) for v in labels]
    if alg.nvert == 1 and len(labels) == 1:
        return "S"
    sep = "" if all(len(v) == 1 for v in alg.quiver.vertices) else ","
    return "S_" + sep.join(labels)


def t_name(tp: Sequence, bp: Sequence) -> str:
    return "T_{" + "+".join(map(str, tp)) + "," + "+".join(map(str, bp)) + "}"


def parse_name(alg: Algebra, name: str):
    """``("S", labels)`` or ``("T", top, bottom)`` for a module name."""
    mt = _NAME.match(name.strip().replace("⊕", "+").replace(" ", ""))
    if not mt:
        raise ValueError(f"cannot parse module name {name!r}")
    kind, body = mt["kind"], mt["body"]
    if kind == "S":
        if body is None:
            if alg.nvert != 1:
                raise ValueError("bare S is only meaningful for a one-vertex quiver")
            return ("S", [alg.quiver.vertices[0]])
        if "," in body:
            return ("S", body.split(","))
        return ("S", _split_labels(alg, body))
    if body is None or "," not in body:
        raise ValueError(f"cannot parse module name {name!r}")
    a, b = body.split(",", 1)
    return ("T", a.split("+"), b.split("+"))


def _split_labels(alg: Algebra, body: str) -> list[str]:
    labels = sorted(alg.quiver.vertices, key=len, reverse=True)
    out = []
    i = 0
    while i < len(body):
        for v in labels:
            if body.startswith(v, i):
                out.append(v)
                i += len(v)
                break
        else:
            raise UnknownSymbol(f"cannot read vertex labels from {body!r}")
    return out


def construct(alg: Algebra, name: str) -> Representation:
    """Build the module named by ``S_…`` / ``T_…`` notation."""
    parsed = parse_name(alg, name)
    if parsed[0] == "S":
        return uniserial(alg, parsed[1])
    tp, bp = parsed[1], parsed[2]
    return biserial_T(alg, tp if len(tp) > 1 else tp[0], bp if len(bp) > 1 else bp[0])


def conjugate(m: Representation, changes: Sequence[np.ndarray]) -> Representation:
    """Rebase ``M`` by invertible matrices ``g_v``: arrows become ``g_t M(a) g_s^{-1}``."""
    F = m.F
    q = m.quiver
    inv = []
    for g, d in zip(changes, m.dims):
        x = _inverse(np.asarray(g, dtype=np.int64), F)
        inv.append(x)
    mats = [matmul_array(matmul_array(np.asarray(changes[t], dtype=np.int64), m.mats[a], F), inv[s], F)
            for a, (s, t) in enumerate(zip(q.sources, q.targets))]
    return Representation(m.algebra, m.dims, mats, check=False)


def _inverse(g: np.ndarray, F: GF) -> np.ndarray:
    n = g.shape[0]
    r, rank, _ = rref_array(np.concatenate([g, np.eye(n, dtype=np.int64)], axis=1), F)
    if rank < n or not np.array_equal(r[:, :n], np.eye(n, dtype=np.int64)):
        raise ValueError("matrix is not invertible")
    return r[:, n:]


def random_invertible(n: int, F: GF, rng: np.random.Generator) -> np.ndarray:
    while True:
        g = rng.integers(0, F.q, size=(n, n))
        if rank_array(g, F) == n:
            return g
