"""Hom, projective covers, syzygies, Ext and related invariants.

``Ext^1(M, N)`` is computed from a projective cover ``0 -> ΩM -> P -> M``
as the cokernel of the restriction ``Hom(P, N) -> Hom(ΩM, N)``; higher Ext
groups use iterated syzygies.  τ is taken to be Ω², which is the
Auslander-Reiten translate for symmetric algebras.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .linalg import (column_basis_array, hstack, kernel_array, matmul_array, rank_array,
                     solve_array)
from .repmod import (Algebra, Indeterminate, ModuleMap, Representation, Submodule, direct_sum,
                     hom_maps, is_indecomposable, iso_test, make_submodule, projective, quotient,
                     radical, restrict, top, zero_module, _pivots, _projector)


class NotSymmetric(ValueError):
    """Some projective has socle different from its top."""


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class HomSpace:
    source: Representation
    target: Representation
    basis: tuple

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def __len__(self) -> int:
        return len(self.basis)


def hom_basis(m: Representation, n: Representation) -> HomSpace:
    return HomSpace(m, n, tuple(hom_maps(m, n)))


def hom_dim(m: Representation, n: Representation) -> int:
    return len(hom_maps(m, n))


def end_dim(m: Representation) -> int:
    return len(hom_maps(m, m))


# ---------------------------------------------------------------------------
# covers and syzygies


@dataclass(frozen=True, eq=False)
class ProjectiveCover:
    cover: Representation
    surjection: ModuleMap
    kernel: Submodule
    summands: tuple  # vertex of each indecomposable summand, in order

    @cached_property
    def syzygy(self) -> Representation:
        return restrict(self.kernel)

    @cached_property
    def inclusion(self) -> ModuleMap:
        """``ΩM -> P`` for the canonical basis of the kernel."""
        om = self.syzygy
        return ModuleMap(om, self.cover, tuple(np.array(b) for b in self.kernel.bases))


def top_generators(m: Representation) -> list[tuple[int, np.ndarray]]:
    """Vertex-homogeneous vectors whose images form a basis of ``M / rad M``.

    They are the unit vectors at the non-pivot rows of the canonical radical
    basis, so the choice is deterministic.
    """
    rad = radical(m)
    out = []
    for v, b in enumerate(rad.bases):
        piv = set(_pivots(b))
        for i in range(m.dims[v]):
            if i not in piv:
                x = np.zeros(m.dims[v], dtype=np.int64)
                x[i] = 1
                out.append((v, x))
    return out


def map_from_projective(m: Representation, v: int, x: np.ndarray) -> list[np.ndarray]:
    """Blocks of ``P_v -> M`` sending ``e_v`` to ``x`` (a vector of ``M_v``)."""
    alg = m.algebra
    P = projective(alg, v)
    nb = alg.nb
    F = m.F
    blocks = []
    for w in range(alg.nvert):
        cols = []
        for i, mono in enumerate(nb.monomials):
            if mono[0] != v or mono[1] != w:
                continue
            cols.append(matmul_array(m.word_matrix(mono[2], v), x.reshape(-1, 1), F))
        blocks.append(hstack(cols, m.dims[w]) if cols else np.zeros((m.dims[w], 0), dtype=np.int64))
        assert blocks[-1].shape[1] == P.dims[w]
    return blocks


def projective_cover(m: Representation) -> ProjectiveCover:
    alg = m.algebra
    gens = top_generators(m)
    summands = tuple(v for v, _ in gens)
    if not gens:
        z = zero_module(alg)
        pi = ModuleMap(z, m, tuple(np.zeros((d, 0), dtype=np.int64) for d in m.dims))
        return ProjectiveCover(z, pi, make_submodule(z, [np.zeros((0, 0), dtype=np.int64)] * alg.nvert), ())
    P = direct_sum(*[projective(alg, v) for v in summands])
    parts = [map_from_projective(m, v, x) for v, x in gens]
    blocks = tuple(hstack([p[w] for p in parts], m.dims[w]) for w in range(alg.nvert))
    pi = ModuleMap(P, m, blocks)
    if pi.rank() != m.dim:
        raise AssertionError("projective cover map is not onto")
    return ProjectiveCover(P, pi, pi.kernel(), summands)


def syzygy(m: Representation) -> Representation:
    return projective_cover(m).syzygy


def omega(m: Representation, k: int = 1) -> Representation:
    for _ in range(k):
        m = syzygy(m)
    return m


def socle_element(alg: Algebra, v: int) -> dict:
    """An element of ``Λ`` spanning ``soc(P_v)`` (as a polynomial in basis monomials)."""
    from .repmod import socle
    P = projective(alg, v)
    soc = socle(P)
    if soc.dim != 1:
        raise NotSymmetric(f"socle of P_{alg.label(v)} has dimension {soc.dim}")
    w = next(i for i, d in enumerate(soc.dims) if d)
    col = soc.bases[w][:, 0]
    mons = [mm for mm in alg.nb.monomials if mm[0] == v and mm[1] == w]
    return {mono: int(c) for mono, c in zip(mons, col) if c}


def has_projective_summand(m: Representation) -> bool:
    """For a self-injective algebra: some socle element of ``Λ`` acts nonzero on ``M``."""
    alg = m.algebra
    for v in range(alg.nvert):
        if m.dims[v] == 0:
            continue
        if m.poly_matrix(socle_element(alg, v)).any():
            return True
    return False


def check_symmetric(alg: Algebra) -> None:
    """Guard: ``soc(P_v) ≅ top(P_v)`` for every vertex."""
    from .repmod import socle_dims
    for v in range(alg.nvert):
        unit = tuple(int(w == v) for w in range(alg.nvert))
        if socle_dims(projective(alg, v)) != unit:
            raise NotSymmetric(f"soc(P_{alg.label(v)}) is not S_{alg.label(v)}")


# ---------------------------------------------------------------------------
# Ext


def _flatten(f: ModuleMap) -> np.ndarray:
    return np.concatenate([b.reshape(-1) for b in f.blocks]) if f.blocks else np.zeros(0, dtype=np.int64)


def _unflatten(vec: np.ndarray, src: Representation, tgt: Representation) -> ModuleMap:
    blocks = []
    o = 0
    for v in range(len(src.dims)):
        k = tgt.dims[v] * src.dims[v]
        blocks.append(np.asarray(vec[o:o + k], dtype=np.int64).reshape(tgt.dims[v], src.dims[v]))
        o += k
    return ModuleMap(src, tgt, tuple(blocks))


@dataclass(frozen=True, eq=False)
class ExtSpace:
    """``Ext^1(M, N)`` presented as ``Hom(ΩM, N) / (restrictions of Hom(P, N))``."""

    m: Representation
    n: Representation
    cover: ProjectiveCover
    cocycles: tuple  # ModuleMaps ΩM -> N whose classes form a basis
    coboundaries: np.ndarray  # columns spanning the restricted maps (flattened)

    @property
    def dimension(self) -> int:
        return len(self.cocycles)

    def coordinates(self, phi: ModuleMap) -> np.ndarray:
        """Coordinates of the class of ``phi`` in the basis ``cocycles``."""
        F = self.m.F
        cols = [_flatten(c).reshape(-1, 1) for c in self.cocycles]
        A = hstack([self.coboundaries] + cols, len(_flatten(phi)))
        x = solve_array(A, _flatten(phi), F)
        if x is None:
            raise ValueError("map is not a cocycle")
        return x[self.coboundaries.shape[1]:]

    def cocycle(self, coords: Sequence[int]) -> ModuleMap:
        F = self.m.F
        om = self.cover.syzygy
        out = _unflatten(np.zeros(sum(om.dims[v] * self.n.dims[v] for v in range(len(om.dims))),
                                  dtype=np.int64), om, self.n)
        for c, f in zip(coords, self.cocycles):
            if c:
                out = out + f.scale(int(c) % F.q)
        return out


@dataclass(frozen=True)
class ExtClass:
    space: ExtSpace
    coords: tuple

    def is_zero(self) -> bool:
        return not any(self.coords)


def ext_space(m: Representation, n: Representation) -> ExtSpace:
    F = m.F
    cov = projective_cover(m)
    om = cov.syzygy
    H = hom_maps(om, n)
    length = sum(om.dims[v] * n.dims[v] for v in range(len(om.dims)))
    restricted = [g.compose(cov.inclusion) for g in hom_maps(cov.cover, n)]
    B = column_basis_array(hstack([_flatten(r).reshape(-1, 1) for r in restricted], length), F)
    chosen = []
    cur = B
    for h in H:
        col = _flatten(h).reshape(-1, 1)
        if rank_array(hstack([cur, col], length), F) > cur.shape[1]:
            cur = hstack([cur, col], length)
            chosen.append(h)
    return ExtSpace(m, n, cov, tuple(chosen), B)


def ext1_dim(m: Representation, n: Representation) -> int:
    """``dim Hom(ΩM, N) - dim Hom(P, N) + dim Hom(M, N)``."""
    if m.dim == 0 or n.dim == 0:
        return 0
    cov = projective_cover(m)
    hom_p = sum(n.dims[v] for v in cov.summands)
    return hom_dim(cov.syzygy, n) - hom_p + hom_dim(m, n)


def ext_dim(m: Representation, n: Representation, i: int = 1) -> int:
    if i < 1:
        raise ValueError("Ext degree must be positive")
    return ext1_dim(omega(m, i - 1), n)


def ext_class(space: ExtSpace, coords: Sequence[int]) -> ExtClass:
    if len(coords) != space.dimension:
        raise ValueError(f"expected {space.dimension} coordinates, got {len(coords)}")
    return ExtClass(space, tuple(int(c) % space.m.F.q for c in coords))


def extension_module(n: Representation, m: Representation, cls: ExtClass | None) -> tuple[Representation, ModuleMap, ModuleMap]:
    """Middle term ``E`` of ``0 -> N -> E -> M -> 0`` for the class ``cls``.

    Built as the pushout of ``ΩM -> P`` along the cocycle: ``E = (P ⊕ N) /
    {(ι x, -φ x)}``.  Returns ``(E, N -> E, E -> M)``.
    """
    if cls is None or cls.is_zero():
        E = direct_sum(n, m)
        inc = ModuleMap(n, E, tuple(np.eye(E.dims[v], n.dims[v], dtype=np.int64) for v in range(len(n.dims))))
        proj = ModuleMap(E, m, tuple(np.eye(E.dims[v], dtype=np.int64)[n.dims[v]:] for v in range(len(n.dims))))
        return E, inc, proj
    space = cls.space
    F = m.F
    cov = space.cover
    phi = space.cocycle(cls.coords)
    iota = cov.inclusion
    PN = direct_sum(cov.cover, n)
    spaces = []
    for v in range(len(m.dims)):
        spaces.append(np.concatenate([iota.blocks[v], F.neg_table[phi.blocks[v]]], axis=0))
    S = make_submodule(PN, spaces)
    E = quotient(PN, S)
    proj_q = [_projector(b, F) for b in S.bases]
    inc_blocks, pi_blocks = [], []
    for v in range(len(m.dims)):
        p_dim = cov.cover.dims[v]
        emb_n = np.zeros((PN.dims[v], n.dims[v]), dtype=np.int64)
        emb_n[p_dim:] = np.eye(n.dims[v], dtype=np.int64)
        inc_blocks.append(matmul_array(proj_q[v], emb_n, F))
        # E -> M: (p, y) -> π(p); evaluate on the section of the quotient
        piv = set(_pivots(S.bases[v]))
        keep = [i for i in range(PN.dims[v]) if i not in piv]
        sect = np.eye(PN.dims[v], dtype=np.int64)[:, keep]
        pm = hstack([cov.surjection.blocks[v], np.zeros((m.dims[v], n.dims[v]), dtype=np.int64)], m.dims[v])
        pi_blocks.append(matmul_array(pm, sect, F))
    return E, ModuleMap(n, E, tuple(inc_blocks)), ModuleMap(E, m, tuple(pi_blocks))


# ---------------------------------------------------------------------------
# stable endomorphisms and τ


def stable_end_dim(m: Representation) -> int:
    """``dim End(M)`` minus the endomorphisms factoring through a projective.

    A map ``M -> Q -> M`` with ``Q`` projective lifts through the cover
    ``π : P -> M``, so the projective maps are exactly ``π ∘ Hom(M, P)``.
    """
    if m.dim == 0:
        return 0
    F = m.F
    ends = hom_maps(m, m)
    cov = projective_cover(m)
    through = [cov.surjection.compose(g) for g in hom_maps(m, cov.cover)]
    length = sum(d * d for d in m.dims)
    span = hstack([_flatten(f).reshape(-1, 1) for f in through], length)
    return len(ends) - rank_array(span, F)


def is_projective(m: Representation) -> bool:
    return m.dim > 0 and projective_cover(m).kernel.dim == 0


def tau(m: Representation) -> Representation:
    return omega(m, 2)


def tau_period(m: Representation, cap: int = 6, rng=None) -> Optional[int]:
    """Smallest ``r <= cap`` with ``Ω^{2r} M ≅ M``, else ``None``."""
    alg = m.algebra
    check_symmetric(alg)
    if m.dim == 0 or is_projective(m):
        raise PreconditionError("τ-period needs a non-projective module")
    if not is_indecomposable(m):
        raise PreconditionError("τ-period needs an indecomposable module")
    x = m
    for r in range(1, cap + 1):
        x = omega(x, 2)
        if x.dims == m.dims and iso_test(x, m, rng):
            return r
    return None
