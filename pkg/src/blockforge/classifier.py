"""Modules whose endomorphism ring is the ground field, up to isomorphism.

:func:`enumerate_endok` works top down: a module with top ``T`` is a
quotient ``P_T / W`` of the projective cover of ``T`` with ``W`` inside the
radical, so it suffices to enumerate such ``W`` of small colength.
:func:`brute_force_endok` is an independent oracle that runs through all
arrow matrices of small dimension vectors.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from . import _kernels
from .homology import NotSymmetric, PreconditionError, ext_dim, tau_period
from .presentations import canonical_family
from .repmod import (Algebra, Indeterminate, NoSuchModule, NotUnique, Representation, biserial_T,
                     dedupe, direct_sum, end_dim, iso_test, maximal_submodules, projective,
                     quotient, radical, radical_layers, radical_series, socle, t_name, top,
                     uniserial, uniserial_name)


class CapWarning(UserWarning):
    """A module with End = k sits exactly at the length cap; a larger cap may find more."""


class GuardError(ValueError):
    pass


@dataclass(eq=False)
class ClassifiedModule:
    representation: Representation
    name: str
    d1: int
    tau3: str  # "yes", "no", "indeterminate" or "n/a"
    named: bool = True  # name reconstructs the module through the constructors

    @property
    def dims(self) -> tuple[int, ...]:
        return self.representation.dims

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "dims": self.representation.dim_vector(),
            "d1": self.d1,
            "tau3": self.tau3,
            "end_dim": 1,
            "absolutely_indecomposable": True,
            "radical_layers": [list(x) for x in radical_layers(self.representation)],
            "module": self.representation.to_json(),
        }


CELLS = ("d1=0,tau3", "d1=0,not_tau3", "d1=1", "d1=2")


@dataclass(eq=False)
class ClassificationReport:
    family: str
    params: dict
    modules: list
    length_cap: int
    warnings: list = dc_field(default_factory=list)

    @property
    def names(self) -> list[str]:
        return [m.name for m in self.modules]

    @property
    def partition(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {c: [] for c in CELLS}
        for m in self.modules:
            if m.d1 == 0:
                out["d1=0,tau3" if m.tau3 == "yes" else "d1=0,not_tau3"].append(m.name)
            elif m.d1 in (1, 2):
                out[f"d1={m.d1}"].append(m.name)
            else:
                out.setdefault(f"d1={m.d1}", []).append(m.name)
        return out

    def get(self, name: str) -> ClassifiedModule:
        for m in self.modules:
            if m.name == name:
                return m
        raise KeyError(name)

    def to_json(self, with_modules: bool = True) -> dict:
        out = {
            "family": self.family,
            "params": self.params,
            "length_cap": self.length_cap,
            "count": len(self.modules),
            "names": self.names,
            "partition": self.partition,
            "warnings": self.warnings,
        }
        if with_modules:
            out["modules"] = [m.to_json() for m in self.modules]
        return out


# ---------------------------------------------------------------------------
# naming


def name_module(m: Representation) -> tuple[str, bool]:
    """``(name, verified)`` using the S/T notation when a constructor rebuilds ``m``."""
    alg = m.algebra
    layers = radical_layers(m)
    labels = [[alg.label(v) for v in range(alg.nvert) for _ in range(layer[v])] for layer in layers]
    sizes = [len(x) for x in labels]
    try:
        if all(s == 1 for s in sizes):
            ref = uniserial(alg, [x[0] for x in labels])
            if iso_test(m, ref):
                return uniserial_name(alg, [x[0] for x in labels]), True
        elif sizes == [1, 2]:
            ref = biserial_T(alg, labels[0][0], labels[1])
            if iso_test(m, ref):
                return t_name(labels[0], labels[1]), True
        elif sizes == [2, 1]:
            ref = biserial_T(alg, labels[0], labels[1][0])
            if iso_test(m, ref):
                return t_name(labels[0], labels[1]), True
    except (NoSuchModule, NotUnique, Indeterminate):
        pass
    body = ",".join(str(d) for d in m.dims)
    lay = "|".join("".join(x) for x in labels)
    return f"M[{body}]<{lay}>", False


def _tau3(m: Representation, d1: int, cap: int) -> str:
    if d1 != 0:
        return "n/a"
    try:
        return "yes" if tau_period(m, cap) == 3 else "no"
    except (Indeterminate, NotSymmetric):  # τ = Ω² only holds for symmetric algebras
        return "indeterminate"


def classify_modules(mods: list[Representation], tau_cap: int = 6) -> list[ClassifiedModule]:
    out = []
    for m in mods:
        name, ok = name_module(m)
        d1 = ext_dim(m, m, 1)
        out.append(ClassifiedModule(m, name, d1, _tau3(m, d1, tau_cap), ok))
    # suffix raw names that collide so every name is unique
    seen: dict[str, int] = {}
    for c in out:
        k = seen.get(c.name, 0)
        seen[c.name] = k + 1
        if k:
            c.name = f"{c.name}#{k}"
    out.sort(key=lambda c: (c.representation.dim, c.name))
    return out


# ---------------------------------------------------------------------------
# top-down enumeration


def candidate_tops(alg: Algebra, length_cap: int, all_tops: bool = False) -> list[tuple[int, ...]]:
    """Multiplicity vectors of candidate tops, smallest first."""
    nv = alg.nvert
    out = []
    if all_tops:
        for size in range(1, length_cap + 1):
            for combo in itertools.combinations_with_replacement(range(nv), size):
                out.append(tuple(combo.count(v) for v in range(nv)))
        return out
    for size in (1, 2):
        if size > length_cap:
            break
        for combo in itertools.combinations(range(nv), size):
            out.append(tuple(int(v in combo) for v in range(nv)))
    return out


def quotients_with_top(alg: Algebra, top_vec: tuple[int, ...], length_cap: int):
    """All ``P_T / W`` with ``W`` in the radical and colength at most ``length_cap``.

    Yields each quotient once per distinct ``W``.
    """
    t = sum(top_vec)
    if t > length_cap:
        return
    P = direct_sum(*[projective(alg, v) for v in range(alg.nvert) for _ in range(top_vec[v])])
    ser = radical_series(P)
    depth = length_cap - t + 1
    if len(ser) > depth:
        P = quotient(P, ser[depth])
    start = radical(P)
    frontier = {start.key: start}
    yield quotient(P, start)
    for _ in range(length_cap - t):
        nxt = {}
        for W in frontier.values():
            for W2, _v in maximal_submodules(W):
                nxt.setdefault(W2.key, W2)
        for W in nxt.values():
            yield quotient(P, W)
        frontier = nxt


def enumerate_endok(alg: Algebra, length_cap: int = 4, all_tops: bool = False,
                    tau_cap: int = 6) -> ClassificationReport:
    if length_cap < 1:
        raise ValueError("length_cap must be at least 1")
    found = []
    for tv in candidate_tops(alg, length_cap, all_tops):
        for M in quotients_with_top(alg, tv, length_cap):
            if end_dim(M) == 1:
                found.append(M)
    reps = dedupe(found)
    notes = []
    at_cap = [M for M in reps if M.dim == length_cap]
    mods = classify_modules(reps, tau_cap)
    if at_cap:
        names = [c.name for c in mods if c.representation.dim == length_cap]
        msg = f"{len(at_cap)} module(s) with End = k at the length cap {length_cap}: {', '.join(names)}"
        notes.append(msg)
        warnings.warn(msg, CapWarning, stacklevel=2)
    return ClassificationReport(alg.name, dict(alg.pres.values), mods, length_cap, notes)


# ---------------------------------------------------------------------------
# brute-force oracle


def dimension_vectors(nv: int, total_cap: int):
    for total in range(1, total_cap + 1):
        for combo in itertools.combinations_with_replacement(range(nv), total):
            yield tuple(combo.count(v) for v in range(nv))


def _relator_tables(alg: Algebra, dims, order):
    """Flattened relator data for :func:`_kernels.filter_level` plus the stage of each relator."""
    q = alg.quiver
    src, tgt = q.sources, q.targets
    arrow_rows = np.array([dims[t] for t in tgt], dtype=np.int64)
    arrow_cols = np.array([dims[s] for s in src], dtype=np.int64)
    arrow_off = np.zeros(len(src), dtype=np.int64)
    off = 0
    for a in order:
        arrow_off[a] = off
        off += arrow_rows[a] * arrow_cols[a]
    rel_rows, rel_cols, stage = [], [], []
    term_rel, term_coef, term_start, term_len, words = [], [], [], [], []
    pos = {a: i for i, a in enumerate(order)}
    for j, r in enumerate(alg.relators):
        m0 = next(iter(r))
        rel_rows.append(dims[m0[1]])
        rel_cols.append(dims[m0[0]])
        used = {a for mono in r for a in mono[2]}
        stage.append(max((pos[a] for a in used), default=0))
        for mono, c in r.items():
            term_rel.append(j)
            term_coef.append(c)
            term_start.append(len(words))
            term_len.append(len(mono[2]))
            words.extend(mono[2])
    arr = lambda x: np.array(x, dtype=np.int64)
    return (arrow_rows, arrow_cols, arrow_off, arr(rel_rows), arr(rel_cols), arr(term_rel),
            arr(term_coef), arr(term_start), arr(term_len), arr(words), stage, off)


def representations_of_dims(alg: Algebra, dims: tuple[int, ...], chunk: int = 4096) -> np.ndarray:
    """All arrow-entry vectors of the given dimension vector satisfying the relations.

    Arrows are filled one at a time (smallest first, so a loop is fixed
    before the arrows that compose with it) and each relator is checked as
    soon as all of its arrows are assigned.
    """
    F = alg.F
    if not F.is_prime:
        raise GuardError("the brute-force oracle handles prime fields only")
    p = F.p
    q = alg.quiver
    sizes = [dims[t] * dims[s] for s, t in zip(q.sources, q.targets)]
    order = sorted(range(len(sizes)), key=lambda a: (sizes[a], a))
    (ar, ac, ao, rr, rc, tr, tc, ts, tl, w, stage, total) = _relator_tables(alg, dims, order)
    parents = np.zeros((1, total), dtype=np.int64)
    for i, a in enumerate(order):
        lo, hi = int(ao[a]), int(ao[a] + sizes[a])
        rel_ids = np.array([j for j, s in enumerate(stage) if s == i and rr[j] * rc[j] > 0], dtype=np.int64)
        if hi == lo and len(rel_ids) == 0:
            continue
        pieces = []
        for start in range(0, parents.shape[0], chunk):
            block = parents[start:start + chunk]
            if len(rel_ids):
                mask = _kernels.filter_level(block, lo, hi, p, ar, ac, ao, rel_ids, rr, rc, tr, tc, ts, tl, w)
            else:
                mask = np.ones((block.shape[0], p ** (hi - lo)), dtype=np.uint8)
            pi, vi = np.nonzero(mask)
            if len(pi) == 0:
                continue
            kids = block[pi].copy()
            for k in range(hi - lo):
                kids[:, lo + k] = (vi // p**k) % p
            pieces.append(kids)
        parents = np.concatenate(pieces) if pieces else np.zeros((0, total), dtype=np.int64)
        if parents.shape[0] == 0:
            break
    return parents


def _to_rep(alg: Algebra, dims, row: np.ndarray, offsets) -> Representation:
    q = alg.quiver
    mats = []
    for a, (s, t) in enumerate(zip(q.sources, q.targets)):
        o = offsets[a]
        mats.append(row[o:o + dims[t] * dims[s]].reshape(dims[t], dims[s]))
    return Representation(alg, dims, mats)


def brute_force_endok(alg: Algebra, dim_cap: int, tau_cap: int = 6) -> list[ClassifiedModule]:
    """Every module of total dimension ``<= dim_cap`` with ``End = k``, by exhaustion."""
    if dim_cap > 5:
        raise GuardError("brute force is limited to total dimension 5")
    if not alg.F.is_prime:
        raise GuardError("brute force is limited to prime fields")
    q = alg.quiver
    src = np.array(q.sources, dtype=np.int64)
    tgt = np.array(q.targets, dtype=np.int64)
    found = []
    for dims in dimension_vectors(alg.nvert, dim_cap):
        sizes = [dims[t] * dims[s] for s, t in zip(q.sources, q.targets)]
        order = sorted(range(len(sizes)), key=lambda a: (sizes[a], a))
        offsets = {}
        off = 0
        for a in order:
            offsets[a] = off
            off += sizes[a]
        rows = representations_of_dims(alg, dims)
        if rows.shape[0] == 0:
            continue
        ao = np.array([offsets[a] for a in range(len(sizes))], dtype=np.int64)
        ed = _kernels.end_dims(rows, alg.F.p, np.array(dims, dtype=np.int64), src, tgt, ao)
        for r in rows[ed == 1]:
            found.append(_to_rep(alg, dims, r, offsets))
    return classify_modules(dedupe(found), tau_cap)


# ---------------------------------------------------------------------------
# family-specific identities


def annihilation_check(m: Representation, family: str | None = None) -> bool:
    """The vanishing identities used to cut down the search for each block.

    SD2A1: ``βγ`` kills ``M``.  Q3B: ``δη`` kills ``M`` and ``α y = 0`` for
    every ``y`` outside ``rad M`` (checked over all vectors).
    """
    alg = m.algebra
    fam = canonical_family(family or alg.name)
    q = alg.quiver
    word = lambda *names: tuple(q.arrow_index(x) for x in names)
    if fam == "SD2A1":
        return not m.word_matrix(word("beta", "gamma")).any()
    if fam == "Q3B":
        if m.word_matrix(word("delta", "eta")).any():
            return False
        rad = radical(m)
        a = q.arrow_index("alpha")
        F = m.F
        if F.q ** m.dim > 2**20:
            raise GuardError("module too large for exhaustive vector enumeration")
        for coords in itertools.product(range(F.q), repeat=m.dim):
            y = np.array(coords, dtype=np.int64)
            if rad.contains(y):
                continue
            if m.act((a,), y).any():
                return False
        return True
    raise ValueError(f"no annihilation identities recorded for {fam}")


def top_socle_disjoint(m: Representation) -> bool:
    t = top(m)
    s = socle(m).dims
    return not any(a and b for a, b in zip(t, s))
