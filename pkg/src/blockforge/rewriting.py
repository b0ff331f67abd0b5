"""Noncommutative rewriting for path algebras ``kQ/I``.

Completion follows the diamond lemma: leading monomials (length-lex order,
arrows compared in declaration order) become rewrite rules and every
overlap ambiguity between two leading monomials is resolved, processed in
order of increasing overlap length.  The irreducible monomials of the
completed system form a basis of the quotient.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Optional

import numpy as np

from .fields import GF
from .linalg import rank_array, row_basis_array
from .presentations import (AlgebraPresentation, Monomial, Poly, Quiver, mono_mul, poly_add,
                            poly_scale)


class CapExceeded(RuntimeError):
    """Completion produced new rules beyond the degree cap."""


def order_key(m: Monomial):
    return (len(m[2]), m[2], m[0])


def leading(poly: Poly) -> Monomial:
    return max(poly, key=order_key)


def default_degree_cap(pres: AlgebraPresentation) -> int:
    n = pres.values.get("n")
    base = 4 * 2 ** (n - 2) + 4 if n is not None and n >= 2 else 16
    longest = max((len(m[2]) for poly in pres.relator_polys() for m in poly), default=0)
    return max(base, longest)


class _Rules:
    """Mutable rule set used while completing, and the reducer shared with the final system."""

    def __init__(self, F: GF):
        self.F = F
        self.rules: dict[tuple[int, ...], tuple[Monomial, Poly]] = {}
        self.lengths: set[int] = set()

    def find(self, word: tuple[int, ...], skip: tuple[int, ...] | None = None):
        """Leftmost, then shortest, rule occurrence inside ``word``."""
        n = len(word)
        lens = sorted(self.lengths)
        for i in range(n):
            for ln in lens:
                if i + ln > n:
                    break
                sub = word[i:i + ln]
                if sub in self.rules and sub != skip:
                    return i, sub
        return None

    def rewrite_once(self, m: Monomial, skip=None) -> Optional[Poly]:
        hit = self.find(m[2], skip)
        if hit is None:
            return None
        i, sub = hit
        _, rhs = self.rules[sub]
        left, right = m[2][:i], m[2][i + len(sub):]
        out: Poly = {}
        F = self.F
        for rm, c in rhs.items():
            w = left + rm[2] + right
            key = (m[0], m[1], w)
            v = F.add(out.get(key, 0), c)
            if v:
                out[key] = v
            else:
                out.pop(key, None)
        return out

    def reduce(self, poly: Poly, memo: dict | None = None, skip=None) -> Poly:
        F = self.F
        work = dict(poly)
        result: Poly = {}
        heap = [(_neg_key(m), m) for m in work]
        heapq.heapify(heap)
        while heap:
            _, m = heapq.heappop(heap)
            c = work.pop(m, 0)
            if not c:
                continue
            if memo is not None and m in memo:
                for mm, cc in memo[m].items():
                    v = F.add(result.get(mm, 0), F.mul(c, cc))
                    if v:
                        result[mm] = v
                    else:
                        result.pop(mm, None)
                continue
            step = self.rewrite_once(m, skip)
            if step is None:
                v = F.add(result.get(m, 0), c)
                if v:
                    result[m] = v
                else:
                    result.pop(m, None)
                continue
            for mm, cc in step.items():
                old = work.get(mm, 0)
                if not old:
                    heapq.heappush(heap, (_neg_key(mm), mm))
                v = F.add(old, F.mul(c, cc))
                if v:
                    work[mm] = v
                else:
                    work.pop(mm, None)
        return result

    def add(self, lm: Monomial, rhs: Poly) -> None:
        self.rules[lm[2]] = (lm, rhs)
        self.lengths.add(len(lm[2]))

    def remove(self, word) -> None:
        del self.rules[word]
        self.lengths = {len(w) for w in self.rules}


def _neg_key(m: Monomial):
    # max-heap on the monomial order via negated components
    return (-len(m[2]), tuple(-x for x in m[2]), -m[0])


def _monic_rule(poly: Poly, F: GF) -> tuple[Monomial, Poly]:
    lm = leading(poly)
    inv = F.inv(poly[lm])
    rhs = {m: F.neg(F.mul(inv, c)) for m, c in poly.items() if m != lm}
    return lm, rhs


def _overlaps(l1: tuple[int, ...], l2: tuple[int, ...]):
    """Proper overlaps: a suffix of ``l1`` equals a prefix of ``l2``."""
    for k in range(1, min(len(l1), len(l2))):
        if l1[len(l1) - k:] == l2[:k]:
            yield k


@dataclass
class RewriteSystem:
    quiver: Quiver
    F: GF
    rules: dict  # lhs word -> (lhs monomial, rhs poly)
    order: str = "deglex"
    degree_cap: Optional[int] = None
    _reducer: _Rules = dc_field(default=None, repr=False)
    _memo: dict = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self._reducer is None:
            red = _Rules(self.F)
            for w, (lm, rhs) in self.rules.items():
                red.add(lm, rhs)
            self._reducer = red

    def normal_form(self, elem: Poly | Monomial) -> Poly:
        if isinstance(elem, tuple):
            elem = {elem: 1}
        out: Poly = {}
        F = self.F
        for m, c in elem.items():
            if m not in self._memo:
                self._memo[m] = self._reducer.reduce({m: 1})
            for mm, cc in self._memo[m].items():
                v = F.add(out.get(mm, 0), F.mul(c, cc))
                if v:
                    out[mm] = v
                else:
                    out.pop(mm, None)
        return out

    def is_irreducible(self, m: Monomial) -> bool:
        return self._reducer.find(m[2]) is None

    @property
    def leading_words(self) -> list[tuple[int, ...]]:
        return sorted(self.rules, key=lambda w: (len(w), w))


def complete(pres: AlgebraPresentation, degree_cap: int | None = None,
             max_rules: int = 20000) -> RewriteSystem:
    """Complete the relators of ``pres`` to a confluent rewrite system."""
    F = pres.field
    polys = [p for p in pres.relator_polys() if p]
    if degree_cap is None:
        degree_cap = default_degree_cap(pres)
    longest = max((len(m[2]) for p in polys for m in p), default=0)
    if degree_cap < longest:
        raise ValueError(f"degree_cap {degree_cap} is below the longest relator length {longest}")
    R = _Rules(F)
    counter = itertools.count()
    queue: list = []
    for p in polys:
        heapq.heappush(queue, (len(leading(p)[2]), next(counter), "poly", p))

    def schedule_overlaps(w_new: tuple[int, ...]):
        for w_old in list(R.rules):
            for l1, l2 in ((w_new, w_old), (w_old, w_new)) if w_old != w_new else ((w_new, w_new),):
                for k in _overlaps(l1, l2):
                    total = len(l1) + len(l2) - k
                    heapq.heappush(queue, (total, next(counter), "overlap", (l1, l2, k)))

    while queue:
        degree, _, kind, data = heapq.heappop(queue)
        if kind == "poly":
            f = data
        else:
            l1, l2, k = data
            if l1 not in R.rules or l2 not in R.rules:
                continue
            _, r1 = R.rules[l1]
            _, r2 = R.rules[l2]
            head, tail = l1[:len(l1) - k], l2[k:]
            qv = pres.quiver
            head_m = (qv.sources[head[-1]], qv.targets[head[0]], head)
            tail_m = (qv.sources[tail[-1]], qv.targets[tail[0]], tail)
            a, b = {}, {}
            for rm, c in r1.items():
                a = poly_add(a, {mono_mul(rm, tail_m): c}, F)
            for rm, c in r2.items():
                b = poly_add(b, {mono_mul(head_m, rm): c}, F)
            f = poly_add(a, poly_scale(b, F.neg(1), F), F)
        f = R.reduce(f)
        if not f:
            continue
        if kind == "overlap" and degree > degree_cap:
            raise CapExceeded(f"new rule from an overlap of length {degree} > degree cap {degree_cap}")
        lm, rhs = _monic_rule(f, F)
        if not lm[2]:
            raise CapExceeded("a vertex idempotent lies in the ideal; the presentation is degenerate")
        # inter-reduce: rules whose left side contains the new leading word
        for w in list(R.rules):
            if _contains(w, lm[2]):
                old_lm, old_rhs = R.rules[w]
                R.remove(w)
                back = poly_add({old_lm: 1}, poly_scale(old_rhs, F.neg(1), F), F)
                heapq.heappush(queue, (len(w), next(counter), "poly", back))
        R.add(lm, rhs)
        if len(R.rules) > max_rules:
            raise CapExceeded(f"more than {max_rules} rules")
        schedule_overlaps(lm[2])

    # final inter-reduction of right-hand sides
    final = _Rules(F)
    for w, (lm, rhs) in R.rules.items():
        final.add(lm, rhs)
    for w in list(final.rules):
        lm, rhs = final.rules[w]
        final.rules[w] = (lm, final.reduce(rhs))
    return RewriteSystem(pres.quiver, F, dict(final.rules), "deglex", degree_cap, final)


def _contains(word, sub) -> bool:
    n, k = len(word), len(sub)
    return any(word[i:i + k] == sub for i in range(n - k + 1))


# ---------------------------------------------------------------------------
# basis and structure constants


@dataclass
class NormalBasis:
    quiver: Quiver
    F: GF
    monomials: list  # basis monomials in canonical order
    index: dict  # monomial -> position
    mult: np.ndarray  # (dim, dim, dim) structure constants, mult[i, j] = coords of b_i * b_j
    system: RewriteSystem

    @property
    def dimension(self) -> int:
        return len(self.monomials)

    def pair_counts(self) -> dict[tuple[str, str], int]:
        counts: dict = {}
        V = self.quiver.vertices
        for m in self.monomials:
            key = (V[m[0]], V[m[1]])
            counts[key] = counts.get(key, 0) + 1
        return counts

    def idempotent(self, v: int) -> int:
        return self.index[(v, v, ())]

    def coords(self, poly: Poly) -> np.ndarray:
        x = np.zeros(self.dimension, dtype=np.int64)
        for m, c in self.system.normal_form(poly).items():
            x[self.index[m]] = c
        return x

    def starting_at(self, v: int) -> list[int]:
        """Positions of basis monomials with source ``v`` (a basis of the projective at ``v``)."""
        return [i for i, m in enumerate(self.monomials) if m[0] == v]


def enumerate_irreducible(rs: RewriteSystem, max_length: int | None = None) -> list[Monomial]:
    """Irreducible monomials by length; longer than the degree cap counts as divergence."""
    if max_length is None:
        max_length = rs.degree_cap if rs.degree_cap is not None else 10_000
    q = rs.quiver
    src, tgt = q.sources, q.targets
    layer = [(v, v, ()) for v in range(len(q.vertices))]
    out = list(layer)
    length = 0
    while layer:
        length += 1
        if length > max_length:
            raise CapExceeded(f"irreducible monomials longer than {max_length}; raise the degree cap "
                              "or check that the quotient is finite-dimensional")
        nxt = []
        for m in layer:
            for a in range(len(q.arrows)):
                if src[a] != m[1]:
                    continue
                w = (a,) + m[2]
                # only prefixes can contain a new reducible piece
                if any(w[:k] in rs.rules for k in range(1, len(w) + 1)):
                    continue
                nxt.append((m[0], tgt[a], w))
        nxt.sort(key=order_key)
        out.extend(nxt)
        layer = nxt
    return out


def basis(rs: RewriteSystem) -> NormalBasis:
    mons = enumerate_irreducible(rs)
    index = {m: i for i, m in enumerate(mons)}
    dim = len(mons)
    dtype = np.uint8 if rs.F.q <= 256 else np.int64
    mult = np.zeros((dim, dim, dim), dtype=dtype)
    for i, a in enumerate(mons):
        for j, b in enumerate(mons):
            m = mono_mul(a, b)
            if m is None:
                continue
            for mm, c in rs.normal_form(m).items():
                mult[i, j, index[mm]] = c
    return NormalBasis(rs.quiver, rs.F, mons, index, mult, rs)


def compute_basis(pres: AlgebraPresentation, degree_cap: int | None = None) -> NormalBasis:
    return basis(complete(pres, degree_cap))


def radical_power_bases(nb: NormalBasis) -> list[np.ndarray]:
    """Row bases (in basis coordinates) of J, J^2, ..., ending with the first zero power."""
    F = nb.F
    arrows = [i for i, m in enumerate(nb.monomials) if len(m[2]) == 1]
    rad = [i for i, m in enumerate(nb.monomials) if m[2]]
    cur = np.eye(nb.dimension, dtype=np.int64)[rad]
    out = [cur]
    mult = nb.mult.astype(np.int64)
    while cur.shape[0]:
        rows = []
        for a in arrows:
            # left multiplication by the arrow: x -> a * x
            left = mult[a]  # (dim, dim): row j = coords of a * b_j
            rows.append((cur @ left) % F.p if F.is_prime else _table_matmul(cur, left, F))
        stacked = np.concatenate(rows, axis=0) if rows else np.zeros((0, nb.dimension), dtype=np.int64)
        cur = row_basis_array(stacked, F) if stacked.shape[0] else stacked
        out.append(cur)
        if len(out) > nb.dimension + 2:
            raise RuntimeError("radical is not nilpotent")
    return out


def _table_matmul(a, b, F):
    from .linalg import matmul_array
    return matmul_array(a, b, F)


def radical_nilpotency(nb: NormalBasis) -> int:
    """Smallest ``m`` with ``J^m = 0`` for the arrow ideal ``J``."""
    return len(radical_power_bases(nb))
