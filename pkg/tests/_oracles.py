"""Independent reference computations used by the tests.

Nothing here calls the rewriting engine or the module code; the point is
to check those against plain linear algebra.
"""

import itertools

import numpy as np


def paths_below(quiver, length):
    """All paths of length < ``length`` as (src, tgt, word) with the word leftmost first."""
    src, tgt = quiver.sources, quiver.targets
    layer = [(v, v, ()) for v in range(len(quiver.vertices))]
    out = list(layer)
    for _ in range(length - 1):
        layer = [(m[0], tgt[a], (a,) + m[2]) for m in layer for a in range(len(src)) if src[a] == m[1]]
        out.extend(layer)
    return out


def quotient_dimension_gf2(pres, length):
    """dim of kQ/I over GF(2), assuming every path of length >= ``length`` lies in I.

    The ideal is spanned by the relators closed under left and right
    multiplication by arrows, all truncated at ``length``; elimination uses
    Python integers as bit vectors.
    """
    assert pres.p == 2 and pres.e == 1
    q = pres.quiver
    paths = paths_below(q, length)
    index = {m: i for i, m in enumerate(paths)}
    src, tgt = q.sources, q.targets
    pivots = {}

    def reduce(v):
        while v:
            h = v.bit_length() - 1
            if h not in pivots:
                return v
            v ^= pivots[h]
        return 0

    def encode(poly):
        v = 0
        for m, c in poly.items():
            if c % 2 and m in index:
                v ^= 1 << index[m]
        return v

    def shift(v, a, left):
        out = 0
        while v:
            h = v.bit_length() - 1
            v ^= 1 << h
            s, t, w = paths[h]
            if left and src[a] == t:
                key = (s, tgt[a], (a,) + w)
            elif not left and tgt[a] == s:
                key = (src[a], t, w + (a,))
            else:
                continue
            if key in index:
                out ^= 1 << index[key]
        return out

    queue = [encode(p) for p in pres.relator_polys()]
    while queue:
        v = reduce(queue.pop())
        if not v:
            continue
        pivots[v.bit_length() - 1] = v
        for a in range(len(src)):
            queue.append(shift(v, a, True))
            queue.append(shift(v, a, False))
    return len(paths) - len(pivots)


def end_dim_bruteforce(mats, dims, sources, targets):
    """dim End over GF(2) by enumerating all vertex-wise matrices (tiny modules only)."""
    blocks = [list(itertools.product(range(2), repeat=d * d)) for d in dims]
    count = 0
    for choice in itertools.product(*blocks):
        X = [np.array(c, dtype=np.int64).reshape(d, d) for c, d in zip(choice, dims)]
        if all(((X[t] @ A - A @ X[s]) % 2 == 0).all() for A, s, t in zip(mats, sources, targets)):
            count += 1
    return count.bit_length() - 1
