"""Hot inner loops, each in two flavours: numba ``@njit`` and pure numpy.

The numba versions are used when numba imports and the environment
variable ``BLOCKFORGE_NUMBA`` is not set to ``0``.  Both flavours take the
same arguments and return identical results; ``tests/test_kernels.py``
checks this and ``benchmarks/bench_kernels.py`` times them.

Field arithmetic is table driven (``add``, ``mul``, ``neg``, ``inv`` from
:class:`blockforge.fields.GF`) so the same code serves GF(2) and GF(2^e).
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - depends on the environment
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


def _env_wants_numba() -> bool:
    return os.environ.get("BLOCKFORGE_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")


USE_NUMBA = HAVE_NUMBA and _env_wants_numba()


# ---------------------------------------------------------------------------
# row reduction


def rref_numpy(a, add, mul, neg, inv):
    """Reduced row echelon form of ``a`` (modified in place).

    Returns ``(rank, pivots)`` where ``pivots`` has ``rank`` valid entries.
    """
    nrows, ncols = a.shape
    pivots = np.zeros(min(nrows, ncols), dtype=np.int64)
    rank = 0
    for col in range(ncols):
        if rank == nrows:
            break
        nz = np.nonzero(a[rank:, col])[0]
        if len(nz) == 0:
            continue
        r = rank + nz[0]
        if r != rank:
            a[[rank, r]] = a[[r, rank]]
        piv = a[rank, col]
        if piv != 1:
            a[rank] = mul[inv[piv], a[rank]]
        factors = a[:, col].copy()
        factors[rank] = 0
        rows = np.nonzero(factors)[0]
        if len(rows):
            sub = neg[mul[factors[rows][:, None], a[rank][None, :]]]
            a[rows] = add[a[rows], sub]
        pivots[rank] = col
        rank += 1
    return rank, pivots


def matmul_numpy(a, b, add, mul):
    n, k = a.shape
    m = b.shape[1]
    out = np.zeros((n, m), dtype=np.int64)
    for j in range(k):
        out = add[out, mul[a[:, j][:, None], b[j][None, :]]]
    return out


def batch_invertible_numpy(stack, add, mul, neg, inv):
    """Mask over a ``(B, n, n)`` stack: which matrices are invertible."""
    out = np.zeros(stack.shape[0], dtype=np.uint8)
    n = stack.shape[1]
    for b in range(stack.shape[0]):
        rank, _ = rref_numpy(stack[b].copy(), add, mul, neg, inv)
        out[b] = rank == n
    return out


# ---------------------------------------------------------------------------
# brute-force relation filter (prime fields)
#
# Arrow matrices live in one flat vector of entries.  Arrow ``k`` occupies
# entries ``off[k] : off[k] + rows[k] * cols[k]`` in row-major order.  A
# relator is a list of terms ``coef * word``; a word is stored leftmost
# arrow first (it acts right to left) and the empty word means the identity.


def _eval_relators_numpy(vals, p, arrow_rows, arrow_cols, arrow_off, rel_ids, rel_rows,
                         rel_cols, term_rel, term_coef, term_start, term_len, words):
    """Boolean mask over the batch ``vals`` (shape ``(B, E)``): all relators vanish."""
    batch = vals.shape[0]
    ok = np.ones(batch, dtype=bool)
    mats = []
    for k in range(len(arrow_rows)):
        r, c, o = arrow_rows[k], arrow_cols[k], arrow_off[k]
        mats.append(vals[:, o:o + r * c].reshape(batch, r, c))
    for j in rel_ids:
        acc = np.zeros((batch, rel_rows[j], rel_cols[j]), dtype=np.int64)
        for t in np.nonzero(term_rel == j)[0]:
            start, ln = term_start[t], term_len[t]
            if ln == 0:
                cur = np.broadcast_to(np.eye(rel_rows[j], dtype=np.int64), acc.shape)
            else:
                cur = mats[words[start + ln - 1]]
                for i in range(ln - 2, -1, -1):
                    cur = np.matmul(mats[words[start + i]], cur) % p
            acc = (acc + term_coef[t] * cur) % p
        ok &= ~acc.reshape(batch, -1).any(axis=1)
    return ok


def filter_level_numpy(parents, lo, hi, p, arrow_rows, arrow_cols, arrow_off, rel_ids,
                       rel_rows, rel_cols, term_rel, term_coef, term_start, term_len, words):
    """Mask ``(P, p**(hi-lo))``: which completions of each parent satisfy ``rel_ids``."""
    nvals = p ** (hi - lo)
    digits = np.zeros((nvals, hi - lo), dtype=np.int64)
    v = np.arange(nvals, dtype=np.int64)
    for i in range(hi - lo):
        digits[:, i] = v % p
        v //= p
    mask = np.zeros((parents.shape[0], nvals), dtype=np.uint8)
    for pi in range(parents.shape[0]):
        vals = np.repeat(parents[pi][None, :], nvals, axis=0)
        vals[:, lo:hi] = digits
        mask[pi] = _eval_relators_numpy(vals, p, arrow_rows, arrow_cols, arrow_off, rel_ids,
                                        rel_rows, rel_cols, term_rel, term_coef, term_start,
                                        term_len, words)
    return mask


def _end_system(vals, p, dims, arrow_src, arrow_tgt, arrow_off, x_off, nrows):
    """Intertwining system ``X_t A - A X_s = 0`` for one candidate (prime field)."""
    a = np.zeros((nrows, x_off[-1]), dtype=np.int64)
    row = 0
    for k in range(arrow_src.shape[0]):
        s, t = arrow_src[k], arrow_tgt[k]
        ds, dt = dims[s], dims[t]
        o = arrow_off[k]
        for i in range(dt):
            for j in range(ds):
                for m in range(dt):  # X_t[i, m] * A[m, j]
                    a[row, x_off[t] + i * dt + m] += vals[o + m * ds + j]
                for m in range(ds):  # - A[i, m] * X_s[m, j]
                    a[row, x_off[s] + m * ds + j] -= vals[o + i * ds + m]
                row += 1
    return a % p


def end_dims_numpy(batch, p, dims, arrow_src, arrow_tgt, arrow_off):
    """``dim End`` for each row of ``batch`` (flattened arrow entries), prime fields."""
    x_off = np.concatenate([[0], np.cumsum(dims * dims)]).astype(np.int64)
    nrows = int(sum(dims[arrow_tgt[k]] * dims[arrow_src[k]] for k in range(len(arrow_src))))
    r = np.arange(p, dtype=np.int64)
    add, mul = (r[:, None] + r[None, :]) % p, (r[:, None] * r[None, :]) % p
    neg = (-r) % p
    inv = np.array([0] + [pow(int(x), p - 2, p) for x in range(1, p)], dtype=np.int64)
    out = np.zeros(batch.shape[0], dtype=np.int64)
    for b in range(batch.shape[0]):
        a = _end_system(batch[b], p, dims, arrow_src, arrow_tgt, arrow_off, x_off, nrows)
        rank, _ = rref_numpy(a, add, mul, neg, inv)
        out[b] = x_off[-1] - rank
    return out


# ---------------------------------------------------------------------------
# numba versions

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def rref_numba(a, add, mul, neg, inv):
        nrows, ncols = a.shape
        pivots = np.zeros(min(nrows, ncols), dtype=np.int64)
        rank = 0
        for col in range(ncols):
            if rank == nrows:
                break
            r = -1
            for i in range(rank, nrows):
                if a[i, col] != 0:
                    r = i
                    break
            if r < 0:
                continue
            if r != rank:
                for j in range(ncols):
                    tmp = a[rank, j]
                    a[rank, j] = a[r, j]
                    a[r, j] = tmp
            piv = a[rank, col]
            if piv != 1:
                s = inv[piv]
                for j in range(col, ncols):
                    a[rank, j] = mul[s, a[rank, j]]
            for i in range(nrows):
                if i == rank:
                    continue
                f = a[i, col]
                if f == 0:
                    continue
                for j in range(col, ncols):
                    x = a[rank, j]
                    if x != 0:
                        a[i, j] = add[a[i, j], neg[mul[f, x]]]
            pivots[rank] = col
            rank += 1
        return rank, pivots

    @numba.njit(cache=True)
    def batch_invertible_numba(stack, add, mul, neg, inv):
        B, n, _ = stack.shape
        out = np.zeros(B, dtype=np.uint8)
        a = np.zeros((n, n), dtype=np.int64)
        for b in range(B):
            for i in range(n):
                for j in range(n):
                    a[i, j] = stack[b, i, j]
            ok = True
            for col in range(n):
                r = -1
                for i in range(col, n):
                    if a[i, col] != 0:
                        r = i
                        break
                if r < 0:
                    ok = False
                    break
                if r != col:
                    for j in range(n):
                        tmp = a[col, j]
                        a[col, j] = a[r, j]
                        a[r, j] = tmp
                s = inv[a[col, col]]
                for j in range(col, n):
                    a[col, j] = mul[s, a[col, j]]
                for i in range(col + 1, n):
                    f = a[i, col]
                    if f == 0:
                        continue
                    for j in range(col, n):
                        x = a[col, j]
                        if x != 0:
                            a[i, j] = add[a[i, j], neg[mul[f, x]]]
            if ok:
                out[b] = 1
        return out

    _end_system_numba = numba.njit(cache=True)(_end_system)

    @numba.njit(cache=True)
    def end_dims_numba(batch, p, dims, arrow_src, arrow_tgt, arrow_off):
        nv = dims.shape[0]
        x_off = np.zeros(nv + 1, dtype=np.int64)
        for v in range(nv):
            x_off[v + 1] = x_off[v] + dims[v] * dims[v]
        nrows = 0
        for k in range(arrow_src.shape[0]):
            nrows += dims[arrow_tgt[k]] * dims[arrow_src[k]]
        add = np.zeros((p, p), dtype=np.int64)
        mul = np.zeros((p, p), dtype=np.int64)
        neg = np.zeros(p, dtype=np.int64)
        inv = np.zeros(p, dtype=np.int64)
        for x in range(p):
            neg[x] = (p - x) % p
            for y in range(p):
                add[x, y] = (x + y) % p
                mul[x, y] = (x * y) % p
                if (x * y) % p == 1:
                    inv[x] = y
        out = np.zeros(batch.shape[0], dtype=np.int64)
        for b in range(batch.shape[0]):
            a = _end_system_numba(batch[b], p, dims, arrow_src, arrow_tgt, arrow_off, x_off, nrows)
            rank, _ = rref_numba(a, add, mul, neg, inv)
            out[b] = x_off[nv] - rank
        return out

    @numba.njit(cache=True)
    def matmul_numba(a, b, add, mul):
        n, k = a.shape
        m = b.shape[1]
        out = np.zeros((n, m), dtype=np.int64)
        for i in range(n):
            for t in range(k):
                x = a[i, t]
                if x == 0:
                    continue
                for j in range(m):
                    y = b[t, j]
                    if y != 0:
                        out[i, j] = add[out[i, j], mul[x, y]]
        return out

    @numba.njit(cache=True)
    def _relators_vanish(vals, p, arrow_rows, arrow_cols, arrow_off, rel_ids, rel_rows,
                         rel_cols, term_rel, term_coef, term_start, term_len, words,
                         acc, cur, nxt):
        for jj in range(rel_ids.shape[0]):
            j = rel_ids[jj]
            rr = rel_rows[j]
            rc = rel_cols[j]
            for x in range(rr * rc):
                acc[x] = 0
            for t in range(term_rel.shape[0]):
                if term_rel[t] != j:
                    continue
                start = term_start[t]
                ln = term_len[t]
                coef = term_coef[t]
                if ln == 0:
                    for x in range(rr):
                        acc[x * rc + x] = (acc[x * rc + x] + coef) % p
                    continue
                k = words[start + ln - 1]
                cr = arrow_rows[k]
                cc = arrow_cols[k]
                o = arrow_off[k]
                for x in range(cr * cc):
                    cur[x] = vals[o + x]
                for w in range(ln - 2, -1, -1):
                    k = words[start + w]
                    ar = arrow_rows[k]
                    o = arrow_off[k]
                    # (ar x cr) @ (cr x cc)
                    for a_i in range(ar):
                        for b_j in range(cc):
                            s = 0
                            for m in range(cr):
                                s += vals[o + a_i * cr + m] * cur[m * cc + b_j]
                            nxt[a_i * cc + b_j] = s % p
                    cr = ar
                    for x in range(cr * cc):
                        cur[x] = nxt[x]
                for x in range(rr * rc):
                    acc[x] = (acc[x] + coef * cur[x]) % p
            for x in range(rr * rc):
                if acc[x] != 0:
                    return False
        return True

    @numba.njit(cache=True)
    def filter_level_numba(parents, lo, hi, p, arrow_rows, arrow_cols, arrow_off, rel_ids,
                           rel_rows, rel_cols, term_rel, term_coef, term_start, term_len, words):
        width = hi - lo
        nvals = 1
        for _ in range(width):
            nvals *= p
        maxd = 1
        for k in range(arrow_rows.shape[0]):
            maxd = max(maxd, arrow_rows[k], arrow_cols[k])
        for j in range(rel_rows.shape[0]):
            maxd = max(maxd, rel_rows[j], rel_cols[j])
        acc = np.zeros(maxd * maxd, dtype=np.int64)
        cur = np.zeros(maxd * maxd, dtype=np.int64)
        nxt = np.zeros(maxd * maxd, dtype=np.int64)
        mask = np.zeros((parents.shape[0], nvals), dtype=np.uint8)
        vals = np.zeros(parents.shape[1], dtype=np.int64)
        for pi in range(parents.shape[0]):
            for x in range(parents.shape[1]):
                vals[x] = parents[pi, x]
            for v in range(nvals):
                r = v
                for i in range(width):
                    vals[lo + i] = r % p
                    r //= p
                if _relators_vanish(vals, p, arrow_rows, arrow_cols, arrow_off, rel_ids,
                                    rel_rows, rel_cols, term_rel, term_coef, term_start,
                                    term_len, words, acc, cur, nxt):
                    mask[pi, v] = 1
        return mask

else:  # pragma: no cover
    rref_numba = matmul_numba = filter_level_numba = batch_invertible_numba = end_dims_numba = None


def select(use_numba: bool | None = None):
    """Return ``(rref, matmul, filter_level, batch_invertible, end_dims)`` for a backend."""
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba and HAVE_NUMBA:
        return rref_numba, matmul_numba, filter_level_numba, batch_invertible_numba, end_dims_numba
    return rref_numpy, matmul_numpy, filter_level_numpy, batch_invertible_numpy, end_dims_numpy


rref, matmul, filter_level, batch_invertible, end_dims = select()
BACKEND = "numba" if (USE_NUMBA and HAVE_NUMBA) else "numpy"
