"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 3]

Each kernel runs once untimed (JIT compile) and then ``--repeat`` times;
the best wall time is reported.  Results of the two backends are compared
on the way.
"""

import argparse
import time

import numpy as np

from blockforge import _kernels
from blockforge.classifier import _relator_tables, representations_of_dims
from blockforge.fields import field
from blockforge.repmod import Algebra


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(rng):
    F = field(2, 2)
    tabs = (F.add_table, F.mul_table, F.neg_table, F.inv_table)
    mats = [rng.integers(0, 4, size=(60, 80)) for _ in range(20)]
    a, b = rng.integers(0, 4, size=(120, 120)), rng.integers(0, 4, size=(120, 120))
    stack = rng.integers(0, 2, size=(20000, 5, 5))
    G2 = field(2)
    alg = Algebra.family("KleinFourLocal", 2)
    dims = (3,)
    q = alg.quiver
    tables = _relator_tables(alg, dims, [0, 1])
    ar, ac, ao, rr, rc, tr, tc, ts, tl, w, stage, total = tables
    parents = np.zeros((64, total), dtype=np.int64)
    parents[:, :9] = rng.integers(0, 2, size=(64, 9))
    rel_ids = np.arange(len(rr), dtype=np.int64)
    rows = representations_of_dims(alg, dims)
    src = np.array(q.sources, dtype=np.int64)
    tgt = np.array(q.targets, dtype=np.int64)

    def rref(k):
        def go():
            return [k[0](m.copy(), *tabs)[0] for m in mats]
        return go

    def matmul(k):
        return lambda: k[1](a, b, F.add_table, F.mul_table)

    def invertible(k):
        return lambda: k[3](stack.copy(), G2.add_table, G2.mul_table, G2.neg_table, G2.inv_table)

    def filter_level(k):
        return lambda: k[2](parents, 9, 18, 2, ar, ac, ao, rel_ids, rr, rc, tr, tc, ts, tl, w)

    def end_dims(k):
        return lambda: k[4](rows, 2, np.array(dims, dtype=np.int64), src, tgt, ao)

    return [("rref 20 x (60x80) GF(4)", rref), ("matmul 120^3 GF(4)", matmul),
            ("invertible 20000 x 5x5 GF(2)", invertible), ("relation filter K4 dim 3", filter_level),
            (f"end dims {rows.shape[0]} x K4 dim 3", end_dims)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return
    numba_k = _kernels.select(True)
    numpy_k = _kernels.select(False)
    rng = np.random.default_rng(0)
    print(f"{'kernel':<34}{'numpy s':>10}{'numba s':>10}{'speedup':>9}")
    for label, make in cases(rng):
        t_np, out_np = best_of(make(numpy_k), args.repeat)
        t_nb, out_nb = best_of(make(numba_k), args.repeat)
        assert np.array_equal(np.asarray(out_np), np.asarray(out_nb)), f"backends disagree on {label}"
        print(f"{label:<34}{t_np:>10.4f}{t_nb:>10.4f}{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
