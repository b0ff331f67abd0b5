import json

import numpy as np
import pytest

from blockforge import _kernels
from blockforge.classifier import _relator_tables, representations_of_dims
from blockforge.fields import field

pytestmark = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")

NUMBA = _kernels.select(True)
NUMPY = _kernels.select(False)


def tables(F):
    return F.add_table, F.mul_table, F.neg_table, F.inv_table


@pytest.mark.parametrize("F", [field(2), field(2, 2), field(3)], ids=repr)
def test_rref_backends_agree(F):
    rng = np.random.default_rng(0)
    for _ in range(200):
        a = rng.integers(0, F.q, size=tuple(rng.integers(1, 10, size=2)))
        x, y = a.copy(), a.copy()
        r1, p1 = NUMBA[0](x, *tables(F))
        r2, p2 = NUMPY[0](y, *tables(F))
        assert r1 == r2
        assert np.array_equal(p1[:r1], p2[:r2])
        assert np.array_equal(x, y)


def test_matmul_backends_agree():
    F = field(2, 2)
    rng = np.random.default_rng(1)
    for _ in range(100):
        n, k, m = rng.integers(1, 8, size=3)
        a = rng.integers(0, 4, size=(n, k))
        b = rng.integers(0, 4, size=(k, m))
        assert np.array_equal(NUMBA[1](a, b, F.add_table, F.mul_table),
                              NUMPY[1](a, b, F.add_table, F.mul_table))


def test_batch_invertible_backends_agree():
    F = field(2)
    rng = np.random.default_rng(2)
    stack = rng.integers(0, 2, size=(500, 4, 4))
    a = NUMBA[3](stack.copy(), *tables(F))
    b = NUMPY[3](stack.copy(), *tables(F))
    assert np.array_equal(a, b)
    # |GL_4(F_2)| / 2^16 is about 0.31
    assert 0.2 < a.mean() < 0.45


@pytest.mark.parametrize("fixture,dims", [("k4", (2,)), ("sd4", (1, 1)), ("sd4", (2, 1)),
                                          ("q3b", (1, 1, 1))])
def test_relation_filter_and_end_dims_agree(request, monkeypatch, fixture, dims):
    alg = request.getfixturevalue(fixture)
    monkeypatch.setattr(_kernels, "filter_level", NUMBA[2])
    rows_a = representations_of_dims(alg, dims)
    monkeypatch.setattr(_kernels, "filter_level", NUMPY[2])
    rows_b = representations_of_dims(alg, dims)
    assert np.array_equal(rows_a, rows_b)
    q = alg.quiver
    sizes = [dims[t] * dims[s] for s, t in zip(q.sources, q.targets)]
    order = sorted(range(len(sizes)), key=lambda a: (sizes[a], a))
    ao = _relator_tables(alg, dims, order)[2]
    args = (alg.F.p, np.array(dims, dtype=np.int64), np.array(q.sources, dtype=np.int64),
            np.array(q.targets, dtype=np.int64), ao)
    assert np.array_equal(NUMBA[4](rows_a, *args), NUMPY[4](rows_a, *args))


def test_env_switch(monkeypatch):
    monkeypatch.setenv("BLOCKFORGE_NUMBA", "0")
    assert not _kernels._env_wants_numba()
    monkeypatch.setenv("BLOCKFORGE_NUMBA", "1")
    assert _kernels._env_wants_numba()


def test_numpy_fallback_end_to_end():
    import os
    import subprocess
    import sys
    code = ("import warnings, json; warnings.simplefilter('ignore');"
            "from blockforge import _kernels; from blockforge.repmod import Algebra;"
            "from blockforge.classifier import enumerate_endok, brute_force_endok;"
            "a = Algebra.family('Q3B', 4);"
            "print(json.dumps([_kernels.BACKEND, sorted(enumerate_endok(a, 3).names),"
            " sorted(m.name for m in brute_force_endok(a, 2))]))")
    outs = {}
    for flag in ("0", "1"):
        env = dict(os.environ, BLOCKFORGE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        outs[flag] = json.loads(res.stdout)
    assert outs["0"][0] == "numpy" and outs["1"][0] == "numba"
    assert outs["0"][1:] == outs["1"][1:]
