import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockforge.fields import field
from blockforge.linalg import DimensionMismatch, FieldMatrix, kernel_basis, rank, rref, solve

GF2 = field(2)
GF4 = field(2, 2)


def matrices(F, max_side=6):
    return st.integers(1, max_side).flatmap(
        lambda r: st.integers(1, max_side).flatmap(
            lambda c: st.lists(st.integers(0, F.q - 1), min_size=r * c, max_size=r * c).map(
                lambda xs: FieldMatrix(np.array(xs).reshape(r, c), F))))


def all_vectors(n, q):
    return np.array(list(itertools.product(range(q), repeat=n)), dtype=np.int64).reshape(-1, n)


def apply(m, vecs):
    F = m.field
    out = np.zeros((vecs.shape[0], m.rows), dtype=np.int64)
    for j in range(m.cols):
        out = F.add_table[out, F.mul_table[vecs[:, j][:, None], m.data[:, j][None, :]]]
    return out


# worked examples


def test_rref_zero():
    r, k, piv = rref(FieldMatrix.zeros(3, 3))
    assert r.is_zero() and k == 0 and piv == []


def test_rref_identity():
    r, k, piv = rref(FieldMatrix.identity(2))
    assert r == FieldMatrix.identity(2) and k == 2 and piv == [0, 1]


def test_rref_rank_one():
    r, k, piv = rref(FieldMatrix([[1, 1], [1, 1]]))
    assert k == 1 and piv == [0]
    assert r.tolist() == [[1, 1], [0, 0]]


def test_kernel_examples():
    assert kernel_basis(FieldMatrix.identity(4)).cols == 0
    assert kernel_basis(FieldMatrix.zeros(2, 3)).cols == 3
    assert kernel_basis(FieldMatrix([[1, 1]])).tolist() == [[1], [1]]


def test_solve_examples():
    b = [1, 0, 1]
    assert solve(FieldMatrix.identity(3), b).tolist() == [[1], [0], [1]]
    assert solve(FieldMatrix.zeros(2, 2), [1, 0]) is None
    # free variable set to zero
    assert solve(FieldMatrix([[1, 1], [0, 0]]), [1, 0]).tolist() == [[1], [0]]


def test_solve_dimension_mismatch_is_not_no_solution():
    with pytest.raises(DimensionMismatch):
        solve(FieldMatrix.identity(2), [1, 0, 0])


def test_matrix_is_immutable():
    m = FieldMatrix([[1, 0], [0, 1]])
    with pytest.raises(AttributeError):
        m.data = None
    with pytest.raises(ValueError):
        m.data[0, 0] = 0


def test_entries_checked():
    with pytest.raises(ValueError):
        FieldMatrix([[2]], GF2)


def test_shape_mismatch_in_product():
    with pytest.raises(DimensionMismatch):
        FieldMatrix.identity(2) @ FieldMatrix.identity(3)


# exhaustive oracle on small matrices


@settings(max_examples=150, deadline=None)
@given(matrices(GF2, 5))
def test_rank_and_kernel_against_enumeration(m):
    vecs = all_vectors(m.cols, 2)
    images = apply(m, vecs)
    image_size = len({tuple(x) for x in images})
    kernel_size = int((~images.any(axis=1)).sum())
    k = rank(m)
    assert image_size == 2**k
    assert kernel_size == 2 ** kernel_basis(m).cols


@settings(max_examples=60, deadline=None)
@given(matrices(GF4, 3))
def test_rank_against_enumeration_gf4(m):
    images = apply(m, all_vectors(m.cols, 4))
    assert len({tuple(x) for x in images}) == 4 ** rank(m)


# properties


@settings(max_examples=200, deadline=None)
@given(matrices(GF4, 8))
def test_rank_nullity(m):
    K = kernel_basis(m)
    assert rank(m) + K.cols == m.cols
    assert (m @ K).is_zero()
    assert rank(K) == K.cols


@settings(max_examples=200, deadline=None)
@given(matrices(GF4, 7))
def test_rref_idempotent_and_row_space(m):
    r, k, piv = rref(m)
    assert rref(r)[0] == r
    assert len(piv) == k
    # same row space: stacking does not raise the rank
    assert rank(FieldMatrix(np.vstack([m.data, r.data]), GF4)) == k


@settings(max_examples=200, deadline=None)
@given(matrices(GF4, 6), st.data())
def test_solve_is_exact(a, data):
    b = data.draw(st.lists(st.integers(0, 3), min_size=a.rows, max_size=a.rows))
    x = solve(a, b)
    in_span = rank(FieldMatrix(np.hstack([a.data, np.array(b).reshape(-1, 1)]), GF4)) == rank(a)
    assert (x is not None) == in_span
    if x is not None:
        assert (a @ x).tolist() == [[v] for v in b]


def test_rank_nullity_bulk():
    rng = np.random.default_rng(1)
    for _ in range(2000):
        r, c = rng.integers(1, 9, size=2)
        m = FieldMatrix(rng.integers(0, 2, size=(r, c)))
        assert rank(m) + kernel_basis(m).cols == c
