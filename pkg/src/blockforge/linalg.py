"""Exact dense linear algebra over GF(p^e).

:class:`FieldMatrix` is an immutable matrix tagged with its field.  The
module-level functions :func:`rref`, :func:`kernel_basis` and :func:`solve`
are the public contract; the ``*_array`` helpers work on raw ``int64``
arrays and are what the rest of the package uses in tight loops.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from .fields import GF, field

GF2 = field(2, 1)


class DimensionMismatch(ValueError):
    """Shapes of the operands are incompatible."""


def _as_array(data, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    arr = np.array(data, dtype=np.int64)
    if arr.ndim == 1 and rows is not None:
        arr = arr.reshape(rows, cols)
    if arr.size == 0:
        r = rows if rows is not None else (arr.shape[0] if arr.ndim == 2 else 0)
        c = cols if cols is not None else (arr.shape[1] if arr.ndim == 2 else 0)
        arr = np.zeros((r, c), dtype=np.int64)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d array, got shape {arr.shape}")
    return arr


class FieldMatrix:
    """Immutable ``rows x cols`` matrix with entries in ``field``."""

    __slots__ = ("field", "data")

    def __init__(self, data, F: GF = GF2, rows: int | None = None, cols: int | None = None):
        arr = _as_array(data, rows, cols)
        if arr.size and (arr.min() < 0 or arr.max() >= F.q):
            raise ValueError(f"entries out of range for {F}")
        arr.setflags(write=False)
        object.__setattr__(self, "field", F)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("FieldMatrix is immutable")

    @classmethod
    def _wrap(cls, arr: np.ndarray, F: GF) -> "FieldMatrix":
        m = object.__new__(cls)
        arr = np.ascontiguousarray(arr, dtype=np.int64)
        arr.setflags(write=False)
        object.__setattr__(m, "field", F)
        object.__setattr__(m, "data", arr)
        return m

    @classmethod
    def zeros(cls, rows: int, cols: int, F: GF = GF2) -> "FieldMatrix":
        return cls._wrap(np.zeros((rows, cols), dtype=np.int64), F)

    @classmethod
    def identity(cls, n: int, F: GF = GF2) -> "FieldMatrix":
        return cls._wrap(np.eye(n, dtype=np.int64), F)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def T(self) -> "FieldMatrix":
        return FieldMatrix._wrap(self.data.T, self.field)

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        return FieldMatrix._wrap(matmul_array(self.data, other.data, self.field), self.field)

    def __add__(self, other: "FieldMatrix") -> "FieldMatrix":
        if self.shape != other.shape:
            raise DimensionMismatch(f"cannot add {self.shape} and {other.shape}")
        return FieldMatrix._wrap(self.field.add_table[self.data, other.data], self.field)

    def __sub__(self, other: "FieldMatrix") -> "FieldMatrix":
        if self.shape != other.shape:
            raise DimensionMismatch(f"cannot subtract {self.shape} and {other.shape}")
        F = self.field
        return FieldMatrix._wrap(F.add_table[self.data, F.neg_table[other.data]], F)

    def scale(self, c: int) -> "FieldMatrix":
        return FieldMatrix._wrap(self.field.mul_table[c, self.data], self.field)

    def is_zero(self) -> bool:
        return not self.data.any()

    def tolist(self) -> list[list[int]]:
        return self.data.tolist()

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return self.field is other.field and self.shape == other.shape and np.array_equal(self.data, other.data)

    def __hash__(self) -> int:
        return hash((self.field.q, self.shape, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"FieldMatrix({self.data.tolist()}, {self.field!r})"


# ---------------------------------------------------------------------------
# array level


def matmul_array(a: np.ndarray, b: np.ndarray, F: GF) -> np.ndarray:
    if a.shape[1] == 0 or a.shape[0] == 0 or b.shape[1] == 0:
        return np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    if F.is_prime:
        return (a @ b) % F.p
    return _kernels.matmul(np.ascontiguousarray(a), np.ascontiguousarray(b), F.add_table, F.mul_table)


def add_array(a: np.ndarray, b: np.ndarray, F: GF) -> np.ndarray:
    if F.is_prime:
        return (a + b) % F.p
    return F.add_table[a, b]


def sub_array(a: np.ndarray, b: np.ndarray, F: GF) -> np.ndarray:
    if F.is_prime:
        return (a - b) % F.p
    return F.add_table[a, F.neg_table[b]]


def scale_array(c: int, a: np.ndarray, F: GF) -> np.ndarray:
    if F.is_prime:
        return (c * a) % F.p
    return F.mul_table[c, a]


def rref_array(a: np.ndarray, F: GF) -> tuple[np.ndarray, int, list[int]]:
    work = np.array(a, dtype=np.int64, copy=True)
    if work.size == 0:
        return work, 0, []
    rank, piv = _kernels.rref(work, F.add_table, F.mul_table, F.neg_table, F.inv_table)
    return work, int(rank), [int(x) for x in piv[:rank]]


def rank_array(a: np.ndarray, F: GF) -> int:
    return rref_array(a, F)[1]


def kernel_array(a: np.ndarray, F: GF) -> np.ndarray:
    """Columns spanning the right null space of ``a``."""
    ncols = a.shape[1]
    r, rank, piv = rref_array(a, F)
    free = [j for j in range(ncols) if j not in set(piv)]
    out = np.zeros((ncols, len(free)), dtype=np.int64)
    for k, j in enumerate(free):
        out[j, k] = 1
        for i, pc in enumerate(piv):
            out[pc, k] = F.neg_table[r[i, j]]
    return out


def solve_array(a: np.ndarray, b: np.ndarray, F: GF) -> Optional[np.ndarray]:
    """One solution ``x`` of ``a x = b`` (free variables zero), or ``None``.

    ``b`` may be a vector or a matrix of right-hand sides.
    """
    vec = b.ndim == 1
    bb = b.reshape(-1, 1) if vec else b
    if a.shape[0] != bb.shape[0]:
        raise DimensionMismatch(f"system has {a.shape[0]} equations but right-hand side has {bb.shape[0]} rows")
    n = a.shape[1]
    aug = np.concatenate([a.reshape(a.shape[0], n), bb], axis=1)
    r, rank, piv = rref_array(aug, F)
    if any(pc >= n for pc in piv):
        return None
    x = np.zeros((n, bb.shape[1]), dtype=np.int64)
    for i, pc in enumerate(piv):
        x[pc] = r[i, n:]
    return x[:, 0] if vec else x


def row_basis_array(a: np.ndarray, F: GF) -> np.ndarray:
    """Canonical (RREF) basis of the row space, as rows."""
    r, rank, _ = rref_array(a, F)
    return r[:rank]


def column_basis_array(a: np.ndarray, F: GF) -> np.ndarray:
    """Canonical basis of the column space, as columns (RREF of the transpose)."""
    if a.shape[1] == 0:
        return np.zeros((a.shape[0], 0), dtype=np.int64)
    return row_basis_array(a.T, F).T.copy()


def hstack(blocks: Sequence[np.ndarray], rows: int) -> np.ndarray:
    blocks = [b for b in blocks if b.shape[1]]
    if not blocks:
        return np.zeros((rows, 0), dtype=np.int64)
    return np.concatenate(blocks, axis=1)


# ---------------------------------------------------------------------------
# public contract on FieldMatrix


def rref(m: FieldMatrix) -> tuple[FieldMatrix, int, list[int]]:
    """Reduced row echelon form, rank, and pivot columns."""
    r, rank, piv = rref_array(m.data, m.field)
    return FieldMatrix._wrap(r, m.field), rank, piv


def rank(m: FieldMatrix) -> int:
    return rank_array(m.data, m.field)


def kernel_basis(m: FieldMatrix) -> FieldMatrix:
    """Matrix whose columns form a basis of ``{x : m x = 0}``."""
    return FieldMatrix._wrap(kernel_array(m.data, m.field), m.field)


def solve(a: FieldMatrix, b: FieldMatrix | Iterable[int]) -> Optional[FieldMatrix]:
    """Solve ``a x = b`` for a column ``b``.

    Returns ``None`` exactly when ``b`` is not in the column space of ``a``.
    Non-pivot variables are set to zero.  Raises :class:`DimensionMismatch`
    when ``b`` has the wrong length.
    """
    F = a.field
    bd = b.data if isinstance(b, FieldMatrix) else np.array(list(b), dtype=np.int64).reshape(-1, 1)
    if bd.ndim == 1:
        bd = bd.reshape(-1, 1)
    if bd.shape[1] != 1:
        raise DimensionMismatch("right-hand side must be a single column")
    x = solve_array(a.data, bd, F)
    return None if x is None else FieldMatrix._wrap(x, F)
