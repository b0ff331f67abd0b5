"""Finite fields GF(p^e) as lookup tables.

Elements are plain integers ``0 <= x < q``.  For ``e > 1`` an element is
the polynomial whose base-``p`` digits (least significant first) are its
coefficients, reduced modulo a fixed Conway polynomial.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

# Conway polynomials, coefficients from the constant term upwards (monic).
CONWAY = {
    (2, 1): (1, 1),
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (3, 1): (1, 1),
    (3, 2): (2, 2, 1),
    (3, 3): (1, 2, 0, 1),
    (3, 4): (2, 0, 0, 2, 1),
    (5, 1): (3, 1),
    (5, 2): (2, 4, 1),
    (5, 3): (3, 3, 0, 1),
    (7, 1): (4, 1),
    (7, 2): (3, 6, 1),
    (11, 1): (9, 1),
    (13, 1): (11, 1),
}

MAX_ORDER = 256


class FieldError(ValueError):
    pass


def _digits(x: int, p: int, e: int) -> list[int]:
    out = []
    for _ in range(e):
        out.append(x % p)
        x //= p
    return out


def _undigits(ds, p: int) -> int:
    x = 0
    for d in reversed(ds):
        x = x * p + d
    return x


class GF:
    """The field with ``q = p**e`` elements.

    Use :func:`field` to obtain instances; they are cached so that equal
    fields are the identical object.
    """

    def __init__(self, p: int, e: int = 1):
        if (p, e) not in CONWAY:
            raise FieldError(f"unsupported field GF({p}^{e})")
        q = p**e
        if q > MAX_ORDER:
            raise FieldError(f"GF({p}^{e}) exceeds the table limit of {MAX_ORDER} elements")
        self.p = p
        self.e = e
        self.q = q
        self.modulus = CONWAY[(p, e)]
        self.add_table, self.mul_table = self._build_tables()
        self.neg_table = np.array([self._neg(x) for x in range(q)], dtype=np.int64)
        inv = np.zeros(q, dtype=np.int64)
        for x in range(1, q):
            hits = np.nonzero(self.mul_table[x] == 1)[0]
            if len(hits) != 1:
                raise FieldError(f"modulus for GF({p}^{e}) is not irreducible")
            inv[x] = hits[0]
        self.inv_table = inv
        for t in (self.add_table, self.mul_table, self.neg_table, self.inv_table):
            t.setflags(write=False)

    def _neg(self, x: int) -> int:
        return _undigits([(-d) % self.p for d in _digits(x, self.p, self.e)], self.p)

    def _build_tables(self):
        p, e, q = self.p, self.e, self.q
        if e == 1:
            r = np.arange(q, dtype=np.int64)
            return (r[:, None] + r[None, :]) % p, (r[:, None] * r[None, :]) % p
        digits = [_digits(x, p, e) for x in range(q)]
        add = np.zeros((q, q), dtype=np.int64)
        mul = np.zeros((q, q), dtype=np.int64)
        mod = self.modulus
        for a in range(q):
            da = digits[a]
            for b in range(q):
                db = digits[b]
                add[a, b] = _undigits([(x + y) % p for x, y in zip(da, db)], p)
                prod = [0] * (2 * e - 1)
                for i, x in enumerate(da):
                    if x:
                        for j, y in enumerate(db):
                            prod[i + j] = (prod[i + j] + x * y) % p
                for k in range(len(prod) - 1, e - 1, -1):
                    c = prod[k]
                    if c:
                        for i in range(e + 1):
                            prod[k - e + i] = (prod[k - e + i] - c * mod[i]) % p
                mul[a, b] = _undigits(prod[:e], p)
        return add, mul

    # scalar arithmetic
    def add(self, a: int, b: int) -> int:
        return int(self.add_table[a, b])

    def sub(self, a: int, b: int) -> int:
        return int(self.add_table[a, self.neg_table[b]])

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[a, b])

    def neg(self, a: int) -> int:
        return int(self.neg_table[a])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return int(self.inv_table[a])

    def from_int(self, n: int) -> int:
        """Image of the integer ``n`` under Z -> GF(q)."""
        return n % self.p

    def elements(self) -> range:
        return range(self.q)

    @property
    def is_prime(self) -> bool:
        return self.e == 1

    def __repr__(self) -> str:
        return f"GF({self.p})" if self.e == 1 else f"GF({self.p}^{self.e})"

    def __reduce__(self):
        return (field, (self.p, self.e))


@lru_cache(maxsize=None)
def field(p: int = 2, e: int = 1) -> GF:
    return GF(p, e)


def field_of_order(q: int) -> GF:
    for (p, e) in CONWAY:
        if p**e == q:
            return field(p, e)
    raise FieldError(f"no supported field of order {q}")
