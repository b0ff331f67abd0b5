import pytest
from hypothesis import given, strategies as st

from blockforge.fields import FieldError, field

FIELDS = [field(2), field(2, 2), field(2, 3), field(2, 4), field(3), field(3, 2), field(5)]


def elems(F):
    return st.integers(0, F.q - 1)


@pytest.mark.parametrize("F", FIELDS, ids=repr)
def test_tables_form_a_field(F):
    for a in range(F.q):
        assert F.add(a, 0) == a
        assert F.mul(a, 1) == a
        assert F.add(a, F.neg(a)) == 0
        if a:
            assert F.mul(a, F.inv(a)) == 1


@pytest.mark.parametrize("F", FIELDS, ids=repr)
def test_characteristic(F):
    for a in range(F.q):
        acc = 0
        for _ in range(F.p):
            acc = F.add(acc, a)
        assert acc == 0


@pytest.mark.parametrize("F", FIELDS, ids=repr)
@given(data=st.data())
def test_axioms(F, data):
    a, b, c = (data.draw(elems(F)) for _ in range(3))
    assert F.add(a, b) == F.add(b, a)
    assert F.mul(a, b) == F.mul(b, a)
    assert F.add(F.add(a, b), c) == F.add(a, F.add(b, c))
    assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
    assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))


def test_fields_are_cached():
    assert field(2, 2) is field(2, 2)


def test_gf4_has_a_cube_root_of_unity():
    F = field(2, 2)
    w = 2
    assert w != 1 and F.mul(w, F.mul(w, w)) == 1


def test_inverse_of_zero_fails():
    with pytest.raises((FieldError, ZeroDivisionError)):
        field(2).inv(0)


def test_unsupported_field():
    with pytest.raises(FieldError):
        field(4)
