from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from services.errors import DivisionByZero, NotAUnit
from services.ext_field import INFINITY, FieldSpec, embed, inv, reduce_integral, reduce_unit, val

K6 = FieldSpec(3, 6)

coefficients = st.fractions(min_value=-81, max_value=81, max_denominator=27)
elements = st.lists(coefficients, min_size=6, max_size=6).map(K6.element)


def test_pi_has_valuation_one_over_e():
    assert val(K6.pi()) == Fraction(1, 6)
    assert val(K6.pi_power(6)) == 1
    assert K6.pi_power(6) == K6.const(3)
    assert val(K6.pi_power(-2)) == Fraction(-1, 3)


def test_valuation_of_rationals():
    assert val(K6.const(3)) == 1
    assert val(K6.const(Fraction(1, 9))) == -2
    assert val(K6.const(5)) == 0
    assert val(K6.zero()) == INFINITY


def test_valuation_takes_minimum_term():
    x = K6.element([9, 0, 1])  # 9 + pi^2
    assert val(x) == Fraction(1, 3)


def test_inverse():
    x = K6.element([1, 1])  # 1 + pi
    assert x * inv(x) == K6.one()
    y = K6.pi_power(5) + K6.const(3)
    assert y * inv(y) == K6.one()
    assert val(inv(y)) == -val(y)


def test_division_by_zero():
    with pytest.raises(DivisionByZero):
        inv(K6.zero())
    with pytest.raises(DivisionByZero):
        K6.one() / K6.zero()


def test_reduce_unit():
    assert reduce_unit(K6.const(-1)) == 2
    assert reduce_unit(K6.const(Fraction(1, 2))) == 2
    assert reduce_unit(K6.element([4, 7])) == 1
    with pytest.raises(NotAUnit):
        reduce_unit(K6.pi())
    assert reduce_integral(K6.pi()) == 0


def test_parse_text_form():
    a = K6.parse(["3", "0", "0", "0", "0", "0"])
    assert a == K6.const(3)
    assert K6.parse(["1/2", "-2/3"]) == K6.element([Fraction(1, 2), Fraction(-2, 3)])
    assert a.to_text() == ["3", "0", "0", "0", "0", "0"]


def test_too_many_coefficients():
    with pytest.raises(ValueError):
        FieldSpec(3, 2).element([1, 2, 3])


def test_field_needs_prime():
    with pytest.raises(ValueError):
        FieldSpec(6, 1)


def test_embed_preserves_valuation_and_products():
    x = K6.element([1, 2, 0, 1])
    y = K6.pi()
    big = embed(x, 12)
    assert big.field == FieldSpec(3, 12)
    assert val(big) == val(x)
    assert embed(x * y, 12) == big * embed(y, 12)
    assert val(embed(K6.pi(), 12)) == Fraction(1, 6)
    with pytest.raises(ValueError):
        embed(x, 9)


def test_refine_takes_lcm():
    assert K6.refine(4) == FieldSpec(3, 12)
    assert K6.in_value_group(Fraction(1, 3))
    assert not K6.in_value_group(Fraction(1, 4))


@settings(max_examples=1000, deadline=None)
@given(elements, elements)
def test_valuation_is_multiplicative_and_ultrametric(x, y):
    assert val(x * y) == val(x) + val(y)
    assert val(x + y) >= min(val(x), val(y))
    if val(x) != val(y):
        assert val(x + y) == min(val(x), val(y))


@settings(max_examples=200, deadline=None)
@given(elements)
def test_inverse_property(x):
    if not x:
        return
    assert x * inv(x) == K6.one()
