from fractions import Fraction
import warnings

import pytest
from sympy import nextprime

from app.config import SolverConfig, use_config
from app.errors import FactorizationBoundExceeded, InvalidInput
from app.utils.arith import (
    SquareClass, exponent_vector, factor, format_rational, is_rational_square, jacobi, kronecker_symbol,
    parse_rational, prime_support, rational_content, rational_sqrt, same_square_class, square_reduced,
    squarefree_class, valuation,
)

BIG_P = int(nextprime(10**30))
BIG_Q = int(nextprime(10**31))


def test_factor_semiprime():
    factored = factor(9991)
    assert factored.factors == ((97, 1), (103, 1))
    assert factored.value() == 9991


def test_factor_negative_keeps_sign():
    factored = factor(-72)
    assert factored.sign == -1
    assert factored.factors == ((2, 3), (3, 2))


def test_factor_bound():
    # 상한을 넘는 합성 여인수만 거부
    with pytest.raises(FactorizationBoundExceeded):
        factor(BIG_P * BIG_Q, bound=1000)
    with use_config(SolverConfig(factor_bound=100)):
        with pytest.raises(FactorizationBoundExceeded):
            factor(BIG_P * BIG_Q)


def test_factor_beyond_bound():
    assert factor(12 * BIG_P**2).factors == ((2, 2), (3, 1), (BIG_P, 2))
    assert factor(-(BIG_P**3) * 5).factors == ((5, 1), (BIG_P, 3))
    huge = int(nextprime(10**45))
    assert factor(huge).factors == ((huge, 1),)
    with use_config(SolverConfig(factor_bound=100)):
        assert factor(101 * 103).factors == ((101, 1), (103, 1))


def test_square_reduced():
    assert square_reduced(Fraction(50, 27)) == 6
    assert square_reduced(-12) == -3
    assert square_reduced(7 * BIG_P**2) == 7
    assert square_reduced(Fraction(3, BIG_P**4)) == 3
    # 분해할 수 없는 여인수는 남기되 제곱류는 그대로
    value = square_reduced(4 * BIG_P * BIG_Q)
    assert value == BIG_P * BIG_Q
    assert same_square_class(value, 4 * BIG_P * BIG_Q)


def test_same_square_class_without_factoring():
    assert same_square_class(BIG_P * BIG_Q * 9, Fraction(BIG_P * BIG_Q, 4))
    assert not same_square_class(BIG_P * BIG_Q, BIG_P)
    with pytest.raises(InvalidInput):
        same_square_class(0, 3)


def test_rational_content():
    assert rational_content([Fraction(1, 2), Fraction(3, 4), 0]) == Fraction(1, 4)
    assert rational_content([-6, 4]) == 2
    with pytest.raises(InvalidInput):
        rational_content([0, 0])


def test_factor_zero_is_invalid():
    with pytest.raises(InvalidInput):
        factor(0)


@pytest.mark.parametrize("q, expected", [
    (18, 2),
    (Fraction(-4, 9), -1),
    (Fraction(50, 27), 6),
    (1, 1),
    (-12, -3),
])
def test_squarefree_class(q, expected):
    assert squarefree_class(q) == SquareClass(expected)


def test_square_class_product():
    assert SquareClass(6) * SquareClass(10) == SquareClass(15)
    assert (SquareClass(-2) * SquareClass(-2)).is_trivial()


def test_same_square_class():
    assert same_square_class(8, 18)
    assert not same_square_class(2, 3)


def test_rational_sqrt():
    assert rational_sqrt(Fraction(9, 4)) == Fraction(3, 2)
    assert rational_sqrt(2) is None
    assert rational_sqrt(-4) is None
    assert is_rational_square(0)


def test_valuation_and_support():
    assert valuation(Fraction(12, 25), 2) == 2
    assert valuation(Fraction(12, 25), 5) == -2
    assert prime_support(Fraction(12, 25)) == [2, 3, 5]


@pytest.mark.parametrize("a, n, expected", [
    (2, 7, 1),
    (3, 7, -1),
    (-1, 5, 1),
    (5, 8, -1),
    (4, 6, 0),
])
def test_kronecker_symbol(a, n, expected):
    assert kronecker_symbol(a, n) == expected


def test_jacobi_does_not_warn():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        assert [jacobi(a, 7) for a in (1, 2, 3, -1)] == [1, 1, -1, -1]
        assert jacobi(10, 15) == 0
    assert not [w for w in caught if issubclass(w.category, DeprecationWarning)]


def test_rational_wire_format():
    assert parse_rational("-3/6") == Fraction(-1, 2)
    assert parse_rational(" 7 ") == Fraction(7)
    assert format_rational(Fraction(-1, 2)) == "-1/2"
    assert format_rational(Fraction(4, 2)) == "2"


def test_parse_rational_rejects_garbage():
    with pytest.raises(InvalidInput):
        parse_rational("1/0")
    with pytest.raises(InvalidInput):
        parse_rational("x")


def test_exponent_vector():
    assert exponent_vector(Fraction(-12, 5), [2, 3, 5]) == [1, 0, 1, 1]
    assert exponent_vector(7, [2, 3]) is None
