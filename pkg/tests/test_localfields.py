from fractions import Fraction

import pytest
from sympy import primefactors

from app.algebra.brauer import symbol
from app.algebra.etale import EtaleAlgebra, prefix_embedding, quadratic_algebra
from app.algebra.localfields import (
    INFINITY, hilbert_symbol_by_norms, hilbert_symbol_qp, local_norm, local_square_class,
    local_symbol, places_above, restrict_place, symbol_with_rational,
)


@pytest.mark.parametrize("q, p, expected", [
    (5, 2, 5),
    (-3, INFINITY, -1),
    (Fraction(1, 9), 3, 1),
    (12, 2, -5),
    (7, 7, 7),
    (2, 5, 2),
])
def test_local_square_class(q, p, expected):
    assert local_square_class(q, p) == expected


@pytest.mark.parametrize("a, b, p, expected", [
    (-1, -1, 2, -1),
    (-1, -1, INFINITY, -1),
    (-1, -1, 3, 1),
    (3, 5, 3, -1),
    (2, 7, 7, 1),
    (5, 5, 5, 1),
    (2, 3, 3, -1),
])
def test_hilbert_symbol(a, b, p, expected):
    assert hilbert_symbol_qp(a, b, p) == expected


@pytest.mark.parametrize("a", [-5, -3, -2, -1, 2, 3, 5, 6, 7, 10, 15])
@pytest.mark.parametrize("b", [-3, -1, 2, 3, 5, 14])
@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_norm_search_agrees_with_closed_form(a, b, p, small_config):
    assert hilbert_symbol_by_norms(a, b, p) == hilbert_symbol_qp(a, b, p)


def test_places_of_q_sqrt2(q_sqrt2):
    assert [P.degree for P in places_above(q_sqrt2, 7)] == [1, 1]
    assert [P.degree for P in places_above(q_sqrt2, 5)] == [2]
    assert [P.degree for P in places_above(q_sqrt2, INFINITY)] == [1, 1]
    assert [P.degree for P in places_above(quadratic_algebra(-1), INFINITY)] == [2]


def test_place_labels(q_sqrt2):
    labels = [P.label() for P in places_above(q_sqrt2, 7)]
    assert labels == ["p=7@0[+]", "p=7@0[-]"]
    assert places_above(EtaleAlgebra(()), 3)[0].label() == "p=3"


def test_places_of_split_algebra():
    split = EtaleAlgebra((2, 8))
    places = places_above(split, 5)
    assert {P.component for P in places} == {0, 1}
    assert all(P.degree == 2 for P in places)


def test_local_symbol_at_split_place(q_sqrt2):
    # p = 7 에서 Q(√2) 의 자리는 모두 Q_7 과 같다
    for place in places_above(q_sqrt2, 7):
        assert local_symbol(place, q_sqrt2.scalar(3), q_sqrt2.scalar(7)) == hilbert_symbol_qp(3, 7, 7)


def test_local_symbol_at_inert_place(q_sqrt2):
    # 차수 2 자리에서 유리수 기호는 항상 자명
    (place,) = places_above(q_sqrt2, 5)
    assert local_symbol(place, q_sqrt2.scalar(2), q_sqrt2.scalar(5)) == 1


def test_real_places_see_conjugate_signs(q_sqrt2):
    x = q_sqrt2.element([1, 1])
    signs = {P.signs: local_symbol(P, x, q_sqrt2.scalar(-1)) for P in places_above(q_sqrt2, INFINITY)}
    # 1 + √2 > 0, 1 - √2 < 0
    assert signs == {(1,): 1, (-1,): -1}


def test_local_norm_matches_global_norm(q_sqrt2):
    x = q_sqrt2.element([3, 1])
    (place,) = places_above(q_sqrt2, 5)
    assert local_square_class(local_norm(place, x), 5) == local_square_class(x.norm(), 5)


def test_symbol_with_rational(q_sqrt2):
    x = q_sqrt2.element([1, 1])
    for place in places_above(q_sqrt2, 7):
        assert symbol_with_rational(place, x, 3) == local_symbol(place, x, q_sqrt2.scalar(3))


def test_restrict_place_to_subfield(q_sqrt2_sqrt3):
    mapping = prefix_embedding(q_sqrt2_sqrt3, 1)
    for place in places_above(q_sqrt2_sqrt3, 23):
        below = restrict_place(place, mapping)
        assert below.algebra == mapping.source
        assert below.prime == 23


def test_reciprocity_over_quadratic_field():
    field = quadratic_algebra(5)
    B = symbol(field, field.element([2, 1]), field.element([3, 1]))
    assert B.is_reciprocal()


def _random_rational(rng):
    numerator = rng.choice([-1, 1]) * rng.randint(1, 400)
    return Fraction(numerator, rng.randint(1, 30))


def test_hilbert_reciprocity_on_random_pairs(rng):
    for _ in range(200):
        a, b = _random_rational(rng), _random_rational(rng)
        primes = set(primefactors(a.numerator * a.denominator * b.numerator * b.denominator)) | {2}
        product = hilbert_symbol_qp(a, b, INFINITY)
        for p in primes:
            product *= hilbert_symbol_qp(a, b, p)
        assert product == 1, (a, b)


def _random_unit(rng, algebra):
    while True:
        x = algebra.element([rng.randint(-3, 3) for _ in range(algebra.dim)])
        if x.is_unit():
            return x


@pytest.mark.parametrize("a, d", [(2, 5), (-1, 3), (5, 13), (-3, 7)])
def test_random_symbols_over_biquadratic_are_reciprocal(a, d, rng):
    algebra = EtaleAlgebra((a, d))
    for _ in range(6):
        pi = _random_unit(rng, algebra)
        rho = _random_unit(rng, algebra)
        assert symbol(algebra, pi, rho).is_reciprocal(), (pi, rho)
