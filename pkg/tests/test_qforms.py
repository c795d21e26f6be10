from fractions import Fraction

import pytest

from app.algebra.brauer import corestriction, symbol
from app.algebra.etale import RATIONALS, quadratic_algebra
from app.algebra.localfields import INFINITY
from app.errors import InvalidInput, PreconditionFailed
from app.solvers.qforms import (
    DiagonalForm, FieldForm, albert_find_y, diagonalize, hasse_invariant, is_hyperbolic,
    is_locally_isotropic, isotropic_vector, isotropic_vector_gram, local_obstruction, represents,
    transfer,
)


def test_diagonalize_hyperbolic_plane():
    form = diagonalize([[0, 1], [1, 0]])
    assert form.dim == 2
    assert is_hyperbolic(form)


def test_diagonalize_tracks_basis():
    gram = [[2, 1], [1, 3]]
    form = diagonalize(gram)
    for vector, q in zip(form.basis, form.entries):
        value = sum(gram[i][j] * vector[i] * vector[j] for i in range(2) for j in range(2))
        assert value == q


def test_hasse_invariant():
    assert hasse_invariant([1, 1, 1], 2) == 1
    assert hasse_invariant([-1, -1], 2) == -1
    assert hasse_invariant([-1, -1], INFINITY) == -1


def test_local_isotropy():
    assert not is_locally_isotropic([1, 1, 1], INFINITY)
    assert is_locally_isotropic([1, 1, -2], 2)
    assert not is_locally_isotropic([1, 1, 1, 1], INFINITY)
    assert local_obstruction([1, 1, 1]) == "inf"
    assert local_obstruction([1, -3, -5]) == "p=3"


def test_represents():
    sums_of_two_squares = DiagonalForm((1, 1))
    assert represents(sums_of_two_squares, 5)
    assert not represents(sums_of_two_squares, 3)
    assert not represents(DiagonalForm((1, 1, 1)), -1)


@pytest.mark.parametrize("entries", [
    (1, 1, -2),
    (1, -4),
    (1, 2, -3, 5),
    (3, 5, -7, -11),
    (1, 1, 1, -3),
    (1, 2, 3, -5, -7),
])
def test_isotropic_vector(entries):
    form = DiagonalForm(entries)
    vector = isotropic_vector(form)
    assert vector is not None
    assert any(vector)
    assert form.evaluate(vector) == 0


def test_anisotropic_form_has_no_vector():
    assert isotropic_vector(DiagonalForm((1, 1, 1))) is None
    assert isotropic_vector(DiagonalForm((1, 1, 1, 1))) is None


def test_isotropic_vector_gram():
    vector = isotropic_vector_gram([[0, 1], [1, 0]])
    assert vector is not None
    assert 2 * vector[0] * vector[1] == 0 and any(vector)


def test_transfer_of_unit_form_is_hyperbolic(q_sqrt2):
    form = transfer(FieldForm(q_sqrt2, (q_sqrt2.one(),)))
    assert form.dim == 2
    assert is_hyperbolic(form)


def test_transfer_values_match_trace(q_sqrt2):
    entry = q_sqrt2.element([1, 3])
    form = transfer(FieldForm(q_sqrt2, (entry,)))
    for vector, q in zip(form.basis, form.entries):
        x = q_sqrt2.element(vector)
        assert (entry * x * x).coords[1] == q


def test_transfer_needs_quadratic_field(q_sqrt2_sqrt3):
    with pytest.raises(InvalidInput):
        transfer(FieldForm(q_sqrt2_sqrt3, ()))


def test_albert_square_pi(q_sqrt2):
    result = albert_find_y(2, q_sqrt2.element([3, 2]), q_sqrt2.element([1, 1]))
    assert result.y == 1


@pytest.mark.parametrize("pi, mu", [
    ([2, 1], [1, 0]),
    ([1, 1], [5, 0]),
    ([3, 1], [2, 0]),
    ([2, 1], [2, 1]),
])
def test_albert_finds_y(q_sqrt2, pi, mu):
    pi, mu = q_sqrt2.element(pi), q_sqrt2.element(mu)
    result = albert_find_y(2, pi, mu)
    assert symbol(q_sqrt2, pi, mu * result.y).is_zero()
    if result.X is not None:
        value = result.X * result.X - pi * result.Y * result.Y
        assert value == mu * result.y


def test_albert_precondition(q_sqrt2):
    # cor(1+√2, 3) = (-1, 3) ≠ 0
    with pytest.raises(PreconditionFailed):
        albert_find_y(2, q_sqrt2.element([1, 1]), q_sqrt2.scalar(3))


ALBERT_FIELDS = [2, 3, 5, -1, -2, 7, 13]


def _random_unit(rng, algebra):
    while True:
        x = algebra.element([rng.randint(-6, 6), rng.randint(-3, 3)])
        if x.is_unit():
            return x


def _albert_triples(rng, count):
    """코리스트릭션이 0 인 (a, π, μ) 와 0 이 아닌 것을 나누어 모은다"""
    vanishing, refused = [], []
    while len(vanishing) < count:
        a = rng.choice(ALBERT_FIELDS)
        algebra = quadratic_algebra(a)
        pi, mu = _random_unit(rng, algebra), _random_unit(rng, algebra)
        if corestriction(symbol(algebra, pi, mu), RATIONALS).is_zero():
            vanishing.append((a, pi, mu))
        elif len(refused) < count:
            refused.append((a, pi, mu))
    return vanishing, refused


def _check_albert(rng, count):
    vanishing, refused = _albert_triples(rng, count)
    for a, pi, mu in vanishing:
        result = albert_find_y(a, pi, mu)
        assert symbol(pi.algebra, pi, mu * result.y).is_zero(), (a, pi, mu)
        if result.X is not None:
            assert result.X * result.X - pi * result.Y * result.Y == mu * result.y
    for a, pi, mu in refused:
        with pytest.raises(PreconditionFailed):
            albert_find_y(a, pi, mu)


def test_albert_on_generated_triples(rng):
    _check_albert(rng, 20)


@pytest.mark.slow
def test_albert_on_many_generated_triples(rng):
    _check_albert(rng, 200)
