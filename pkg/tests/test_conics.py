from fractions import Fraction

import pytest

from app.algebra.brauer import rational_symbol, symbol
from app.algebra.etale import EtaleAlgebra, is_square_with_witness
from app.errors import AlgebraMismatch, InvalidInput, NoSolution, SearchBoundExceeded
from app.solvers import conics
from app.solvers.conics import (
    ConicPoint, conic_obstruction, find_conic_point, norm_certificate, solve_conic, solve_norm_equation,
)
from app.utils.arith import is_rational_square


def test_small_solution_found_first():
    outcome = solve_conic(2, 7)
    assert outcome.found
    solution = outcome.solution
    assert (solution.x, solution.y, solution.z) == (1, 1, 3)


def test_local_obstruction_reported():
    outcome = solve_conic(3, 5)
    assert not outcome.found
    assert outcome.obstruction == "p=3"
    assert conic_obstruction(-1, -1) == "p=2"


@pytest.mark.parametrize("a, b", [
    (1, 5),
    (-1, 2),
    (Fraction(1, 3), -3),
    (5, 11),
    (-7, 2),
    (13, 17),
    (Fraction(2, 9), Fraction(-7, 4)),
])
def test_solution_satisfies_conic(a, b):
    outcome = solve_conic(a, b)
    assert outcome.found
    assert outcome.solution.verify()


def test_zero_coefficient_rejected():
    with pytest.raises(InvalidInput):
        solve_conic(0, 3)


@pytest.mark.parametrize("a, n", [(2, 7), (-1, 5), (3, -2), (4, 5), (5, 1), (-3, 7)])
def test_norm_certificate(a, n):
    xi = norm_certificate(a, n)
    assert xi.norm() == n


def test_norm_certificate_negative():
    with pytest.raises(NoSolution) as caught:
        norm_certificate(3, 5)
    assert caught.value.obstruction == "p=3"


def test_relative_norm_equation(q_sqrt2_sqrt3):
    base = q_sqrt2_sqrt3.prefix(1)
    t = base.scalar(-2)
    xi = solve_norm_equation(q_sqrt2_sqrt3, t)
    assert xi.norm_last() == t


def test_relative_norm_with_irrational_target(q_sqrt2_sqrt3):
    base = q_sqrt2_sqrt3.prefix(1)
    t = base.element([1, 1]) * base.element([1, 1]) - base.element([0, 1]) * base.element([0, 1]) * 3
    xi = solve_norm_equation(q_sqrt2_sqrt3, t)
    assert xi.norm_last() == t


def test_norm_equation_modulo_squares():
    algebra = EtaleAlgebra((5, 3))
    t = algebra.prefix(1).scalar(-2 * 9)
    xi = solve_norm_equation(algebra, t, mod_squares=True)
    norm = xi.norm_last()
    assert norm.is_rational()
    assert is_rational_square(t.coords[0] / norm.coords[0])


def test_norm_equation_needs_a_quadratic_step():
    with pytest.raises(AlgebraMismatch):
        solve_norm_equation(EtaleAlgebra(()), 2)


def test_norm_equation_modulo_squares_with_irrational_target(q_sqrt2_sqrt3):
    base = q_sqrt2_sqrt3.prefix(1)
    t = base.element([-3, 2]) * 9
    xi = solve_norm_equation(q_sqrt2_sqrt3, t, mod_squares=True)
    assert is_square_with_witness(t * xi.norm_last().inverse()).square


def test_norm_equation_modulo_squares_retries(q_sqrt2_sqrt3, monkeypatch):
    original = conics._solve_exact
    calls = []

    def flaky(algebra, base, target):
        calls.append(target)
        if len(calls) == 1:
            raise SearchBoundExceeded("한도")
        return original(algebra, base, target)

    monkeypatch.setattr(conics, "_solve_exact", flaky)
    t = q_sqrt2_sqrt3.prefix(1).scalar(-2)
    xi = solve_norm_equation(q_sqrt2_sqrt3, t, mod_squares=True)
    assert len(calls) == 2
    assert calls[1] != calls[0]
    assert is_square_with_witness(t * xi.norm_last().inverse()).square


def _check_conic_sweep(bound):
    for a in range(-bound, bound + 1):
        for b in range(-bound, bound + 1):
            if a == 0 or b == 0:
                continue
            outcome = solve_conic(a, b)
            assert outcome.found == rational_symbol(a, b).is_zero(), (a, b)
            if outcome.found:
                assert outcome.solution.verify()


def test_conic_sweep_small():
    _check_conic_sweep(12)


@pytest.mark.slow
def test_conic_sweep():
    _check_conic_sweep(50)


def test_conic_point_with_square_second_coefficient(q_sqrt2):
    pi = q_sqrt2.element([1, 1])
    point = find_conic_point(pi, q_sqrt2.scalar(4))
    assert point is not None
    assert point.verify()


def test_conic_point_with_square_first_coefficient(q_sqrt2):
    pi = q_sqrt2.element([3, 2])
    point = find_conic_point(pi, q_sqrt2.scalar(-1))
    assert point is not None
    assert point.verify()
    assert point.Z.is_zero()


def test_conic_point_needs_trivial_symbol(q_sqrt2):
    minus_one = q_sqrt2.scalar(-1)
    assert not symbol(q_sqrt2, minus_one, minus_one).is_zero()
    assert find_conic_point(minus_one, minus_one) is None


def test_conic_point_in_split_algebra():
    split = EtaleAlgebra((2, 8))
    point = find_conic_point(split.scalar(3), split.scalar(-2))
    assert point is not None
    assert point.verify()


def test_conic_point_verify_rejects_wrong_point(q_sqrt2):
    one = q_sqrt2.one()
    assert not ConicPoint(one * 2, one, one, one, one).verify()
