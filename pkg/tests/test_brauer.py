from fractions import Fraction

import pytest

from app.algebra.brauer import (
    BrauerClass2, chain_decompose, comes_from_ac_check, corestriction, express_as_symbol,
    ground_preimage, in_image_of_ground, rational_place, rational_symbol, restriction,
    solve_symbol_system, symbol,
)
from app.algebra.etale import RATIONALS, EtaleAlgebra, quadratic_algebra
from app.algebra.localfields import INFINITY
from app.errors import NotAUnit, NotSplitByFa, PreconditionFailed
from app.utils.arith import SquareClass


def test_rational_quaternions():
    assert rational_symbol(-1, -1).labels() == ["p=2", "inf"]
    assert rational_symbol(2, 7).is_zero()
    assert rational_symbol(3, 5).labels() == ["p=3", "p=5"]


def test_symbol_is_bilinear():
    assert rational_symbol(-1, 3) + rational_symbol(-1, 5) == rational_symbol(-1, 15)
    assert (rational_symbol(6, 7) + rational_symbol(6, 7)).is_zero()


def test_symbol_of_nonunit_raises(q_sqrt2):
    with pytest.raises(NotAUnit):
        symbol(q_sqrt2, q_sqrt2.zero(), 3)


def test_symbol_over_quadratic_field_is_reciprocal(q_sqrt2):
    B = symbol(q_sqrt2, q_sqrt2.element([1, 1]), q_sqrt2.scalar(-1))
    assert B.is_reciprocal()
    assert "inf@0[-]" in B.labels()


def test_restriction_splits_hamilton_quaternions():
    A = rational_symbol(-1, -1)
    assert restriction(A, quadratic_algebra(-1)).is_zero()
    assert restriction(A, quadratic_algebra(-3)).is_zero()
    assert not restriction(A, quadratic_algebra(2)).is_zero()


def test_corestriction_of_restriction_vanishes(q_sqrt2):
    A = rational_symbol(3, 5)
    assert corestriction(restriction(A, q_sqrt2), RATIONALS).is_zero()


def test_corestriction_of_split_algebra():
    # Q(√2, √8) 은 Q(√2) 두 개: 코리스트릭션은 성분 합
    split = EtaleAlgebra((2, 8))
    B = symbol(split, 3, 5)
    assert corestriction(B, quadratic_algebra(2)).is_zero()


def test_image_of_ground(q_sqrt2_sqrt3):
    A = rational_symbol(-1, -1)
    B = restriction(A, q_sqrt2_sqrt3)
    assert in_image_of_ground(B)
    preimage = ground_preimage(B)
    assert preimage is not None
    assert restriction(preimage, q_sqrt2_sqrt3) == B


def test_zero_class_in_image(q_sqrt2_sqrt3):
    assert in_image_of_ground(BrauerClass2.zero(q_sqrt2_sqrt3))


def test_solve_symbol_system_single_unknown():
    target = rational_symbol(-1, -1)

    def rows_at(p):
        return [([Fraction(-1)], target.invariant(rational_place(p)))]

    (y,) = solve_symbol_system(1, rows_at, {2})
    assert rational_symbol(-1, y) == target


def test_express_as_symbol():
    A = rational_symbol(-1, 3)
    u = express_as_symbol(A, -1)
    assert rational_symbol(-1, int(u)) == A
    assert express_as_symbol(BrauerClass2.zero(RATIONALS), 5) == SquareClass(1)


def test_express_as_symbol_requires_splitting():
    with pytest.raises(NotSplitByFa):
        express_as_symbol(rational_symbol(-1, -1), 2)


def test_chain_decompose():
    decomposition = chain_decompose(-1, 3, 3, -1)
    assert decomposition.verify(3, -1)
    assert decomposition.xi_ab.norm() == decomposition.n_ab


def test_chain_decompose_same_field():
    decomposition = chain_decompose(2, 7, 8, 7)
    assert decomposition.verify(7, 7)


def test_chain_decompose_precondition():
    with pytest.raises(PreconditionFailed):
        chain_decompose(-1, -1, 2, 3)


def test_comes_from_ac_check():
    # ρ ∈ Q(√2), μ ∈ Q(√3) 같은 노름 -2
    rho = quadratic_algebra(2).element([0, 1])
    mu = quadratic_algebra(3).element([1, 1])
    assert comes_from_ac_check(2, rho, 3, mu)


def test_comes_from_ac_check_precondition():
    rho = quadratic_algebra(2).element([1, 1])
    mu = quadratic_algebra(3).element([2, 1])
    with pytest.raises(PreconditionFailed):
        comes_from_ac_check(2, rho, 3, mu)


def test_labels_are_sorted_with_infinity_last():
    assert rational_symbol(-1, -7).labels() == ["p=7", "inf"]
    assert rational_place(INFINITY).label() == "inf"


SQUAREFREE = [-7, -6, -5, -3, -2, -1, 2, 3, 5, 6, 7, 10, 11, 13, 15]


def _random_unit(rng, algebra, height=4):
    while True:
        x = algebra.element([rng.randint(-height, height) for _ in range(algebra.dim)])
        if x.is_unit():
            return x


def _random_norm(rng, a):
    return _random_unit(rng, quadratic_algebra(a)).norm()


@pytest.mark.parametrize("generators", [(2,), (-1,), (5,), (2, 3), (-1, 5)])
def test_projection_formula(generators, rng):
    algebra = EtaleAlgebra(generators)
    for _ in range(4):
        pi = _random_unit(rng, algebra)
        r = rng.choice(SQUAREFREE)
        assert corestriction(symbol(algebra, pi, r), RATIONALS) == rational_symbol(pi.norm(), r)


def test_corestriction_is_transitive(q_sqrt2_sqrt3, rng):
    middle = quadratic_algebra(2)
    for _ in range(4):
        B = symbol(q_sqrt2_sqrt3, _random_unit(rng, q_sqrt2_sqrt3), _random_unit(rng, q_sqrt2_sqrt3))
        assert corestriction(corestriction(B, middle), RATIONALS) == corestriction(B, RATIONALS)


def _chain_instance(rng):
    """(a, u) = (b, v) 가 되도록 u = N_a·N_ab, v = N_b·N_ab 로 만든다"""
    a, b = rng.choice(SQUAREFREE), rng.choice(SQUAREFREE)
    n_ab = _random_norm(rng, a * b)
    return a, _random_norm(rng, a) * n_ab, b, _random_norm(rng, b) * n_ab


def _check_random_instances(rng, count):
    for _ in range(count):
        a, u, b, v = _chain_instance(rng)
        decomposition = chain_decompose(a, u, b, v)
        assert decomposition.verify(u, v), (a, u, b, v)
        A = rational_symbol(a, u)
        w = express_as_symbol(A, b)
        assert rational_symbol(b, int(w)) == A


def test_random_chain_instances(rng):
    _check_random_instances(rng, 25)


@pytest.mark.slow
def test_random_chain_instances_at_scale(rng):
    _check_random_instances(rng, 500)
