from fractions import Fraction

import pytest

from app.algebra.etale import (
    EtaleAlgebra, MonomialMap, field_sqrt, from_components, identity_map, is_square_with_witness,
    norm, prefix_embedding, quadratic_algebra, subalgebra_embedding, to_components,
)
from app.errors import AlgebraMismatch, GeneratorLimitExceeded, InvalidInput, NotAUnit


def test_quadratic_arithmetic(q_sqrt2):
    x = q_sqrt2.element([2, 1])
    assert x.norm() == 2
    assert x.trace() == 4
    one_plus = q_sqrt2.element([1, 1])
    assert one_plus.inverse() == q_sqrt2.element([-1, 1])
    assert one_plus * one_plus == q_sqrt2.element([3, 2])
    assert (one_plus ** -1) * one_plus == q_sqrt2.one()


def test_biquadratic_products(q_sqrt2_sqrt3):
    r2, r3 = q_sqrt2_sqrt3.root(0), q_sqrt2_sqrt3.root(1)
    assert (r2 * r3) * (r2 * r3) == q_sqrt2_sqrt3.scalar(6)
    x = q_sqrt2_sqrt3.element([1, 1, 1, 1])
    assert x * x.inverse() == q_sqrt2_sqrt3.one()


def test_norm_down_the_tower(q_sqrt2_sqrt3):
    x = q_sqrt2_sqrt3.element(["1", "0", "1", "0"])
    assert norm(x, q_sqrt2_sqrt3.prefix(1)) == q_sqrt2_sqrt3.prefix(1).scalar(-2)
    assert x.norm() == 4


def test_zero_divisor_in_split_algebra():
    split = EtaleAlgebra((2, 8))
    assert not split.is_field()
    zero_divisor = split.element([0, 2, -1, 0])
    assert not zero_divisor.is_unit()
    with pytest.raises(NotAUnit):
        zero_divisor.inverse()


def test_components_of_split_algebra():
    split = EtaleAlgebra((2, 8))
    components = split.components()
    assert len(components) == 2
    assert components[0].field == quadratic_algebra(2)
    images = to_components(split.root(1))
    assert images[0] == quadratic_algebra(2).element([0, 2])
    assert images[1] == quadratic_algebra(2).element([0, -2])
    x = split.element([1, 2, 3, 4])
    assert from_components(split, to_components(x)) == x


def test_field_check(q_sqrt2_sqrt3):
    assert q_sqrt2_sqrt3.is_field()
    assert not quadratic_algebra(4).is_field()


def test_field_sqrt(q_sqrt2):
    root = field_sqrt(q_sqrt2.element([3, 2]))
    assert root is not None and root * root == q_sqrt2.element([3, 2])
    assert field_sqrt(q_sqrt2.element([1, 1])) is None
    assert field_sqrt(q_sqrt2.scalar(2)) == q_sqrt2.root(0)


def test_square_with_witness_in_split_algebra():
    split = EtaleAlgebra((2, 8))
    result = is_square_with_witness(split.scalar(2))
    assert result.square and result.witness * result.witness == split.scalar(2)
    assert result.square_components() == [0, 1]
    assert not is_square_with_witness(split.scalar(3)).square


def test_square_with_witness_per_component():
    split = EtaleAlgebra((2, 8))
    first, second = (component.field for component in split.components())
    square = (first.one() + first.root(0)) ** 2
    value = from_components(split, [square, second.one() + second.root(0)])
    result = is_square_with_witness(value)
    assert not result.square
    assert result.witness is None
    assert result.square_components() == [0]
    assert result.components[0] * result.components[0] == square


def test_subalgebra_embedding(q_sqrt2_sqrt3):
    mapping = subalgebra_embedding(q_sqrt2_sqrt3, [0b11])
    assert mapping.source.generators == (Fraction(6),)
    image = mapping.apply(mapping.source.root(0))
    assert image * image == q_sqrt2_sqrt3.scalar(6)


def test_monomial_maps(q_sqrt2_sqrt3):
    inclusion = prefix_embedding(q_sqrt2_sqrt3, 1)
    assert inclusion.apply(quadratic_algebra(2).root(0)) == q_sqrt2_sqrt3.root(0)
    swap = MonomialMap(q_sqrt2_sqrt3, EtaleAlgebra((3, 2)), ((0b10, 1), (0b01, 1)))
    assert swap.inverse().compose(swap) == identity_map(q_sqrt2_sqrt3)
    with pytest.raises(AlgebraMismatch):
        MonomialMap(quadratic_algebra(2), quadratic_algebra(3), ((1, 1),))


def test_rescaled_generator():
    mapping = MonomialMap(quadratic_algebra(8), quadratic_algebra(2), ((1, 2),))
    x = quadratic_algebra(8).element([1, 1])
    assert mapping.apply(x) == quadratic_algebra(2).element([1, 2])
    assert mapping.apply(x).norm() == x.norm()


def test_input_validation(q_sqrt2):
    with pytest.raises(InvalidInput):
        q_sqrt2.element([1, 2, 3])
    with pytest.raises(InvalidInput):
        EtaleAlgebra((0,))
    with pytest.raises(GeneratorLimitExceeded):
        EtaleAlgebra((2, 3, 5, 7))
    with pytest.raises(AlgebraMismatch):
        q_sqrt2.one() + quadratic_algebra(3).one()


def test_coordinates_as_strings(q_sqrt2):
    x = q_sqrt2.element(["1/2", "-3"])
    assert x.to_strings() == ["1/2", "-3"]
    assert str(x) == "1/2 + -3·√2"
