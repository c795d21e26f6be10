"""
유리점 P 와 순서 있는 매개변수계 (x1 - P1, x2 - P2) 에서의 반복 특수화
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple
import logging

from app.algebra.brauer import BrauerClass2, symbol
from app.algebra.etale import EtaleElement, from_components
from app.errors import InvalidInput
from app.funcfield.polynomials import BivariatePoly, BivariateRat
from app.utils.arith import Rational, to_fraction

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParamSystem:
    """점 P 와 매개변수 순서 (order[0] 번째 변수의 매개변수가 먼저)"""
    point: Tuple[Fraction, Fraction]
    order: Tuple[int, int] = (0, 1)

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(to_fraction(p) for p in self.point))
        if sorted(self.order) != [0, 1]:
            raise InvalidInput(f"매개변수 순서 오류: {self.order}")

    @classmethod
    def at(cls, p1: Rational, p2: Rational) -> "ParamSystem":
        return cls((to_fraction(p1), to_fraction(p2)))

    def swapped(self) -> "ParamSystem":
        return ParamSystem(self.point, (self.order[1], self.order[0]))

    def parameters(self) -> Tuple[str, str]:
        return tuple(f"x{k + 1} - {self.point[k]}" for k in self.order)


def _lowest_term(poly: BivariatePoly, order: Tuple[int, int]) -> Tuple[Tuple[int, int], EtaleElement]:
    """첫 매개변수 지수, 다음 매개변수 지수 순 사전식 최저항"""
    def key(item):
        (i, j), _ = item
        exponents = (i, j)
        return exponents[order[0]], exponents[order[1]]
    (i, j), c = min(poly.terms, key=key)
    return ((i, j)[order[0]], (i, j)[order[1]]), c


def _specialize_in_field(f: BivariateRat, ps: ParamSystem) -> EtaleElement:
    numerator = f.numerator.shift(*ps.point)
    denominator = f.denominator.shift(*ps.point)
    (n1, n2), top = _lowest_term(numerator, ps.order)
    (d1, d2), bottom = _lowest_term(denominator, ps.order)
    value = top * bottom.inverse()
    # (-π)^{-v} 를 곱하고 π = 0 으로 제한하는 규칙을 두 번
    if (n1 - d1 + n2 - d2) % 2:
        value = -value
    return value


def specialize_class1(f: BivariateRat, ps: ParamSystem) -> EtaleElement:
    """s_{P,π}(f) 의 대표원 (계수 대수의 원소, 제곱류로 해석)"""
    if f.is_zero():
        raise InvalidInput("0 함수는 특수화할 수 없습니다")
    algebra = f.algebra
    values = []
    for component in algebra.components():
        image = f.map(component.embedding)
        if image.is_zero():
            raise InvalidInput(f"{component.index} 번째 성분에서 {f} 가 0입니다")
        values.append(_specialize_in_field(image, ps))
    result = from_components(algebra, values)
    logger.debug(f"s_P({f}) = {result}, P = {ps.point}, 순서 {ps.order}")
    return result


def specialize_class2(f: BivariateRat, g: BivariateRat, ps: ParamSystem) -> BrauerClass2:
    """s_{P,π}(f, g) = (s(f), s(g))"""
    return symbol(f.algebra, specialize_class1(f, ps), specialize_class1(g, ps))
