"""
소인자 D 를 따른 값매김과 2-꼬임 기호의 잉여

잉여체는 매개화로 구체적으로 표현한다.
  LINEAR:     l1·x1 + l2·x2 + l0 = 0 → L(t)
  NORM_FORM:  x1² - c·x2² = 0 (c 는 L 의 비제곱) → L(√c)(t), (x1, x2) = (√c·t, t)
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Tuple
import logging

from app.algebra.etale import EtaleAlgebra, EtaleElement, MonomialMap, field_sqrt, prefix_embedding
from app.errors import AlgebraMismatch, InvalidInput, ZeroDivisorOnRestriction
from app.funcfield.polynomials import BivariatePoly, BivariateRat, UnivariatePoly
from app.utils.arith import Rational, to_fraction

logger = logging.getLogger(__name__)


class DivisorKind(str, Enum):
    """소인자 종류"""
    LINEAR = "linear"
    NORM_FORM = "norm_form"


@dataclass(frozen=True)
class DivisorSpec:
    """체 L 위 아핀 평면의 기약 소인자"""
    kind: DivisorKind
    field: EtaleAlgebra
    coefficients: Tuple[EtaleElement, ...]
    label: str = "D"
    embedding: Optional[MonomialMap] = None
    base_map: Optional[MonomialMap] = None

    @classmethod
    def linear(cls, field: EtaleAlgebra, l0, l1, l2, label: str = "D",
               embedding: Optional[MonomialMap] = None) -> "DivisorSpec":
        coefficients = tuple(c if isinstance(c, EtaleElement) else field.scalar(c) for c in (l0, l1, l2))
        if coefficients[1].is_zero() and coefficients[2].is_zero():
            raise InvalidInput("일차 소인자의 x1, x2 계수가 모두 0입니다")
        return cls(DivisorKind.LINEAR, field, coefficients, label, embedding)

    @classmethod
    def norm_form(cls, field: EtaleAlgebra, c: Rational, label: str = "D",
                  embedding: Optional[MonomialMap] = None) -> "DivisorSpec":
        if field_sqrt(field.scalar(c)) is not None:
            raise InvalidInput(f"{c} 은(는) {field.label()} 의 제곱이라 x1² - c·x2² 가 기약이 아닙니다")
        return cls(DivisorKind.NORM_FORM, field, (field.scalar(c),), label, embedding)

    @property
    def c(self) -> Fraction:
        return self.coefficients[0].rational_value()

    def polynomial(self) -> BivariatePoly:
        if self.kind == DivisorKind.LINEAR:
            return BivariatePoly.linear(self.field, *self.coefficients)
        x1 = BivariatePoly.variable(self.field, 0)
        x2 = BivariatePoly.variable(self.field, 1)
        return x1 * x1 - x2 * x2 * self.coefficients[0]

    def residue_field(self) -> EtaleAlgebra:
        if self.kind == DivisorKind.LINEAR:
            return self.field
        return self.field.adjoin(self.c)

    def coefficient_lift(self) -> Optional[MonomialMap]:
        if self.kind == DivisorKind.LINEAR:
            return None
        return prefix_embedding(self.residue_field(), self.field.n)

    def parametrization(self) -> Tuple[UnivariatePoly, UnivariatePoly]:
        """잉여체 위의 (X1(t), X2(t))"""
        L = self.residue_field()
        if self.kind == DivisorKind.NORM_FORM:
            return UnivariatePoly.affine(L, 0, L.root(L.n - 1)), UnivariatePoly.affine(L, 0, 1)
        l0, l1, l2 = self.coefficients
        if not l1.is_zero():
            inverse = l1.inverse()
            return UnivariatePoly.affine(L, -(l0 * inverse), -(l2 * inverse)), UnivariatePoly.affine(L, 0, 1)
        return UnivariatePoly.affine(L, 0, 1), UnivariatePoly.constant(L, -(l0 * l2.inverse()))

    def prepare(self, f: BivariateRat) -> BivariateRat:
        """함수를 L 계수로 옮김"""
        if f.algebra == self.field:
            return f
        if self.embedding is None or self.embedding.source != f.algebra:
            raise AlgebraMismatch(f"{f.algebra.label()} 함수를 {self.field.label()} 위의 {self.label} 에서 사용")
        return f.map(self.embedding)

    def restrict_poly(self, poly: BivariatePoly) -> UnivariatePoly:
        x1, x2 = self.parametrization()
        return poly.restrict(x1, x2, self.coefficient_lift())


@dataclass(frozen=True)
class ResidueClass:
    """잉여체 L'(t) 의 제곱류, 다항식 대표로 저장"""
    field: EtaleAlgebra
    representative: UnivariatePoly

    def __mul__(self, other: "ResidueClass") -> "ResidueClass":
        if other.field != self.field:
            raise AlgebraMismatch("잉여체가 다른 류의 곱")
        return ResidueClass(self.field, self.representative * other.representative)

    def is_trivial(self) -> bool:
        return self.representative.is_square()

    def equals(self, other: "ResidueClass") -> bool:
        return (self * other).is_trivial()

    def __str__(self) -> str:
        return f"[{self.representative}] ∈ {self.field.label()}(t)"


def _strip(poly: BivariatePoly, divisor: BivariatePoly) -> Tuple[int, BivariatePoly]:
    """poly = divisor^k · rest, divisor ∤ rest"""
    if poly.is_zero():
        raise InvalidInput("0 다항식의 값매김")
    count = 0
    while True:
        quotient, remainder = poly.divmod(divisor)
        if not remainder.is_zero():
            return count, poly
        poly = quotient
        count += 1


def _decompose(f: BivariateRat, D: DivisorSpec) -> Tuple[int, BivariatePoly, BivariatePoly]:
    f = D.prepare(f)
    divisor = D.polynomial()
    top, numerator = _strip(f.numerator, divisor)
    bottom, denominator = _strip(f.denominator, divisor)
    return top - bottom, numerator, denominator


def valuation_along(f: BivariateRat, D: DivisorSpec) -> int:
    """v_D(f)"""
    if f.is_zero():
        raise InvalidInput("0 함수의 값매김")
    return _decompose(f, D)[0]


def _restricted_unit(poly: BivariatePoly, D: DivisorSpec) -> UnivariatePoly:
    restricted = D.restrict_poly(poly)
    if restricted.is_zero():
        raise ZeroDivisorOnRestriction(f"{poly} 의 {D.label} 제한이 0입니다")
    return restricted


def restriction_class(f: BivariateRat, D: DivisorSpec) -> ResidueClass:
    """v_D(f) = 0 인 f 의 D 위 제곱류"""
    v, numerator, denominator = _decompose(f, D)
    if v != 0:
        raise InvalidInput(f"{D.label} 에서 값매김이 {v} 인 함수는 제한할 수 없습니다")
    representative = _restricted_unit(numerator, D) * _restricted_unit(denominator, D)
    return ResidueClass(D.residue_field(), representative)


def residue_symbol(f: BivariateRat, g: BivariateRat, D: DivisorSpec) -> ResidueClass:
    """(f, g) 의 D 에서의 잉여: (-1)^{mn} f^n / g^m 의 제한"""
    if f.is_zero() or g.is_zero():
        raise InvalidInput("기호의 인자는 0이 될 수 없습니다")
    m, f_num, f_den = _decompose(f, D)
    n, g_num, g_den = _decompose(g, D)
    field = D.residue_field()
    representative = UnivariatePoly.constant(field, -1 if (m * n) % 2 else 1)
    if n % 2:
        representative = representative * _restricted_unit(f_num, D) * _restricted_unit(f_den, D)
    if m % 2:
        representative = representative * _restricted_unit(g_num, D) * _restricted_unit(g_den, D)
    logger.debug(f"{D.label}: v(f) = {m}, v(g) = {n}")
    return ResidueClass(field, representative)


def _drop_generator(x: EtaleElement, index: int, target: EtaleAlgebra) -> EtaleElement:
    coords = []
    for mask, value in enumerate(x.coords):
        if mask >> index & 1:
            if value:
                raise AlgebraMismatch(f"{x} 은(는) 부분체에 속하지 않습니다")
            continue
        coords.append(value)
    return EtaleElement(target, tuple(coords))


def norm_residue(residue: ResidueClass, base: EtaleAlgebra, mapping: Optional[MonomialMap] = None) -> ResidueClass:
    """잉여체 확대 L'(t) / L0'(t) 의 노름으로 잉여를 내린다

    mapping 이 주어지면 L' ≅ L0' 동형으로 옮기기만 한다 (분해된 성분).
    """
    field = residue.field
    if mapping is not None:
        return ResidueClass(base, residue.representative.map(mapping))
    if field == base:
        return residue
    for index in range(field.n):
        remaining = field.generators[:index] + field.generators[index + 1:]
        if remaining != base.generators:
            continue
        product = residue.representative * residue.representative.conj(index)
        coeffs = [_drop_generator(c, index, base) for c in product.coeffs]
        return ResidueClass(base, UnivariatePoly.make(base, coeffs))
    raise AlgebraMismatch(f"{field.label()} 에서 {base.label()} 로 노름을 내릴 수 없습니다")


def norm_form_divisors(field: EtaleAlgebra, c: Rational, label: str = "D1",
                       embedding: Optional[MonomialMap] = None) -> List[DivisorSpec]:
    """x1² - c·x2² = 0: c 가 L 의 제곱 c1² 이면 x1 ∓ c1·x2 두 직선으로 나눈다"""
    c = to_fraction(c)
    root = field_sqrt(field.scalar(c))
    if root is None:
        return [DivisorSpec.norm_form(field, c, label, embedding)]
    divisors = []
    for sign in (1, -1):
        divisor = DivisorSpec.linear(field, 0, 1, -(root * sign), f"{label}{'+' if sign == 1 else '-'}", embedding)
        divisors.append(_with_base_map(divisor, root, c, sign))
    return divisors


def _with_base_map(divisor: DivisorSpec, root: EtaleElement, c: Fraction, sign: int) -> DivisorSpec:
    """L = Q(√a), c1 = r·√a 일 때 x1/x2 = ±c1 를 √c 로 보내는 동형 L → Q(√c)"""
    field = divisor.field
    if field.n != 1 or any(root.coords[:1]) or not root.coords[1]:
        return divisor
    r = root.coords[1]
    mapping = MonomialMap(field, EtaleAlgebra((c,)), ((1, Fraction(sign) / r),))
    return DivisorSpec(divisor.kind, divisor.field, divisor.coefficients, divisor.label, divisor.embedding, mapping)
