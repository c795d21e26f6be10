"""
에탈 대수 계수의 이변수 다항식, 유리함수, 일변수 다항식
"""
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Dict, Iterable, List, Optional, Tuple, Union
import logging

from sympy import Poly, Symbol, fraction, together
from sympy.core.sympify import SympifyError
from sympy.parsing.sympy_parser import parse_expr

from app.algebra.etale import EtaleAlgebra, EtaleElement, MonomialMap, field_sqrt
from app.errors import InvalidInput, ZeroDivisorOnRestriction
from app.utils.arith import Rational, rational_content, to_fraction

logger = logging.getLogger(__name__)

Monomial = Tuple[int, int]
Coefficient = Union[EtaleElement, int, Fraction]


def _as_element(algebra: EtaleAlgebra, c: Coefficient) -> EtaleElement:
    if isinstance(c, EtaleElement):
        if c.algebra != algebra:
            raise InvalidInput(f"{c.algebra.label()} 계수를 {algebra.label()} 다항식에 사용")
        return c
    return algebra.scalar(c)


@dataclass(frozen=True)
class BivariatePoly:
    """x1, x2 의 다항식 (항은 단항식 오름차순, 0 계수 없음)"""
    algebra: EtaleAlgebra
    terms: Tuple[Tuple[Monomial, EtaleElement], ...] = ()

    @classmethod
    def from_dict(cls, algebra: EtaleAlgebra, terms: Dict[Monomial, Coefficient]) -> "BivariatePoly":
        cleaned = []
        for monomial, c in terms.items():
            element = _as_element(algebra, c)
            if not element.is_zero():
                cleaned.append((monomial, element))
        return cls(algebra, tuple(sorted(cleaned, key=lambda item: item[0])))

    @classmethod
    def constant(cls, algebra: EtaleAlgebra, c: Coefficient) -> "BivariatePoly":
        return cls.from_dict(algebra, {(0, 0): c})

    @classmethod
    def variable(cls, algebra: EtaleAlgebra, index: int) -> "BivariatePoly":
        return cls.from_dict(algebra, {(1, 0) if index == 0 else (0, 1): 1})

    @classmethod
    def linear(cls, algebra: EtaleAlgebra, l0: Coefficient, l1: Coefficient, l2: Coefficient) -> "BivariatePoly":
        """l1·x1 + l2·x2 + l0"""
        return cls.from_dict(algebra, {(0, 0): l0, (1, 0): l1, (0, 1): l2})

    def as_dict(self) -> Dict[Monomial, EtaleElement]:
        return dict(self.terms)

    def content(self) -> Fraction:
        """모든 계수 좌표의 양의 유리 최대공약수"""
        return rational_content(x for _, c in self.terms for x in c.coords)

    def _coerce(self, other) -> "BivariatePoly":
        if isinstance(other, BivariatePoly):
            if other.algebra != self.algebra:
                raise InvalidInput("계수 대수가 다른 다항식의 연산")
            return other
        return BivariatePoly.constant(self.algebra, other)

    def __add__(self, other):
        other = self._coerce(other)
        result = self.as_dict()
        for monomial, c in other.terms:
            result[monomial] = result[monomial] + c if monomial in result else c
        return BivariatePoly.from_dict(self.algebra, result)

    __radd__ = __add__

    def __neg__(self):
        return BivariatePoly(self.algebra, tuple((m, -c) for m, c in self.terms))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        result: Dict[Monomial, EtaleElement] = {}
        for (i, j), c in self.terms:
            for (k, l), e in other.terms:
                key = (i + k, j + l)
                product = c * e
                result[key] = result[key] + product if key in result else product
        return BivariatePoly.from_dict(self.algebra, result)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if exponent < 0:
            raise InvalidInput("다항식의 음의 거듭제곱")
        result = BivariatePoly.constant(self.algebra, 1)
        for _ in range(exponent):
            result = result * self
        return result

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(m == (0, 0) for m, _ in self.terms)

    def degree(self) -> int:
        return max((i + j for (i, j), _ in self.terms), default=-1)

    def leading(self) -> Tuple[Monomial, EtaleElement]:
        """x1 > x2 사전식 순서의 선도항"""
        if self.is_zero():
            raise InvalidInput("0 다항식에는 선도항이 없습니다")
        return self.terms[-1]

    def map(self, mapping: MonomialMap) -> "BivariatePoly":
        """계수에 대수 사상 적용"""
        return BivariatePoly.from_dict(mapping.target, {m: mapping.apply(c) for m, c in self.terms})

    def evaluate(self, x1: Coefficient, x2: Coefficient) -> EtaleElement:
        x1, x2 = _as_element(self.algebra, x1), _as_element(self.algebra, x2)
        total = self.algebra.zero()
        for (i, j), c in self.terms:
            total = total + c * (x1 ** i) * (x2 ** j)
        return total

    def shift(self, p1: Rational, p2: Rational) -> "BivariatePoly":
        """x1 → x1 + p1, x2 → x2 + p2"""
        p1, p2 = to_fraction(p1), to_fraction(p2)
        result: Dict[Monomial, EtaleElement] = {}
        for (i, j), c in self.terms:
            for k in range(i + 1):
                for l in range(j + 1):
                    scale = comb(i, k) * comb(j, l) * p1 ** (i - k) * p2 ** (j - l)
                    if scale == 0:
                        continue
                    term = c * scale
                    result[(k, l)] = result[(k, l)] + term if (k, l) in result else term
        return BivariatePoly.from_dict(self.algebra, result)

    def divmod(self, divisor: "BivariatePoly") -> Tuple["BivariatePoly", "BivariatePoly"]:
        """사전식 순서 나눗셈 (선도 계수는 가역이어야 함)"""
        lead_monomial, lead_coefficient = divisor.leading()
        inverse = lead_coefficient.inverse()
        quotient: Dict[Monomial, EtaleElement] = {}
        remainder: Dict[Monomial, EtaleElement] = {}
        current = self
        while not current.is_zero():
            (i, j), c = current.leading()
            if i >= lead_monomial[0] and j >= lead_monomial[1]:
                key = (i - lead_monomial[0], j - lead_monomial[1])
                factor = c * inverse
                quotient[key] = factor
                current = current - divisor * BivariatePoly.from_dict(self.algebra, {key: factor})
            else:
                remainder[(i, j)] = c
                current = BivariatePoly(self.algebra, current.terms[:-1])
        return BivariatePoly.from_dict(self.algebra, quotient), BivariatePoly.from_dict(self.algebra, remainder)

    def restrict(self, x1: "UnivariatePoly", x2: "UnivariatePoly", lift: Optional[MonomialMap] = None) -> "UnivariatePoly":
        """매개화 (x1, x2) = (X1(t), X2(t)) 에 대입"""
        field = x1.field
        result = UnivariatePoly.zero(field)
        powers1 = [UnivariatePoly.constant(field, 1)]
        powers2 = [UnivariatePoly.constant(field, 1)]
        for (i, j), c in self.terms:
            while len(powers1) <= i:
                powers1.append(powers1[-1] * x1)
            while len(powers2) <= j:
                powers2.append(powers2[-1] * x2)
            coefficient = lift.apply(c) if lift is not None else c
            result = result + powers1[i] * powers2[j] * coefficient
        return result

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        pieces = []
        for (i, j), c in reversed(self.terms):
            monomial = "·".join(part for part in (
                "" if i == 0 else ("x1" if i == 1 else f"x1^{i}"),
                "" if j == 0 else ("x2" if j == 1 else f"x2^{j}"),
            ) if part)
            coefficient = f"({c})" if len([x for x in c.coords if x]) > 1 else str(c)
            pieces.append(coefficient if not monomial else f"{coefficient}·{monomial}")
        return " + ".join(pieces)


@dataclass(frozen=True)
class BivariateRat:
    """분자/분모 다항식 쌍으로 표현한 F(x1, x2) 의 원소"""
    numerator: BivariatePoly
    denominator: BivariatePoly

    def __post_init__(self):
        if self.denominator.is_zero():
            raise InvalidInput("분모가 0 다항식입니다")
        if self.numerator.algebra != self.denominator.algebra:
            raise InvalidInput("분자와 분모의 계수 대수가 다릅니다")
        if self.denominator.is_constant() and self.denominator.terms[0][1].is_unit():
            # 상수 분모는 분자로 옮긴다
            inverse = self.denominator.terms[0][1].inverse()
            object.__setattr__(self, "numerator", self.numerator * inverse)
            object.__setattr__(self, "denominator", BivariatePoly.constant(self.numerator.algebra, 1))
        elif self.numerator.is_zero():
            object.__setattr__(self, "denominator", BivariatePoly.constant(self.numerator.algebra, 1))
        else:
            # 분자와 분모 내용의 최대공약수로 나눈다
            common = rational_content((self.numerator.content(), self.denominator.content()))
            if common != 1:
                object.__setattr__(self, "numerator", self.numerator * (1 / common))
                object.__setattr__(self, "denominator", self.denominator * (1 / common))

    @property
    def algebra(self) -> EtaleAlgebra:
        return self.numerator.algebra

    @classmethod
    def of(cls, poly: BivariatePoly) -> "BivariateRat":
        return cls(poly, BivariatePoly.constant(poly.algebra, 1))

    @classmethod
    def constant(cls, algebra: EtaleAlgebra, c: Coefficient) -> "BivariateRat":
        return cls.of(BivariatePoly.constant(algebra, c))

    def _coerce(self, other) -> "BivariateRat":
        if isinstance(other, BivariateRat):
            return other
        if isinstance(other, BivariatePoly):
            return BivariateRat.of(other)
        return BivariateRat.constant(self.algebra, other)

    def __mul__(self, other):
        other = self._coerce(other)
        return BivariateRat(self.numerator * other.numerator, self.denominator * other.denominator)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other.numerator.is_zero():
            raise InvalidInput("0 으로 나눔")
        return BivariateRat(self.numerator * other.denominator, self.denominator * other.numerator)

    def __add__(self, other):
        other = self._coerce(other)
        if self.denominator == other.denominator:
            return BivariateRat(self.numerator + other.numerator, self.denominator)
        return BivariateRat(
            self.numerator * other.denominator + other.numerator * self.denominator,
            self.denominator * other.denominator,
        )

    __radd__ = __add__

    def __neg__(self):
        return BivariateRat(-self.numerator, self.denominator)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __pow__(self, exponent: int):
        if exponent >= 0:
            return BivariateRat(self.numerator ** exponent, self.denominator ** exponent)
        return BivariateRat(self.denominator ** -exponent, self.numerator ** -exponent)

    def is_zero(self) -> bool:
        return self.numerator.is_zero()

    def map(self, mapping: MonomialMap) -> "BivariateRat":
        return BivariateRat(self.numerator.map(mapping), self.denominator.map(mapping))

    def evaluate(self, x1: Coefficient, x2: Coefficient) -> EtaleElement:
        denominator = self.denominator.evaluate(x1, x2)
        if not denominator.is_unit():
            raise ZeroDivisorOnRestriction(f"({x1}, {x2}) 에서 분모가 가역이 아닙니다")
        return self.numerator.evaluate(x1, x2) * denominator.inverse()

    def is_regular_unit_at(self, x1: Rational, x2: Rational) -> bool:
        return self.denominator.evaluate(x1, x2).is_unit() and self.numerator.evaluate(x1, x2).is_unit()

    def __str__(self) -> str:
        if self.denominator.is_constant():
            return str(self.numerator)
        return f"({self.numerator}) / ({self.denominator})"


@dataclass(frozen=True)
class UnivariatePoly:
    """체 L 위의 t 다항식 (계수 오름차순, 끝의 0 없음)"""
    field: EtaleAlgebra
    coeffs: Tuple[EtaleElement, ...] = ()

    @classmethod
    def make(cls, field: EtaleAlgebra, coeffs: Iterable[Coefficient]) -> "UnivariatePoly":
        values = [_as_element(field, c) for c in coeffs]
        while values and values[-1].is_zero():
            values.pop()
        return cls(field, tuple(values))

    @classmethod
    def zero(cls, field: EtaleAlgebra) -> "UnivariatePoly":
        return cls(field, ())

    @classmethod
    def constant(cls, field: EtaleAlgebra, c: Coefficient) -> "UnivariatePoly":
        return cls.make(field, [c])

    @classmethod
    def affine(cls, field: EtaleAlgebra, c0: Coefficient, c1: Coefficient) -> "UnivariatePoly":
        """c0 + c1·t"""
        return cls.make(field, [c0, c1])

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "UnivariatePoly") -> "UnivariatePoly":
        size = max(len(self.coeffs), len(other.coeffs))
        zero = self.field.zero()
        return UnivariatePoly.make(self.field, [
            (self.coeffs[k] if k < len(self.coeffs) else zero) + (other.coeffs[k] if k < len(other.coeffs) else zero)
            for k in range(size)
        ])

    def __mul__(self, other):
        if not isinstance(other, UnivariatePoly):
            return UnivariatePoly.make(self.field, [c * other for c in self.coeffs])
        if self.is_zero() or other.is_zero():
            return UnivariatePoly.zero(self.field)
        result = [self.field.zero()] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            for j, e in enumerate(other.coeffs):
                result[i + j] = result[i + j] + c * e
        return UnivariatePoly.make(self.field, result)

    def __neg__(self):
        return UnivariatePoly(self.field, tuple(-c for c in self.coeffs))

    def __sub__(self, other: "UnivariatePoly") -> "UnivariatePoly":
        return self + (-other)

    def __pow__(self, exponent: int) -> "UnivariatePoly":
        result = UnivariatePoly.constant(self.field, 1)
        for _ in range(exponent):
            result = result * self
        return result

    def map(self, mapping: MonomialMap) -> "UnivariatePoly":
        return UnivariatePoly.make(mapping.target, [mapping.apply(c) for c in self.coeffs])

    def conj(self, i: int) -> "UnivariatePoly":
        return UnivariatePoly(self.field, tuple(c.conj(i) for c in self.coeffs))

    def sqrt(self) -> Optional["UnivariatePoly"]:
        """다항식 제곱근 (없으면 None); 최고차 계수부터 차례로 결정한다"""
        if self.is_zero():
            return self
        if self.degree() % 2:
            return None
        half = self.degree() // 2
        top = field_sqrt(self.coeffs[-1])
        if top is None:
            return None
        root: List[Optional[EtaleElement]] = [None] * (half + 1)
        root[half] = top
        inverse = (top * 2).inverse()
        for j in range(half - 1, -1, -1):
            # t^{half+j} 계수 비교
            partial = self.coeffs[half + j]
            for i in range(j + 1, half):
                partial = partial - root[i] * root[half + j - i]
            root[j] = partial * inverse
        candidate = UnivariatePoly.make(self.field, root)
        if candidate * candidate != self:
            return None
        return candidate

    def is_square(self) -> bool:
        return self.sqrt() is not None

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        pieces = []
        for k, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            pieces.append(f"({c})" + ("" if k == 0 else ("·t" if k == 1 else f"·t^{k}")))
        return " + ".join(pieces)


def _symbols(algebra: EtaleAlgebra):
    x1, x2 = Symbol("x1"), Symbol("x2")
    roots = [Symbol(f"r{i + 1}") for i in range(algebra.n)]
    names = {"x1": x1, "x2": x2, **{str(r): r for r in roots}}
    return (x1, x2, *roots), names


def _parse_expression(text: str, algebra: EtaleAlgebra):
    gens, names = _symbols(algebra)
    try:
        return parse_expr(str(text).replace("^", "**"), local_dict=names), gens
    except (SympifyError, SyntaxError, TypeError, ValueError) as e:
        raise InvalidInput(f"다항식 형식 오류: {text!r} ({str(e)})")


def _from_expression(expression, gens, algebra: EtaleAlgebra, text: str) -> BivariatePoly:
    try:
        poly = Poly(expression, *gens)
    except (SympifyError, TypeError, ValueError) as e:
        raise InvalidInput(f"다항식 형식 오류: {text!r} ({str(e)})")
    terms: Dict[Monomial, EtaleElement] = {}
    for exponents, coefficient in poly.terms():
        if not coefficient.is_Rational:
            raise InvalidInput(f"계수는 유리수여야 합니다: {coefficient}")
        i, j, *root_exponents = exponents
        mask, scale = 0, Fraction(int(coefficient.p), int(coefficient.q))
        for k, e in enumerate(root_exponents):
            scale *= algebra.generators[k] ** (e // 2)
            if e % 2:
                mask, factor = algebra.monomial_product(mask, 1 << k)
                scale *= factor
        term = algebra.monomial(mask, scale)
        terms[(i, j)] = terms[(i, j)] + term if (i, j) in terms else term
    return BivariatePoly.from_dict(algebra, terms)


def parse_bivariate(text: str, algebra: EtaleAlgebra) -> BivariatePoly:
    """"x1^2 - 3*x2 + r1*x1" 형식 파싱; r_i 는 i 번째 생성원의 제곱근"""
    expression, gens = _parse_expression(text, algebra)
    return _from_expression(expression, gens, algebra, text)


def parse_rational_function(text: str, algebra: EtaleAlgebra) -> BivariateRat:
    """"(x1 + 1)/(x2 - r1)" 처럼 분모가 있는 식"""
    expression, gens = _parse_expression(text, algebra)
    numerator, denominator = fraction(together(expression))
    return BivariateRat(
        _from_expression(numerator, gens, algebra, text),
        _from_expression(denominator, gens, algebra, text),
    )
