"""
유리수체 위의 다중이차 에탈 대수

원소는 근 √a_i 의 단항식 기저 위 좌표로 저장한다. 단항식은 비트마스크 S 로
색인되며 m_A · m_B = (∏_{i∈A∩B} a_i) · m_{A⊕B} 이다.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import ClassVar, Iterable, List, Optional, Sequence, Tuple, Union
import logging

from sympy import Matrix, Rational as SymRational

from app.errors import AlgebraMismatch, GeneratorLimitExceeded, InvalidInput, NotAUnit
from app.utils.arith import (
    Rational, SquareClass, format_rational, parse_rational, rational_sqrt,
    squarefree_class, to_fraction,
)

logger = logging.getLogger(__name__)

Scalar = Union[int, Fraction]


def _bits(mask: int) -> List[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


@dataclass(frozen=True)
class EtaleAlgebra:
    """Q(√a_1, ..., √a_n) 형태의 에탈 대수"""
    generators: Tuple[Fraction, ...] = ()

    MAX_GENERATORS: ClassVar[int] = 3

    def __post_init__(self):
        gens = tuple(to_fraction(int(g) if isinstance(g, SquareClass) else g) for g in self.generators)
        if len(gens) > self.MAX_GENERATORS:
            raise GeneratorLimitExceeded(f"생성원은 최대 {self.MAX_GENERATORS}개입니다: {len(gens)}")
        if any(g == 0 for g in gens):
            raise InvalidInput("생성원은 0이 될 수 없습니다")
        object.__setattr__(self, "generators", gens)

    @property
    def n(self) -> int:
        return len(self.generators)

    @property
    def dim(self) -> int:
        return 1 << self.n

    def gen_product(self, mask: int) -> Fraction:
        result = Fraction(1)
        for i in _bits(mask):
            result *= self.generators[i]
        return result

    def monomial_product(self, a: int, b: int) -> Tuple[int, Fraction]:
        return a ^ b, self.gen_product(a & b)

    # 원소 생성
    def element(self, coords: Iterable[Union[Scalar, str]]) -> "EtaleElement":
        values = tuple(parse_rational(c) for c in coords)
        if len(values) != self.dim:
            raise InvalidInput(f"좌표 개수 {len(values)} 이(가) 차원 {self.dim} 과(와) 다릅니다")
        return EtaleElement(self, values)

    def scalar(self, q: Rational) -> "EtaleElement":
        coords = [Fraction(0)] * self.dim
        coords[0] = to_fraction(q)
        return EtaleElement(self, tuple(coords))

    def zero(self) -> "EtaleElement":
        return self.scalar(0)

    def one(self) -> "EtaleElement":
        return self.scalar(1)

    def monomial(self, mask: int, coefficient: Rational = 1) -> "EtaleElement":
        coords = [Fraction(0)] * self.dim
        coords[mask] = to_fraction(coefficient)
        return EtaleElement(self, tuple(coords))

    def root(self, i: int) -> "EtaleElement":
        return self.monomial(1 << i)

    def from_parts(self, x0: "EtaleElement", x1: "EtaleElement") -> "EtaleElement":
        """x0 + x1·√a_n (x0, x1 은 앞 n-1 개 생성원의 대수 원소)"""
        base = self.prefix(self.n - 1)
        if x0.algebra != base or x1.algebra != base:
            raise AlgebraMismatch("from_parts: 부분대수가 맞지 않습니다")
        return EtaleElement(self, x0.coords + x1.coords)

    def lift(self, x: "EtaleElement") -> "EtaleElement":
        """접두 부분대수 원소를 포함"""
        if x.algebra.generators != self.generators[:x.algebra.n]:
            raise AlgebraMismatch("lift: 접두 부분대수가 아닙니다")
        return EtaleElement(self, x.coords + (Fraction(0),) * (self.dim - x.algebra.dim))

    # 대수 구성
    def adjoin(self, t: Union[SquareClass, Rational]) -> "EtaleAlgebra":
        value = int(t) if isinstance(t, SquareClass) else t
        return EtaleAlgebra(self.generators + (to_fraction(value),))

    def prefix(self, k: int) -> "EtaleAlgebra":
        return EtaleAlgebra(self.generators[:k])

    def is_field(self) -> bool:
        return len(generator_relations(self)[0]) == self.n

    def components(self) -> List["Component"]:
        return _components(self)

    def label(self) -> str:
        if not self.generators:
            return "Q"
        return "Q(" + ", ".join(f"√{format_rational(g)}" for g in self.generators) + ")"


@dataclass(frozen=True)
class EtaleElement:
    """단항식 기저 좌표로 표현한 에탈 대수 원소"""
    algebra: EtaleAlgebra
    coords: Tuple[Fraction, ...]

    def _coerce(self, other: Union["EtaleElement", Scalar]) -> "EtaleElement":
        if isinstance(other, EtaleElement):
            if other.algebra != self.algebra:
                raise AlgebraMismatch(f"{self.algebra.label()} 와(과) {other.algebra.label()} 의 연산")
            return other
        return self.algebra.scalar(other)

    def __add__(self, other):
        other = self._coerce(other)
        return EtaleElement(self.algebra, tuple(x + y for x, y in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __neg__(self):
        return EtaleElement(self.algebra, tuple(-x for x in self.coords))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, EtaleElement):
            q = to_fraction(other)
            return EtaleElement(self.algebra, tuple(x * q for x in self.coords))
        other = self._coerce(other)
        table = _product_table(self.algebra)
        result = [Fraction(0)] * self.algebra.dim
        for a, x in enumerate(self.coords):
            if not x:
                continue
            for b, y in enumerate(other.coords):
                if not y:
                    continue
                mask, coefficient = table[a][b]
                result[mask] += x * y * coefficient
        return EtaleElement(self.algebra, tuple(result))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, EtaleElement):
            return self * self._coerce(other).inverse()
        return self * (1 / to_fraction(other))

    def __pow__(self, exponent: int):
        base = self if exponent >= 0 else self.inverse()
        result = self.algebra.one()
        for _ in range(abs(exponent)):
            result = result * base
        return result

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_rational(self) -> bool:
        return not any(self.coords[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise InvalidInput(f"{self} 은(는) 유리수가 아닙니다")
        return self.coords[0]

    def conj(self, i: int) -> "EtaleElement":
        """i 번째 근의 부호를 바꾸는 대합"""
        return EtaleElement(self.algebra, tuple(
            -x if mask >> i & 1 else x for mask, x in enumerate(self.coords)))

    def split_last(self) -> Tuple["EtaleElement", "EtaleElement"]:
        """x = x0 + x1·√a_n"""
        if self.algebra.n == 0:
            raise InvalidInput("유리수체는 분해할 수 없습니다")
        base = self.algebra.prefix(self.algebra.n - 1)
        half = base.dim
        return EtaleElement(base, self.coords[:half]), EtaleElement(base, self.coords[half:])

    def norm_last(self) -> "EtaleElement":
        x0, x1 = self.split_last()
        return x0 * x0 - x1 * x1 * self.algebra.generators[-1]

    def norm_to(self, k: int) -> "EtaleElement":
        x = self
        while x.algebra.n > k:
            x = x.norm_last()
        return x

    def trace_to(self, k: int) -> "EtaleElement":
        x = self
        while x.algebra.n > k:
            x = x.split_last()[0] * 2
        return x

    def norm(self) -> Fraction:
        return self.norm_to(0).coords[0]

    def trace(self) -> Fraction:
        return self.trace_to(0).coords[0]

    def is_unit(self) -> bool:
        return self.norm() != 0

    def inverse(self) -> "EtaleElement":
        algebra = self.algebra
        if algebra.n == 0:
            if self.coords[0] == 0:
                raise NotAUnit("0은 가역원이 아닙니다")
            return algebra.scalar(1 / self.coords[0])
        x0, x1 = self.split_last()
        try:
            inverse_norm = self.norm_last().inverse()
        except NotAUnit:
            raise NotAUnit(f"{self} 은(는) {algebra.label()} 의 가역원이 아닙니다")
        return algebra.from_parts(x0, -x1) * algebra.lift(inverse_norm)

    def to_strings(self) -> List[str]:
        return [format_rational(c) for c in self.coords]

    def __str__(self) -> str:
        terms = []
        for mask, c in enumerate(self.coords):
            if not c:
                continue
            roots = "·".join(f"√{format_rational(self.algebra.generators[i])}" for i in _bits(mask))
            terms.append(format_rational(c) + (f"·{roots}" if roots else ""))
        return " + ".join(terms) if terms else "0"


@lru_cache(maxsize=256)
def _product_table(algebra: EtaleAlgebra) -> Tuple[Tuple[Tuple[int, Fraction], ...], ...]:
    return tuple(
        tuple(algebra.monomial_product(a, b) for b in range(algebra.dim))
        for a in range(algebra.dim)
    )


@dataclass(frozen=True)
class MonomialMap:
    """각 근을 대상 단항식의 유리수배로 보내는 대수 준동형"""
    source: EtaleAlgebra
    target: EtaleAlgebra
    images: Tuple[Tuple[int, Fraction], ...]

    def __post_init__(self):
        if len(self.images) != self.source.n:
            raise AlgebraMismatch("근의 상 개수가 생성원 개수와 다릅니다")
        images = tuple((int(mask), to_fraction(scale)) for mask, scale in self.images)
        for (mask, scale), generator in zip(images, self.source.generators):
            if scale * scale * self.target.gen_product(mask) != generator:
                raise AlgebraMismatch(f"√{generator} 의 상이 관계식을 만족하지 않습니다")
        object.__setattr__(self, "images", images)

    def monomial_image(self, mask: int) -> Tuple[int, Fraction]:
        return _monomial_table(self)[mask]

    def apply(self, x: EtaleElement) -> EtaleElement:
        if x.algebra != self.source:
            raise AlgebraMismatch(f"{x.algebra.label()} 원소에 {self.source.label()} 사상을 적용")
        table = _monomial_table(self)
        coords = [Fraction(0)] * self.target.dim
        for mask, c in enumerate(x.coords):
            if c:
                image, scale = table[mask]
                coords[image] += c * scale
        return EtaleElement(self.target, tuple(coords))

    def compose(self, inner: "MonomialMap") -> "MonomialMap":
        """self ∘ inner"""
        if inner.target != self.source:
            raise AlgebraMismatch("합성할 수 없는 사상입니다")
        images = []
        for mask, scale in inner.images:
            image, factor = self.monomial_image(mask)
            images.append((image, scale * factor))
        return MonomialMap(inner.source, self.target, tuple(images))

    def inverse(self) -> "MonomialMap":
        if self.source.n != self.target.n:
            raise AlgebraMismatch("전단사 사상이 아닙니다")
        table = _monomial_table(self)
        by_image = {image: (mask, scale) for mask, (image, scale) in enumerate(table)}
        if len(by_image) != self.source.dim:
            raise AlgebraMismatch("전단사 사상이 아닙니다")
        images = []
        for j in range(self.target.n):
            mask, scale = by_image[1 << j]
            images.append((mask, 1 / scale))
        return MonomialMap(self.target, self.source, tuple(images))


@lru_cache(maxsize=1024)
def _monomial_table(mapping: MonomialMap) -> Tuple[Tuple[int, Fraction], ...]:
    table = []
    for mask in range(mapping.source.dim):
        image, scale = 0, Fraction(1)
        for i in _bits(mask):
            root_mask, root_scale = mapping.images[i]
            image, factor = mapping.target.monomial_product(image, root_mask)
            scale *= factor * root_scale
        table.append((image, scale))
    return tuple(table)


def identity_map(algebra: EtaleAlgebra) -> MonomialMap:
    return MonomialMap(algebra, algebra, tuple((1 << i, Fraction(1)) for i in range(algebra.n)))


def prefix_embedding(algebra: EtaleAlgebra, k: int) -> MonomialMap:
    return MonomialMap(algebra.prefix(k), algebra, tuple((1 << i, Fraction(1)) for i in range(k)))


def subalgebra_embedding(algebra: EtaleAlgebra, masks: Sequence[int]) -> MonomialMap:
    """단항식 m_S 들이 생성하는 부분대수 (생성원은 무제곱 대표로 정규화)"""
    generators, images = [], []
    for mask in masks:
        value = algebra.gen_product(mask)
        representative = squarefree_class(value).representative
        scale = rational_sqrt(value / representative)
        generators.append(Fraction(representative))
        images.append((mask, 1 / scale))
    return MonomialMap(EtaleAlgebra(tuple(generators)), algebra, tuple(images))


@lru_cache(maxsize=256)
def generator_relations(algebra: EtaleAlgebra):
    """독립 생성원 목록과 종속 생성원의 관계 a_j = s_j^2 ∏_{J} a_i"""
    independent: List[int] = []
    relations = {}
    for j, generator in enumerate(algebra.generators):
        relation = None
        for subset in range(1 << len(independent)):
            chosen = [independent[k] for k in range(len(independent)) if subset >> k & 1]
            base = Fraction(1)
            for i in chosen:
                base *= algebra.generators[i]
            root = rational_sqrt(generator / base)
            if root is not None:
                relation = (tuple(chosen), root)
                break
        if relation is None:
            independent.append(j)
        else:
            relations[j] = relation
    return tuple(independent), relations


@dataclass(frozen=True)
class Component:
    """에탈 대수의 체 성분과 그 사영"""
    index: int
    signs: Tuple[int, ...]
    field: EtaleAlgebra
    embedding: MonomialMap


@lru_cache(maxsize=256)
def _components_cached(algebra: EtaleAlgebra) -> Tuple[Component, ...]:
    independent, relations = generator_relations(algebra)
    field = EtaleAlgebra(tuple(algebra.generators[i] for i in independent))
    position = {i: k for k, i in enumerate(independent)}
    dependent = sorted(relations)
    components = []
    for index, signs in enumerate(product((1, -1), repeat=len(dependent))):
        sign_of = dict(zip(dependent, signs))
        images = []
        for j in range(algebra.n):
            if j in position:
                images.append((1 << position[j], Fraction(1)))
            else:
                chosen, root = relations[j]
                mask = sum(1 << position[i] for i in chosen)
                images.append((mask, root * sign_of[j]))
        components.append(Component(index, tuple(signs), field, MonomialMap(algebra, field, tuple(images))))
    logger.debug(f"{algebra.label()}: 성분 {len(components)}개, 성분 체 {field.label()}")
    return tuple(components)


def _components(algebra: EtaleAlgebra) -> List[Component]:
    return list(_components_cached(algebra))


def to_components(x: EtaleElement) -> List[EtaleElement]:
    return [component.embedding.apply(x) for component in x.algebra.components()]


@lru_cache(maxsize=256)
def _reassembly_matrix(algebra: EtaleAlgebra) -> Tuple[Tuple[Fraction, ...], ...]:
    columns = []
    for mask in range(algebra.dim):
        column: List[Fraction] = []
        for image in to_components(algebra.monomial(mask)):
            column.extend(image.coords)
        columns.append(column)
    forward = Matrix(algebra.dim, algebra.dim,
                     lambda i, j: SymRational(columns[j][i].numerator, columns[j][i].denominator))
    inverse = forward.inv()
    return tuple(
        tuple(Fraction(int(inverse[i, j].p), int(inverse[i, j].q)) for j in range(algebra.dim))
        for i in range(algebra.dim)
    )


def from_components(algebra: EtaleAlgebra, values: Sequence[EtaleElement]) -> EtaleElement:
    """성분별 값에서 원소 복원"""
    components = algebra.components()
    if len(values) != len(components):
        raise AlgebraMismatch("성분 개수가 맞지 않습니다")
    stacked: List[Fraction] = []
    for component, value in zip(components, values):
        if value.algebra != component.field:
            raise AlgebraMismatch("성분 체가 맞지 않습니다")
        stacked.extend(value.coords)
    matrix = _reassembly_matrix(algebra)
    coords = tuple(sum((row[k] * stacked[k] for k in range(len(stacked))), Fraction(0)) for row in matrix)
    return EtaleElement(algebra, coords)


def norm(x: EtaleElement, base: EtaleAlgebra) -> EtaleElement:
    """접두 부분대수로의 노름"""
    if x.algebra.generators[:base.n] != base.generators:
        raise AlgebraMismatch(f"{base.label()} 은(는) {x.algebra.label()} 의 접두 부분대수가 아닙니다")
    if not x.is_unit():
        raise NotAUnit(f"{x} 은(는) 가역원이 아닙니다")
    return x.norm_to(base.n)


def trace(x: EtaleElement, base: EtaleAlgebra) -> EtaleElement:
    if x.algebra.generators[:base.n] != base.generators:
        raise AlgebraMismatch(f"{base.label()} 은(는) {x.algebra.label()} 의 접두 부분대수가 아닙니다")
    return x.trace_to(base.n)


def field_sqrt(x: EtaleElement) -> Optional[EtaleElement]:
    """체 성분에서의 제곱근 (없으면 None)"""
    algebra = x.algebra
    if algebra.n == 0:
        root = rational_sqrt(x.coords[0])
        return None if root is None else algebra.scalar(root)
    base = algebra.prefix(algebra.n - 1)
    t = algebra.generators[-1]
    x0, x1 = x.split_last()
    if x1.is_zero():
        y0 = field_sqrt(x0)
        if y0 is not None:
            return algebra.lift(y0)
        z = field_sqrt(x0 * (1 / t))
        if z is not None:
            return algebra.from_parts(base.zero(), z)
        return None
    n = field_sqrt(x0 * x0 - x1 * x1 * t)
    if n is None:
        return None
    for sign in (1, -1):
        y0 = field_sqrt((x0 + n * sign) * Fraction(1, 2))
        if y0 is None or y0.is_zero():
            continue
        y = algebra.from_parts(y0, x1 * (y0 * 2).inverse())
        if y * y == x:
            return y
    return None


def component_square_roots(x: EtaleElement) -> List[Optional[EtaleElement]]:
    return [field_sqrt(value) for value in to_components(x)]


@dataclass(frozen=True)
class SquareWitness:
    """성분별 제곱근 판정 (components[i] 는 i 번째 성분의 제곱근 또는 None)"""
    components: Tuple[Optional[EtaleElement], ...]
    witness: Optional[EtaleElement] = None

    @property
    def square(self) -> bool:
        return self.witness is not None

    def square_components(self) -> List[int]:
        return [i for i, root in enumerate(self.components) if root is not None]


def is_square_with_witness(x: EtaleElement) -> SquareWitness:
    """성분마다 제곱 여부와 제곱근; 모든 성분에서 제곱이면 ζ² = x 인 ζ 도 함께"""
    if not x.is_unit():
        raise NotAUnit(f"{x} 은(는) 가역원이 아닙니다")
    roots = tuple(component_square_roots(x))
    if any(root is None for root in roots):
        return SquareWitness(roots)
    witness = from_components(x.algebra, roots)
    if witness * witness != x:
        raise AlgebraMismatch("제곱근 증인 검증 실패")
    return SquareWitness(roots, witness)


def adjoin(algebra: EtaleAlgebra, t: Union[SquareClass, Rational]) -> EtaleAlgebra:
    return algebra.adjoin(t)


RATIONALS = EtaleAlgebra(())


def quadratic_algebra(a: Union[SquareClass, Rational]) -> EtaleAlgebra:
    return RATIONALS.adjoin(a)
