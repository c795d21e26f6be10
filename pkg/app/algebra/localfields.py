"""
국소 데이터: Q_p 와 실수체 위의 제곱류, 다중이차 대수의 자리, 국소 사원수 기호

자리 P 는 성분 체 K 의 분해체 Z (p 에서 국소 제곱인 단항식들이 생성) 의
Q_p 매장으로 식별한다. 기호는 Z 까지 코리스트릭션한 뒤 Z 의 차수 1 자리에서
p-진 근사로 평가한다.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import List, Optional, Sequence, Tuple, Union
import logging

from app.algebra.etale import (
    EtaleAlgebra, EtaleElement, MonomialMap, generator_relations,
)
from app.config import get_config
from app.errors import AlgebraMismatch, InvalidInput, NotAUnit, PrecisionExhausted
from app.utils.arith import Rational, jacobi, squarefree_class, to_fraction, valuation
from app.utils.padic import PadicApprox, canonical_root, same_up_to_sign

logger = logging.getLogger(__name__)

INFINITY = "inf"
Prime = Union[int, str]

Symbol = Tuple[EtaleElement, EtaleElement]


def is_infinite(p: Prime) -> bool:
    return p == INFINITY


def place_sort_key(p: Prime) -> Tuple[int, int]:
    return (1, 0) if is_infinite(p) else (0, int(p))


def _unit_digits(p: int) -> int:
    return 3 if p == 2 else 1


def _unit_data(q: Rational, p: int) -> Tuple[int, int]:
    """(부치, 단원부 잉여 mod p 또는 mod 8)"""
    q = to_fraction(q)
    v = valuation(q, p)
    unit = q / Fraction(p) ** v
    modulus = p ** _unit_digits(p)
    return v, unit.numerator * pow(unit.denominator, -1, modulus) % modulus


@lru_cache(maxsize=1024)
def least_nonresidue(p: int) -> int:
    for u in range(2, p):
        if jacobi(u, p) == -1:
            return u
    raise InvalidInput(f"{p} 에는 비잉여가 없습니다")


def local_square_class(q: Rational, p: Prime) -> int:
    """국소 제곱류 표지: 홀수 p 는 {1, u, p, up}, p = 2 는 {±1, ±2, ±5, ±10}, ∞ 는 부호"""
    q = to_fraction(q)
    if q == 0:
        raise InvalidInput("0에는 제곱류가 없습니다")
    if is_infinite(p):
        return 1 if q > 0 else -1
    v, residue = _unit_data(q, p)
    if p == 2:
        unit = {1: 1, 3: -5, 5: 5, 7: -1}[residue % 8]
        return unit * (2 if v % 2 else 1)
    unit = 1 if jacobi(residue, p) == 1 else least_nonresidue(p)
    return unit * (p if v % 2 else 1)


def is_local_square(q: Rational, p: Prime) -> bool:
    return local_square_class(q, p) == 1


def _hilbert_from_local_data(p: Prime, alpha: int, u: int, beta: int, v: int) -> int:
    """부치와 단원부 잉여로부터 (a, b)_p"""
    if p == 2:
        def eps(w):
            return (w - 1) // 2 % 2

        def omega(w):
            return (w * w - 1) // 8 % 2

        exponent = eps(u % 8) * eps(v % 8) + alpha * omega(v % 8) + beta * omega(u % 8)
        return -1 if exponent % 2 else 1
    sign = -1 if (alpha * beta * (p - 1) // 2) % 2 else 1
    if beta % 2:
        sign *= jacobi(u, p)
    if alpha % 2:
        sign *= jacobi(v, p)
    return sign


def hilbert_symbol_qp(a: Rational, b: Rational, p: Prime) -> int:
    """닫힌 공식에 의한 힐베르트 기호"""
    a, b = to_fraction(a), to_fraction(b)
    if a == 0 or b == 0:
        raise InvalidInput("힐베르트 기호의 인자는 0이 될 수 없습니다")
    if is_infinite(p):
        return -1 if a < 0 and b < 0 else 1
    alpha, u = _unit_data(a, p)
    beta, v = _unit_data(b, p)
    return _hilbert_from_local_data(p, alpha, u, beta, v)


def hilbert_symbol_by_norms(a: Rational, b: Rational, p: Prime) -> int:
    """z² = a x² + b y² 의 국소 해 탐색으로 구한 힐베르트 기호

    가지마다 값의 제곱류가 확정될 때까지만 정밀도를 올리므로 결과는 엄밀하다.
    """
    if is_infinite(p):
        return hilbert_symbol_qp(a, b, p)
    a = int(squarefree_class(a))
    b = int(squarefree_class(b))
    if is_local_square(a, p) or is_local_square(-a * b, p):
        return 1
    need = _unit_digits(p)
    cap = get_config().precision_cap

    def status(n: int, j: int) -> Optional[bool]:
        if n == 0:
            return None
        v = valuation(n, p)
        if v + need > j:
            return None
        return v % 2 == 0 and is_local_square(n // p ** v, p)

    # (x, y) = (1, r) 또는 (p·s, 1)
    pending = [(1, r, 1, False) for r in range(p)] + [(0, 1, 1, True)]
    while pending:
        refined = []
        for x, y, j, x_branch in pending:
            verdict = status(a * x * x + b * y * y, j)
            if verdict is True:
                return 1
            if verdict is None:
                if j >= cap:
                    raise PrecisionExhausted(f"({a}, {b})_{p}: 정밀도 {cap} 에서 결론이 나지 않습니다")
                step = p ** j
                for k in range(p):
                    if x_branch:
                        refined.append((x + k * step, y, j + 1, True))
                    else:
                        refined.append((x, y + k * step, j + 1, False))
        pending = refined
    return -1


@dataclass(frozen=True)
class PadicContext:
    """p-진 계산 정밀도"""
    p: int
    precision: int

    def doubled(self, cap: int) -> "PadicContext":
        if self.precision >= cap:
            raise PrecisionExhausted(f"p={self.p}: 정밀도 상한 {cap} 에 도달했습니다")
        return PadicContext(self.p, min(2 * self.precision, cap))

    @classmethod
    def initial(cls, p: int, degree: int) -> "PadicContext":
        v4 = 2 if p == 2 else 0
        return cls(p, 2 * degree * v4 + 2 * degree + 3)


@dataclass(frozen=True)
class _PlaceData:
    kernel_basis: Tuple[int, ...]
    presentation: EtaleAlgebra
    to_presentation: MonomialMap
    degree: int


@lru_cache(maxsize=1024)
def _place_data(field: EtaleAlgebra, p: Prime) -> _PlaceData:
    """국소 제곱인 단항식들의 핵 기저와 그에 맞춘 재표현"""
    kernel_basis: List[int] = []
    span = {0}
    for mask in range(1, field.dim):
        value = field.gen_product(mask)
        local = value > 0 if is_infinite(p) else is_local_square(value, p)
        if local and mask not in span:
            kernel_basis.append(mask)
            span |= {s ^ mask for s in span}
    basis = list(kernel_basis)
    for i in range(field.n):
        if (1 << i) not in span:
            basis.append(1 << i)
            span |= {s ^ (1 << i) for s in span}
    presentation = EtaleAlgebra(tuple(field.gen_product(mask) for mask in basis))
    forward = MonomialMap(presentation, field, tuple((mask, Fraction(1)) for mask in basis))
    degree = 1 << (field.n - len(kernel_basis))
    return _PlaceData(tuple(kernel_basis), presentation, forward.inverse(), degree)


@dataclass(frozen=True)
class LocalPlace:
    """에탈 대수의 한 성분 위의 자리"""
    algebra: EtaleAlgebra
    prime: Prime
    component: int = 0
    signs: Tuple[int, ...] = ()

    @property
    def field(self) -> EtaleAlgebra:
        return self.algebra.components()[self.component].field

    @property
    def data(self) -> _PlaceData:
        return _place_data(self.field, self.prime)

    @property
    def degree(self) -> int:
        return self.data.degree

    @property
    def is_complex(self) -> bool:
        return is_infinite(self.prime) and self.degree > 1

    def descriptor(self) -> Tuple[int, ...]:
        """성분 생성원의 국소 제곱류"""
        return tuple(local_square_class(g, self.prime) for g in self.field.generators)

    def label(self) -> str:
        base = "inf" if is_infinite(self.prime) else f"p={self.prime}"
        if self.algebra.n == 0:
            return base
        marks = "".join("+" if s > 0 else "-" for s in self.signs)
        return f"{base}@{self.component}" + (f"[{marks}]" if marks else "")

    def __str__(self) -> str:
        return self.label()


def places_above(algebra: EtaleAlgebra, p: Prime) -> List[LocalPlace]:
    """p 위의 모든 자리 (성분 순, 부호 사전순)"""
    places = []
    for component in algebra.components():
        data = _place_data(component.field, p)
        for signs in product((1, -1), repeat=len(data.kernel_basis)):
            places.append(LocalPlace(algebra, p, component.index, signs))
    return places


def _corestrict_step(symbols: Sequence[Symbol]) -> List[Symbol]:
    """E = E0(√t) 에서 E0 로 기호 목록을 코리스트릭션"""
    result: List[Symbol] = []
    for pi, rho in symbols:
        algebra = pi.algebra
        base = algebra.prefix(algebra.n - 1)
        pi0, pi1 = pi.split_last()
        rho0, rho1 = rho.split_last()
        if pi1.is_zero():
            result.append((pi0, rho.norm_last()))
            continue
        if rho1.is_zero():
            result.append((pi.norm_last(), rho0))
            continue
        norm_pi, norm_rho = pi.norm_last(), rho.norm_last()
        cross = (-(pi * rho)).split_last()[1]
        result.append((pi1, norm_pi))
        result.append((rho1, norm_rho))
        if not cross.is_zero():
            result.append((cross, norm_pi * norm_rho))
        result.append((-norm_pi, -norm_rho))
        result.append((base.scalar(-1), base.scalar(-1)))
    return result


def _real_sign(x: EtaleElement, signs: Sequence[int]) -> int:
    """양의 생성원을 가진 체의 실매장에서 x 의 부호"""
    if x.algebra.n == 0:
        c = x.coords[0]
        return (c > 0) - (c < 0)
    x0, x1 = x.split_last()
    s0 = _real_sign(x0, signs)
    s1 = _real_sign(x1, signs) * signs[x.algebra.n - 1]
    if s0 == 0 or s0 == s1:
        return s1
    if s1 == 0:
        return s0
    return s0 if _real_sign(x.norm_last(), signs) > 0 else s1


def _padic_image(x: EtaleElement, roots: Sequence[PadicApprox], signs: Sequence[int], p: int) -> PadicApprox:
    total = PadicApprox.exact(p, 0)
    for mask, c in enumerate(x.coords):
        if not c:
            continue
        term = PadicApprox.exact(p, c)
        for j in range(x.algebra.n):
            if mask >> j & 1:
                term = term * roots[j].scale(signs[j])
        total = total + term
    return total


def _decomposition_roots(place: LocalPlace, context: PadicContext) -> List[PadicApprox]:
    data = place.data
    decomposition = data.presentation.prefix(len(data.kernel_basis))
    return [canonical_root(t, context.p, context.precision) for t in decomposition.generators]


def _to_decomposition(place: LocalPlace, symbols: List[Symbol]) -> List[Symbol]:
    data = place.data
    depth = len(data.kernel_basis)
    while symbols and symbols[0][0].algebra.n > depth:
        symbols = _corestrict_step(symbols)
    return symbols


def _component_image(place: LocalPlace, x: EtaleElement) -> EtaleElement:
    if x.algebra != place.algebra:
        raise AlgebraMismatch(f"{x.algebra.label()} 원소를 {place.algebra.label()} 의 자리에서 평가")
    image = place.algebra.components()[place.component].embedding.apply(x)
    if image.is_zero():
        raise NotAUnit(f"{x} 은(는) 자리 {place.label()} 의 성분에서 0입니다")
    return place.data.to_presentation.apply(image)


def local_symbol(place: LocalPlace, pi: EtaleElement, rho: EtaleElement) -> int:
    """자리 P 에서 (π, ρ) 의 국소 불변량 (±1)"""
    pi_k, rho_k = _component_image(place, pi), _component_image(place, rho)
    if place.is_complex:
        return 1
    symbols = _to_decomposition(place, [(pi_k, rho_k)])
    if is_infinite(place.prime):
        result = 1
        for x, y in symbols:
            if _real_sign(x, place.signs) < 0 and _real_sign(y, place.signs) < 0:
                result = -result
        return result

    p = int(place.prime)
    context = PadicContext.initial(p, place.degree)
    cap = get_config().precision_cap
    digits = _unit_digits(p)
    while True:
        roots = _decomposition_roots(place, context)
        result, conclusive = 1, True
        for x, y in symbols:
            dx = _padic_image(x, roots, place.signs, p).unit_part(digits)
            dy = _padic_image(y, roots, place.signs, p).unit_part(digits)
            if dx is None or dy is None:
                conclusive = False
                break
            result *= _hilbert_from_local_data(p, dx[0], dx[1], dy[0], dy[1])
        if conclusive:
            return result
        logger.debug(f"{place.label()}: 정밀도 {context.precision} 부족, 두 배로 증가")
        context = context.doubled(cap)


def local_norm(place: LocalPlace, pi: EtaleElement) -> Fraction:
    """N_{K_P/Q_p}(π) 의 국소 제곱류 대표 (유리수)"""
    pi_k = _component_image(place, pi)
    if place.is_complex:
        return Fraction(1)
    norm = pi_k.norm_to(len(place.data.kernel_basis))
    if is_infinite(place.prime):
        return Fraction(_real_sign(norm, place.signs))
    p = int(place.prime)
    context = PadicContext.initial(p, place.degree)
    cap = get_config().precision_cap
    while True:
        roots = _decomposition_roots(place, context)
        data = _padic_image(norm, roots, place.signs, p).unit_part(_unit_digits(p))
        if data is not None:
            v, residue = data
            return Fraction(p) ** v * residue
        context = context.doubled(cap)


def symbol_with_rational(place: LocalPlace, pi: EtaleElement, y: Rational) -> int:
    """(π, y)_P = (N_P π, y)_p (y 유리수)"""
    return hilbert_symbol_qp(local_norm(place, pi), y, place.prime)


def _match_component(source: EtaleAlgebra, to_field: MonomialMap) -> Tuple[int, MonomialMap]:
    """체로 가는 사상이 통과하는 source 성분과 유도된 체 사상"""
    independent, relations = generator_relations(source)
    field = to_field.target
    signs = []
    for j in sorted(relations):
        chosen, root = relations[j]
        mask, scale = 0, Fraction(1)
        for i in chosen:
            image_mask, image_scale = to_field.images[i]
            mask, factor = field.monomial_product(mask, image_mask)
            scale *= factor * image_scale
        target_mask, target_scale = to_field.images[j]
        ratio = target_scale / (root * scale)
        if mask != target_mask or ratio not in (1, -1):
            raise AlgebraMismatch("성분 대응을 찾을 수 없습니다")
        signs.append(int(ratio))
    for component in source.components():
        if component.signs == tuple(signs):
            induced = MonomialMap(component.field, field, tuple(to_field.images[i] for i in independent))
            return component.index, induced
    raise AlgebraMismatch("성분 대응을 찾을 수 없습니다")


def restrict_place(place: LocalPlace, mapping: MonomialMap) -> LocalPlace:
    """사상 E0 → E 를 따라 E 의 자리 아래에 놓인 E0 의 자리"""
    if mapping.target != place.algebra:
        raise AlgebraMismatch("자리와 사상의 대수가 다릅니다")
    component = place.algebra.components()[place.component]
    index, induced = _match_component(mapping.source, component.embedding.compose(mapping))
    lower_field = mapping.source.components()[index].field
    lower = _place_data(lower_field, place.prime)
    upper = place.data
    if not lower.kernel_basis:
        return LocalPlace(mapping.source, place.prime, index, ())

    # 핵 기저 단항식의 상을 위쪽 핵 기저로 전개: m_B0 ↦ scale · ∏ m_Bj
    expansions = []
    for mask in lower.kernel_basis:
        image, scale = induced.monomial_image(mask)
        chosen = None
        for subset in range(1 << len(upper.kernel_basis)):
            combined = 0
            for j, basis_mask in enumerate(upper.kernel_basis):
                if subset >> j & 1:
                    combined ^= basis_mask
            if combined == image:
                chosen = [j for j in range(len(upper.kernel_basis)) if subset >> j & 1]
                break
        if chosen is None:
            raise AlgebraMismatch("국소 제곱 단항식이 핵에 놓이지 않습니다")
        product_mask, coefficient = 0, Fraction(1)
        for j in chosen:
            product_mask, factor = place.field.monomial_product(product_mask, upper.kernel_basis[j])
            coefficient *= factor
        expansions.append((chosen, scale / coefficient))

    if is_infinite(place.prime):
        signs = []
        for chosen, scale in expansions:
            sign = 1 if scale > 0 else -1
            for j in chosen:
                sign *= place.signs[j]
            signs.append(sign)
        return LocalPlace(mapping.source, place.prime, index, tuple(signs))

    p = int(place.prime)
    context = PadicContext.initial(p, place.degree)
    cap = get_config().precision_cap
    while True:
        roots = [canonical_root(place.field.gen_product(m), p, context.precision) for m in upper.kernel_basis]
        signs, conclusive = [], True
        for (chosen, scale), mask in zip(expansions, lower.kernel_basis):
            value = PadicApprox.exact(p, scale)
            for j in chosen:
                value = value * roots[j].scale(place.signs[j])
            reference = canonical_root(lower_field.gen_product(mask), p, context.precision)
            sign = same_up_to_sign(value, reference)
            if sign == 0:
                conclusive = False
                break
            signs.append(sign)
        if conclusive:
            return LocalPlace(mapping.source, place.prime, index, tuple(signs))
        context = context.doubled(cap)
