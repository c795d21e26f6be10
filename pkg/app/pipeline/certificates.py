"""
4중 Massey 곱 <a, b, c, d> 의 정의 가능성/소멸 증명서

증명서는 α ∈ F_a, δ ∈ F_d 쌍이다.
  소멸:   N(α) ≡ b, N(δ) ≡ c (mod 제곱), Br(F_{a,d}) 에서 (α, δ) = 0
  정의됨: 노름 조건과 (α, δ) 가 Br(Q)[2] 의 상에 속함
"""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import count
from typing import List, Optional, Tuple, Union
import logging

from app.algebra.brauer import (
    BrauerClass2, corestriction, element_support, in_image_of_ground, rational_symbol,
    solve_symbol_system, symbol,
)
from app.algebra.etale import (
    EtaleAlgebra, EtaleElement, MonomialMap, prefix_embedding, quadratic_algebra,
    subalgebra_embedding,
)
from app.algebra.localfields import Prime, is_infinite, local_norm, places_above
from app.config import get_config
from app.errors import AlgebraMismatch, NoSolutionInSupport, NotAUnit
from app.solvers.conics import norm_certificate
from app.utils.arith import (
    Rational, SquareClass, prime_support, rational_sqrt, same_square_class, squarefree_class,
)

logger = logging.getLogger(__name__)

CERTIFICATE_CANDIDATES = 48


def as_class(value: Union[SquareClass, Rational]) -> SquareClass:
    return value if isinstance(value, SquareClass) else squarefree_class(value)


def normalize_inputs(a, b, c, d) -> Tuple[SquareClass, ...]:
    """무제곱 대표로 정규화"""
    return tuple(as_class(value) for value in (a, b, c, d))


def rebase(x: EtaleElement, generator: SquareClass) -> EtaleElement:
    """Q(√(g·s²)) 의 원소를 Q(√g) 로 옮긴다 (√(g s²) ↦ s·√g)"""
    target = quadratic_algebra(generator)
    if x.algebra == target:
        return x
    if x.algebra.n != 1:
        raise AlgebraMismatch(f"{x} 은(는) 이차 대수의 원소가 아닙니다")
    scale = rational_sqrt(x.algebra.generators[0] / target.generators[0])
    if scale is None:
        raise AlgebraMismatch(f"{x.algebra.label()} 와(과) {target.label()} 는 다른 대수입니다")
    return MonomialMap(x.algebra, target, ((1, scale),)).apply(x)


def biquadratic(a: SquareClass, d: SquareClass) -> EtaleAlgebra:
    return EtaleAlgebra((Fraction(int(a)), Fraction(int(d))))


def lift_pair(a: SquareClass, d: SquareClass, alpha: EtaleElement, delta: EtaleElement) -> Tuple[EtaleElement, EtaleElement]:
    """α ∈ F_a, δ ∈ F_d 를 F_{a,d} 로"""
    algebra = biquadratic(a, d)
    from_a = prefix_embedding(algebra, 1)
    from_d = MonomialMap(quadratic_algebra(d), algebra, ((0b10, Fraction(1)),))
    return from_a.apply(rebase(alpha, a)), from_d.apply(rebase(delta, d))


@dataclass(frozen=True)
class DefinedCertificate:
    """<a, b, c, d> 가 정의됨을 보이는 (α, δ)"""
    a: SquareClass
    b: SquareClass
    c: SquareClass
    d: SquareClass
    alpha: EtaleElement
    delta: EtaleElement


@dataclass
class CertificateReport:
    """증명서 검사 결과"""
    accepted: bool
    flags: List[str] = field(default_factory=list)
    symbol: Optional[BrauerClass2] = None


def _norm_flags(b: SquareClass, c: SquareClass, alpha: EtaleElement, delta: EtaleElement) -> List[str]:
    if not alpha.is_unit() or not delta.is_unit():
        raise NotAUnit("α, δ 는 가역원이어야 합니다")
    flags = []
    if not same_square_class(alpha.norm(), int(b)):
        flags.append("norm-b")
    if not same_square_class(delta.norm(), int(c)):
        flags.append("norm-c")
    return flags


def _certificate_symbol(a, d, alpha, delta) -> BrauerClass2:
    lifted_alpha, lifted_delta = lift_pair(a, d, alpha, delta)
    return symbol(lifted_alpha.algebra, lifted_alpha, lifted_delta)


def check_vanish_certificate(a, b, c, d, alpha: EtaleElement, delta: EtaleElement) -> CertificateReport:
    """소멸 조건 세 가지 검사"""
    a, b, c, d = normalize_inputs(a, b, c, d)
    flags = _norm_flags(b, c, rebase(alpha, a), rebase(delta, d))
    B = _certificate_symbol(a, d, alpha, delta)
    if not B.is_zero():
        flags.append("symbol")
    return CertificateReport(not flags, flags, B)


def check_defined_certificate(a, b, c, d, alpha: EtaleElement, delta: EtaleElement) -> CertificateReport:
    """노름 조건과 (α, δ) ∈ Im(Br(Q)[2] → Br(F_{a,d})[2])"""
    a, b, c, d = normalize_inputs(a, b, c, d)
    flags = _norm_flags(b, c, rebase(alpha, a), rebase(delta, d))
    B = _certificate_symbol(a, d, alpha, delta)
    if not in_image_of_ground(B):
        flags.append("image")
    return CertificateReport(not flags, flags, B)


def certificate_obstruction(a, b, c, d) -> Optional[str]:
    """(a, b) 나 (d, c) 가 0 이 아니면 노름 조건부터 풀 수 없다"""
    a, b, c, d = normalize_inputs(a, b, c, d)
    for first, second in ((a, b), (d, c)):
        B = rational_symbol(int(first), int(second))
        if not B.is_zero():
            return B.labels()[0]
    return None


def _small_squarefree():
    """1, -1, 2, -2, 3, -3, 5, ... 순서의 무제곱 정수"""
    yield 1
    for n in count(1):
        if n > 1 and squarefree_class(n).representative == n:
            yield n
        if squarefree_class(-n).representative == -n:
            yield -n


def _solve_x_base(a: SquareClass, c: SquareClass, alpha0: EtaleElement) -> Fraction:
    """Br(F_a) 에서 (α0·x, c) = 0 인 x"""
    F_a = alpha0.algebra
    target = symbol(F_a, alpha0, int(c))
    c_element = F_a.scalar(int(c))

    def rows_at(p: Prime):
        return [([local_norm(place, c_element)], target.invariant(place)) for place in places_above(F_a, p)]

    support = element_support(alpha0) | set(prime_support(int(c))) | set(prime_support(int(a)))
    return solve_symbol_system(1, rows_at, support)[0]


def _solve_y(a: SquareClass, b: SquareClass, d: SquareClass, alpha: EtaleElement, delta0: EtaleElement) -> Fraction:
    """F_d, F_ad 로의 코리스트릭션이 0 이 되도록 δ0 에 곱할 y"""
    lifted_alpha, lifted_delta = lift_pair(a, d, alpha, delta0)
    algebra = lifted_alpha.algebra
    B0 = symbol(algebra, lifted_alpha, lifted_delta)
    subfields = [subalgebra_embedding(algebra, [0b10]), subalgebra_embedding(algebra, [0b11])]
    targets = [corestriction(B0, mapping) for mapping in subfields]
    norms = [mapping.source.scalar(int(b)) for mapping in subfields]

    def rows_at(p: Prime):
        rows = []
        for mapping, target, norm in zip(subfields, targets, norms):
            for place in places_above(mapping.source, p):
                rows.append(([local_norm(place, norm)], target.invariant(place)))
        return rows

    support = element_support(delta0) | set(prime_support(int(b))) | set(prime_support(int(a) * int(d)))
    for target in targets:
        support |= {int(p) for p in target.primes() if not is_infinite(p)}
    return solve_symbol_system(1, rows_at, support)[0]


def search_defined_certificate(a, b, c, d, budget: Optional[int] = None) -> Optional[DefinedCertificate]:
    """x = n_c·n_ac, y = n_b·n_bd 꼴의 보정으로 증명서 탐색 (찾지 못하면 None)"""
    a, b, c, d = normalize_inputs(a, b, c, d)
    obstruction = certificate_obstruction(a, b, c, d)
    if obstruction is not None:
        logger.info(f"<{a}, {b}, {c}, {d}>: 노름 조건의 국소 장애물 {obstruction}")
        return None
    alpha0 = norm_certificate(int(a), int(b))
    delta0 = norm_certificate(int(d), int(c))
    if check_defined_certificate(a, b, c, d, alpha0, delta0).accepted:
        return DefinedCertificate(a, b, c, d, alpha0, delta0)

    try:
        x_base = _solve_x_base(a, c, alpha0)
    except NoSolutionInSupport as e:
        logger.debug(f"x 방정식 해 없음: {str(e)}")
        return None

    limit = max(1, min(budget if budget is not None else get_config().budget, CERTIFICATE_CANDIDATES))
    tried = 0
    F_a = alpha0.algebra
    for t in _small_squarefree():
        if tried >= limit:
            break
        if t != 1 and not symbol(F_a, t, int(c)).is_zero():
            continue
        tried += 1
        alpha = alpha0 * (x_base * t)
        try:
            y = _solve_y(a, b, d, alpha, delta0)
        except NoSolutionInSupport:
            logger.debug(f"x = {x_base * t}: y 방정식 해 없음")
            continue
        delta = delta0 * y
        if check_defined_certificate(a, b, c, d, alpha, delta).accepted:
            logger.info(f"<{a}, {b}, {c}, {d}>: 증명서 발견 (후보 {tried}개)")
            return DefinedCertificate(a, b, c, d, alpha, delta)
    logger.info(f"<{a}, {b}, {c}, {d}>: 예산 안에서 증명서를 찾지 못했습니다")
    return None
