"""
원뿔곡선의 유리점과 이차 단계의 노름 방정식
"""
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator, List, Optional, Tuple, Union
import logging

from sympy.solvers.diophantine.diophantine import ldescent

from app.algebra.brauer import chain_decompose, express_as_symbol, rational_symbol, symbol
from app.algebra.etale import (
    EtaleAlgebra, EtaleElement, MonomialMap, field_sqrt, from_components, is_square_with_witness,
    quadratic_algebra, to_components,
)
from app.algebra.localfields import INFINITY, hilbert_symbol_qp
from app.config import get_config
from app.errors import AlgebraMismatch, InvalidInput, NoSolution, SearchBoundExceeded, VerificationFailed
from app.utils.arith import (
    Rational, prime_support, rational_content, rational_sqrt, square_reduced, squarefree_class,
    to_fraction,
)

logger = logging.getLogger(__name__)

BRUTE_FORCE_STEPS = 400
MOD_SQUARES_RETRIES = 3
CONIC_POINT_ATTEMPTS = 400
CONIC_POINT_HEIGHT = 2


@dataclass(frozen=True)
class ConicSolution:
    """z² = a x² + b y² 의 자명하지 않은 해"""
    a: Fraction
    b: Fraction
    x: Fraction
    y: Fraction
    z: Fraction

    def verify(self) -> bool:
        nonzero = any((self.x, self.y, self.z))
        return nonzero and self.z * self.z == self.a * self.x * self.x + self.b * self.y * self.y


@dataclass(frozen=True)
class ConicOutcome:
    """해 또는 국소 장애물"""
    solution: Optional[ConicSolution] = None
    obstruction: Optional[str] = None

    @property
    def found(self) -> bool:
        return self.solution is not None


def _place_label(p) -> str:
    return "inf" if p == INFINITY else f"p={p}"


def conic_obstruction(a: Rational, b: Rational) -> Optional[str]:
    """(a, b)_v = -1 인 첫 자리 (소수 오름차순, 마지막에 ∞)"""
    primes = sorted({2} | set(prime_support(a)) | set(prime_support(b))) + [INFINITY]
    for p in primes:
        if hilbert_symbol_qp(a, b, p) == -1:
            return _place_label(p)
    return None


def _trivial_solution(a: Fraction, b: Fraction) -> Optional[ConicSolution]:
    root = rational_sqrt(a)
    if root is not None:
        return ConicSolution(a, b, Fraction(1), Fraction(0), root)
    root = rational_sqrt(b)
    if root is not None:
        return ConicSolution(a, b, Fraction(0), Fraction(1), root)
    root = rational_sqrt(-b / a)
    if root is not None:
        return ConicSolution(a, b, root, Fraction(1), Fraction(0))
    return None


def _small_search(a: Fraction, b: Fraction, steps: int) -> Optional[ConicSolution]:
    """높이 순서 (0,1), (1,0), (1,1), (0,2), ... 의 정수점 탐색"""
    count = 0
    height = 1
    while count < steps:
        for x in range(height + 1):
            for y in range(height + 1):
                if max(x, y) != height:
                    continue
                count += 1
                value = a * x * x + b * y * y
                root = rational_sqrt(value)
                if root is not None and value != 0:
                    return ConicSolution(a, b, Fraction(x), Fraction(y), root)
        height += 1
    return None


def _descent(a: Fraction, b: Fraction) -> Optional[ConicSolution]:
    """무제곱 부분에 르장드르 하강법 적용 후 되돌림"""
    A, B = int(squarefree_class(a)), int(squarefree_class(b))
    s, t = rational_sqrt(a / A), rational_sqrt(b / B)
    try:
        found = ldescent(A, B)
    except (ValueError, ZeroDivisionError) as e:
        logger.warning(f"ldescent({A}, {B}) 실패: {str(e)}")
        return None
    if found is None:
        return None
    w, x, y = (Fraction(int(value)) for value in found)
    return ConicSolution(a, b, x / s, y / t, w)


def solve_conic(a: Rational, b: Rational) -> ConicOutcome:
    """z² = a x² + b y² 의 유리점"""
    a, b = to_fraction(a), to_fraction(b)
    if a == 0 or b == 0:
        raise InvalidInput("원뿔곡선 계수는 0이 될 수 없습니다")
    solution = _trivial_solution(a, b)
    if solution is None:
        obstruction = conic_obstruction(a, b)
        if obstruction is not None:
            return ConicOutcome(obstruction=obstruction)
        solution = _small_search(a, b, min(BRUTE_FORCE_STEPS, get_config().budget))
    if solution is None:
        logger.debug(f"({a}, {b}): 작은 해가 없어 하강법 사용")
        solution = _descent(a, b)
    if solution is None:
        raise SearchBoundExceeded(f"({a}, {b}) 는 국소적으로 풀리지만 해를 찾지 못했습니다")
    if not solution.verify():
        raise VerificationFailed(f"원뿔곡선 해 검증 실패: {solution}")
    return ConicOutcome(solution=solution)


def norm_certificate(a: Rational, n: Rational) -> EtaleElement:
    """N_{Q(√a)/Q}(ξ) = n 인 ξ"""
    a, n = to_fraction(a), to_fraction(n)
    algebra = quadratic_algebra(a)
    root = rational_sqrt(n)
    if root is not None:
        return algebra.scalar(root)
    r = rational_sqrt(a)
    if r is not None:
        return algebra.element([(n + 1) / 2, (n - 1) / (2 * r)])
    outcome = solve_conic(a, n)
    if not outcome.found:
        raise NoSolution(f"{n} 은(는) Q(√{a}) 의 노름이 아닙니다", obstruction=outcome.obstruction)
    solution = outcome.solution
    # y = 0 이면 a 가 제곱이므로 위에서 처리됨
    xi = algebra.element([solution.z / solution.y, solution.x / solution.y])
    if xi.norm() != n:
        raise VerificationFailed(f"노름 증명서 검증 실패: N({xi}) ≠ {n}")
    return xi


def _split_solution(field: EtaleAlgebra, t: EtaleElement, root: EtaleElement) -> Tuple[EtaleElement, EtaleElement]:
    """s = r² 일 때 y0 = (t+1)/2, y1 = (t-1)/(2r)"""
    return (t + 1) * Fraction(1, 2), (t - 1) * (root * 2).inverse()


def _relative_gram(a: Fraction, c: Fraction, t0: Fraction, t1: Fraction) -> List[List[Fraction]]:
    """Φ = t1·Q1 - t0·Q2 의 그람 행렬, 변수 순서 (p, q, r, w)"""
    return [
        [t1, Fraction(0), -t0, Fraction(0)],
        [Fraction(0), -c * t1, Fraction(0), c * t0],
        [-t0, Fraction(0), a * t1, Fraction(0)],
        [Fraction(0), c * t0, Fraction(0), -a * c * t1],
    ]


def _relative_solution(field: EtaleAlgebra, c: Fraction, t: EtaleElement) -> Tuple[EtaleElement, EtaleElement]:
    """이차체 K0 = Q(√a) 위에서 y0² - c·y1² = t"""
    from app.solvers.qforms import isotropic_vector_gram

    a = field.generators[0]
    extension = field.adjoin(c)
    obstruction = symbol(field, c, t)
    if not obstruction.is_zero():
        raise NoSolution(f"{t} 은(는) {extension.label()} 의 노름이 아닙니다", obstruction=obstruction.labels()[0])

    t0, t1 = t.coords[0], t.coords[1]
    vector = isotropic_vector_gram(_relative_gram(a, c, t0, t1))
    if vector is None:
        raise SearchBoundExceeded(f"{extension.label()}: 노름 형식의 등방 벡터를 찾지 못했습니다")
    p, q, r, w = vector
    candidate = extension.element([p, r, q, w])
    ratio = candidate.norm_last() * t.inverse()
    if not ratio.is_rational():
        raise VerificationFailed("노름 비가 유리수가 아닙니다")
    scale = ratio.rational_value()

    # scale = n_c · n_ca 를 K0(√c)/K0 의 노름으로 실현
    if rational_sqrt(scale) is not None:
        beta = extension.scalar(rational_sqrt(scale))
    else:
        w_class = express_as_symbol(rational_symbol(c, scale), a)
        chain = chain_decompose(c, scale, a, int(w_class))
        from_c = MonomialMap(chain.xi_a.algebra, extension, ((0b10, Fraction(1)),))
        from_ca = MonomialMap(chain.xi_ab.algebra, extension, ((0b11, Fraction(1)),))
        beta = from_c.apply(chain.xi_a) * from_ca.apply(chain.xi_ab)
    xi = candidate * beta.inverse()
    return xi.split_last()


def _component_solution(field: EtaleAlgebra, c: Fraction, t: EtaleElement) -> Tuple[EtaleElement, EtaleElement]:
    if t.is_zero():
        raise InvalidInput("노름 방정식의 우변은 가역원이어야 합니다")
    root = field_sqrt(field.scalar(c))
    if root is not None:
        return _split_solution(field, t, root)
    if field.n == 0:
        xi = norm_certificate(c, t.coords[0])
        return field.scalar(xi.coords[0]), field.scalar(xi.coords[1])
    if field.n == 1:
        return _relative_solution(field, c, t)
    raise SearchBoundExceeded(f"{field.label()} 위의 노름 방정식은 지원하지 않습니다")


def _square_reduced_target(t: EtaleElement) -> EtaleElement:
    """t 의 유리 내용에서 제곱 부분을 뗀다"""
    content = rational_content(t.coords)
    return t * (square_reduced(content) / content)


def _small_square_factors(base: EtaleAlgebra) -> List[EtaleElement]:
    """목표에 곱해 볼 작은 가역원 z (z² 를 곱한다)"""
    factors = []
    for k in range(1, MOD_SQUARES_RETRIES + 1):
        for i in range(base.n):
            for z in (base.root(i) + k, base.root(i) * k + 1):
                if z.is_unit():
                    factors.append(z)
    return factors


def _solve_exact(algebra: EtaleAlgebra, base: EtaleAlgebra, target: EtaleElement) -> EtaleElement:
    c = algebra.generators[-1]
    parts0, parts1 = [], []
    for component in base.components():
        y0, y1 = _component_solution(component.field, c, component.embedding.apply(target))
        parts0.append(y0)
        parts1.append(y1)
    xi = algebra.from_parts(from_components(base, parts0), from_components(base, parts1))
    norm = xi.norm_last()
    if norm != target:
        raise VerificationFailed(f"노름 검증 실패: N({xi}) = {norm} ≠ {target}")
    return xi


def solve_norm_equation(
    algebra: EtaleAlgebra,
    t: Union[EtaleElement, Rational],
    mod_squares: bool = False,
) -> EtaleElement:
    """E = E0(√c) 에서 N_{E/E0}(ξ) = t 인 ξ

    mod_squares 이면 t 의 유리 제곱 인자를 떼고 풀며, 탐색이 한도에 걸리면
    작은 가역원 z 로 t·z² 를 다시 푼다. 결과는 t/N(ξ) 가 E0 의 제곱인 ξ 이다.
    """
    if algebra.n == 0:
        raise AlgebraMismatch("이차 단계가 필요합니다")
    base = algebra.prefix(algebra.n - 1)
    if not isinstance(t, EtaleElement):
        t = base.scalar(t)
    if t.algebra != base:
        raise AlgebraMismatch(f"{t} 은(는) {base.label()} 의 원소가 아닙니다")
    if not t.is_unit():
        raise InvalidInput(f"{t} 은(는) 가역원이 아닙니다")
    if not mod_squares:
        xi = _solve_exact(algebra, base, t)
        logger.debug(f"{algebra.label()} 노름 방정식 해: {xi}")
        return xi

    target = _square_reduced_target(t)
    candidates = [target] + [target * z * z for z in _small_square_factors(base)]
    for attempt, candidate in enumerate(candidates):
        try:
            xi = _solve_exact(algebra, base, candidate)
        except SearchBoundExceeded as e:
            if attempt + 1 == len(candidates):
                raise
            logger.debug(f"{candidate} 에서 탐색 한도 도달, 제곱 배로 재시도: {str(e)}")
            continue
        if not is_square_with_witness(t * xi.norm_last().inverse()).square:
            raise VerificationFailed("t/N(ξ) 가 제곱이 아닙니다")
        logger.debug(f"{algebra.label()} 노름 방정식 해 (제곱류, 시도 {attempt + 1}): {xi}")
        return xi
    raise SearchBoundExceeded(f"{t}: 노름 방정식을 풀지 못했습니다")


@dataclass(frozen=True)
class ConicPoint:
    """X² = π·Y² + ρ·Z² 의 해 (모든 성분에서 자명하지 않음)"""
    pi: EtaleElement
    rho: EtaleElement
    X: EtaleElement
    Y: EtaleElement
    Z: EtaleElement

    def verify(self) -> bool:
        if self.X * self.X != self.pi * self.Y * self.Y + self.rho * self.Z * self.Z:
            return False
        triples = zip(to_components(self.X), to_components(self.Y), to_components(self.Z))
        return all(not (x.is_zero() and y.is_zero() and z.is_zero()) for x, y, z in triples)


def _small_elements(algebra: EtaleAlgebra, height: int) -> Iterator[EtaleElement]:
    yield algebra.zero()
    for h in range(1, height + 1):
        for coords in product(range(-h, h + 1), repeat=algebra.dim):
            if max(abs(value) for value in coords) == h:
                yield algebra.element(coords)


def _componentwise_sqrt(x: EtaleElement) -> Optional[EtaleElement]:
    roots = []
    for value in to_components(x):
        root = value if value.is_zero() else field_sqrt(value)
        if root is None:
            return None
        roots.append(root)
    return from_components(x.algebra, roots)


def find_conic_point(pi: EtaleElement, rho: EtaleElement, budget: Optional[int] = None) -> Optional[ConicPoint]:
    """작은 높이의 Y 로 X² = π·Y² + ρ 를 탐색 (찾지 못하면 None)

    해가 있으면 (π, ρ) = 0 의 명시적 증명서가 된다. 없다고 해서 기호가 0이 아닌 것은 아니다.
    """
    algebra = pi.algebra
    if rho.algebra != algebra:
        raise AlgebraMismatch(f"{rho} 은(는) {algebra.label()} 의 원소가 아닙니다")
    one, zero = algebra.one(), algebra.zero()
    root = _componentwise_sqrt(pi)
    if root is not None:
        return ConicPoint(pi, rho, root, one, zero)
    limit = min(budget if budget is not None else get_config().budget, CONIC_POINT_ATTEMPTS)
    for tried, Y in enumerate(_small_elements(algebra, CONIC_POINT_HEIGHT)):
        if tried >= limit:
            break
        X = _componentwise_sqrt(pi * Y * Y + rho)
        if X is None:
            continue
        point = ConicPoint(pi, rho, X, Y, one)
        if point.verify():
            logger.debug(f"원뿔곡선 점 발견 (후보 {tried + 1}개): Y = {Y}")
            return point
    return None
