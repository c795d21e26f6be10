"""
유리수체와 이차체 위의 대각 이차형식

전이 사상은 s(x + y√a) = y 로 고정한다.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import List, Optional, Sequence, Tuple, Union
import logging

from app.algebra.brauer import (
    corestriction, element_support, solve_symbol_system, symbol,
)
from app.algebra.etale import EtaleAlgebra, EtaleElement, is_square_with_witness
from app.algebra.localfields import (
    INFINITY, Prime, hilbert_symbol_qp, is_infinite, is_local_square, local_norm, places_above,
)
from app.config import get_config
from app.errors import (
    InvalidInput, PreconditionFailed, SearchBoundExceeded, VerificationFailed,
)
from app.solvers.conics import norm_certificate, solve_conic
from app.utils.arith import Rational, SquareClass, prime_support, rational_sqrt, same_square_class, to_fraction

logger = logging.getLogger(__name__)

Vector = Tuple[Fraction, ...]


@dataclass(frozen=True)
class DiagonalForm:
    """유리수체 위의 대각형식 ⟨q1, ..., qn⟩ 과 원래 좌표에서의 대각 기저"""
    entries: Tuple[Fraction, ...]
    basis: Tuple[Vector, ...] = ()

    def __post_init__(self):
        entries = tuple(to_fraction(q) for q in self.entries)
        if any(q == 0 for q in entries):
            raise InvalidInput("대각 성분은 0이 될 수 없습니다")
        object.__setattr__(self, "entries", entries)
        if not self.basis:
            n = len(entries)
            identity = tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))
            object.__setattr__(self, "basis", identity)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def evaluate(self, vector: Sequence[Rational]) -> Fraction:
        return sum((q * to_fraction(x) ** 2 for q, x in zip(self.entries, vector)), Fraction(0))

    def to_original(self, vector: Sequence[Rational]) -> Vector:
        width = len(self.basis[0]) if self.basis else 0
        result = [Fraction(0)] * width
        for coefficient, basis_vector in zip(vector, self.basis):
            for k, value in enumerate(basis_vector):
                result[k] += to_fraction(coefficient) * value
        return tuple(result)

    def discriminant(self) -> Fraction:
        result = Fraction(1)
        for q in self.entries:
            result *= q
        return result

    def signature(self) -> int:
        return sum(1 if q > 0 else -1 for q in self.entries)

    def support(self) -> List[Prime]:
        primes = {2}
        for q in self.entries:
            primes.update(prime_support(q))
        return sorted(primes) + [INFINITY]


@dataclass(frozen=True)
class FieldForm:
    """이차체 F_a 위의 대각형식"""
    algebra: EtaleAlgebra
    entries: Tuple[EtaleElement, ...] = field(default_factory=tuple)


def _bilinear(gram: Sequence[Sequence[Fraction]], u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    n = len(gram)
    return sum((u[i] * gram[i][j] * v[j] for i in range(n) for j in range(n) if u[i] and v[j]), Fraction(0))


def _reduce(gram, stop_at_isotropic: bool):
    n = len(gram)
    gram = [[to_fraction(x) for x in row] for row in gram]
    remaining = [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    entries, basis = [], []
    while remaining:
        values = [_bilinear(gram, v, v) for v in remaining]
        if stop_at_isotropic:
            for v, value in zip(remaining, values):
                if value == 0:
                    return v
        index = next((i for i, value in enumerate(values) if value != 0), None)
        if index is None:
            head = remaining[0]
            partner = next((w for w in remaining[1:] if _bilinear(gram, head, w) != 0), None)
            if partner is None:
                raise InvalidInput("퇴화된 이차형식입니다")
            combined = tuple(x + y for x, y in zip(head, partner))
            if _bilinear(gram, combined, combined) == 0:
                combined = tuple(x - y for x, y in zip(head, partner))
            remaining[0] = combined
            continue
        pivot = remaining.pop(index)
        value = values[index]
        entries.append(value)
        basis.append(pivot)
        remaining = [
            tuple(x - (_bilinear(gram, w, pivot) / value) * y for x, y in zip(w, pivot))
            for w in remaining
        ]
    return DiagonalForm(tuple(entries), tuple(basis))


def diagonalize(gram: Sequence[Sequence[Rational]]) -> DiagonalForm:
    """대칭 그람 행렬의 대각화 (기저 추적)"""
    return _reduce(gram, stop_at_isotropic=False)


def hasse_invariant(entries: Sequence[Rational], p: Prime) -> int:
    result = 1
    for q1, q2 in combinations(entries, 2):
        result *= hilbert_symbol_qp(q1, q2, p)
    return result


def is_hyperbolic(form: DiagonalForm) -> bool:
    """차원, 부호수, 판별식, 하세 불변량이 쌍곡형식과 일치"""
    n = form.dim
    if n % 2 or form.signature() != 0:
        return False
    m = n // 2
    if rational_sqrt(form.discriminant() * (-1) ** m) is None:
        return False
    for p in form.support():
        expected = hilbert_symbol_qp(-1, -1, p) ** (m * (m - 1) // 2)
        if hasse_invariant(form.entries, p) != expected:
            return False
    return True


def is_locally_isotropic(entries: Sequence[Rational], p: Prime) -> bool:
    entries = [to_fraction(q) for q in entries]
    n = len(entries)
    if n < 2:
        return False
    if is_infinite(p):
        return any(q > 0 for q in entries) and any(q < 0 for q in entries)
    d = Fraction(1)
    for q in entries:
        d *= q
    eps = hasse_invariant(entries, p)
    if n == 2:
        return is_local_square(-d, p)
    if n == 3:
        return hilbert_symbol_qp(-1, -d, p) == eps
    if n == 4:
        return not is_local_square(d, p) or eps == hilbert_symbol_qp(-1, -1, p)
    return True


def local_obstruction(entries: Sequence[Rational]) -> Optional[str]:
    """국소적으로 비등방인 첫 자리"""
    form = DiagonalForm(tuple(entries))
    for p in form.support():
        if not is_locally_isotropic(form.entries, p):
            return "inf" if is_infinite(p) else f"p={p}"
    return None


def represents(form: DiagonalForm, r: Rational) -> bool:
    """r 이 form 의 값인지 (하세-민코프스키)"""
    r = to_fraction(r)
    if r == 0:
        return local_obstruction(form.entries) is None
    return local_obstruction(form.entries + (-r,)) is None


def _binary_vector(q1: Fraction, q2: Fraction) -> Optional[Vector]:
    root = rational_sqrt(-q2 / q1)
    if root is None:
        return None
    return (root, Fraction(1))


def _quaternary_vector(entries: Tuple[Fraction, ...]) -> Vector:
    q1, q2, q3, q4 = entries
    for i, j in combinations(range(4), 2):
        found = _binary_vector(entries[i], entries[j])
        if found is not None:
            vector = [Fraction(0)] * 4
            vector[i], vector[j] = found
            return tuple(vector)
    # ⟨q1,q2⟩ 가 r 을, ⟨q3,q4⟩ 가 -r 을 표현하는 r 을 GF(2) 로 구한다
    e1, e2 = -q2 / q1, -q4 / q3

    def rows_at(p: Prime):
        return [
            ([e1], 1 if hilbert_symbol_qp(e1, q1, p) == -1 else 0),
            ([e2], 1 if hilbert_symbol_qp(e2, -q3, p) == -1 else 0),
        ]

    support = set()
    for q in entries:
        support.update(prime_support(q))
    r = solve_symbol_system(1, rows_at, support)[0]
    first = norm_certificate(e1, r / q1)
    second = norm_certificate(e2, -r / q3)
    return (first.coords[0], first.coords[1], second.coords[0], second.coords[1])


def isotropic_vector(form: DiagonalForm) -> Optional[Vector]:
    """대각 좌표의 등방 벡터; 국소 장애물이 있을 때만 None"""
    entries = form.entries
    n = len(entries)
    if n > 6:
        raise InvalidInput("차원 6 이하의 형식만 지원합니다")
    if local_obstruction(entries) is not None:
        return None
    if n == 2:
        vector = _binary_vector(*entries)
    elif n == 3:
        q1, q2, q3 = entries
        outcome = solve_conic(-q1 / q3, -q2 / q3)
        if not outcome.found:
            return None
        s = outcome.solution
        vector = (s.x, s.y, s.z)
    elif n == 4:
        vector = _quaternary_vector(entries)
    else:
        vector = _higher_vector(entries)
    if vector is None or not any(vector) or form.evaluate(vector) != 0:
        raise VerificationFailed(f"등방 벡터 검증 실패: {entries}")
    return tuple(vector)


def _higher_vector(entries: Tuple[Fraction, ...]) -> Vector:
    n = len(entries)
    for indices in combinations(range(n), 4):
        sub = tuple(entries[i] for i in indices)
        if local_obstruction(sub) is None:
            found = _quaternary_vector(sub)
            vector = [Fraction(0)] * n
            for i, value in zip(indices, found):
                vector[i] = value
            return tuple(vector)
    # ⟨q1,q2,q3⟩ ⊥ ⟨r⟩ 가 등방인 r 을 나머지 성분의 값에서 찾는다
    head, tail = entries[:3], entries[3:]
    budget = get_config().budget
    count = 0
    height = 1
    while count < budget:
        for point in _points_of_height(len(tail), height):
            count += 1
            r = sum((q * x * x for q, x in zip(tail, point)), Fraction(0))
            if r == 0 or local_obstruction(head + (r,)) is not None:
                continue
            y = _quaternary_vector(head + (r,))
            return tuple(y[:3]) + tuple(y[3] * x for x in point)
        height += 1
    raise SearchBoundExceeded(f"{entries}: 예산 {budget} 안에서 등방 벡터를 찾지 못했습니다")


def _points_of_height(width: int, height: int):
    def rec(prefix):
        if len(prefix) == width:
            if max(abs(x) for x in prefix) == height:
                yield tuple(Fraction(x) for x in prefix)
            return
        for x in range(-height, height + 1):
            yield from rec(prefix + [x])
    yield from rec([])


def isotropic_vector_gram(gram: Sequence[Sequence[Rational]]) -> Optional[Vector]:
    """일반 대칭 그람 행렬의 등방 벡터 (원래 좌표)"""
    reduced = _reduce(gram, stop_at_isotropic=True)
    if not isinstance(reduced, DiagonalForm):
        return reduced
    vector = isotropic_vector(reduced)
    if vector is None:
        return None
    original = reduced.to_original(vector)
    if _bilinear([[to_fraction(x) for x in row] for row in gram], original, original) != 0:
        raise VerificationFailed("그람 등방 벡터 검증 실패")
    return original


def transfer(form: FieldForm) -> DiagonalForm:
    """s(x + y√a) = y 를 따른 전이 형식 (차원 두 배, 기저는 F_a 좌표)"""
    algebra = form.algebra
    if algebra.n != 1:
        raise InvalidInput("이차 대수 위의 형식이 필요합니다")
    a = algebra.generators[0]
    n = len(form.entries)
    entries, basis = [], []
    for i, entry in enumerate(form.entries):
        if entry.algebra != algebra or not entry.is_unit():
            raise InvalidInput(f"{entry} 은(는) {algebra.label()} 의 가역원이 아닙니다")
        l0, l1 = entry.coords

        def vector(c0, c1):
            coords = [Fraction(0)] * (2 * n)
            coords[2 * i], coords[2 * i + 1] = c0, c1
            return tuple(coords)

        if l1 != 0:
            entries += [l1, -entry.norm() / l1]
            basis += [vector(Fraction(1), Fraction(0)), vector(-l0 / l1, Fraction(1))]
        else:
            half = 1 / (2 * l0)
            entries += [Fraction(1), Fraction(-1)]
            basis += [vector(Fraction(1), half), vector(Fraction(1), -half)]
    logger.debug(f"전이 형식: {entries}, a = {a}")
    return DiagonalForm(tuple(entries), tuple(basis))


@dataclass(frozen=True)
class AlbertResult:
    """(π, μ·y) = 0 인 y 와 원뿔곡선 증명서 (μX)² - π(μY)² = μ·y"""
    y: Fraction
    X: Optional[EtaleElement] = None
    Y: Optional[EtaleElement] = None
    route: str = "trivial"


def albert_find_y(a: Union[SquareClass, Rational], pi: EtaleElement, mu: EtaleElement) -> AlbertResult:
    """N_{F_a/Q}(π, μ) = 0 일 때 (π, μy) = 0 in Br(F_a) 인 유리수 y"""
    algebra = pi.algebra
    a_value = Fraction(int(a)) if isinstance(a, SquareClass) else to_fraction(a)
    if algebra.n != 1 or mu.algebra != algebra or not same_square_class(algebra.generators[0], a_value):
        raise InvalidInput("π, μ 는 F_a 의 원소여야 합니다")
    if not corestriction(symbol(algebra, pi, mu), algebra.prefix(0)).is_zero():
        raise PreconditionFailed("(π, μ) 의 코리스트릭션이 0이 아닙니다")

    if is_square_with_witness(pi).square:
        return AlbertResult(Fraction(1))

    result = None
    if algebra.is_field():
        form = transfer(FieldForm(algebra, (mu, -(pi * mu))))
        vector = isotropic_vector(form)
        if vector is not None:
            x0, x1, y0, y1 = form.to_original(vector)
            X, Y = algebra.element([x0, x1]), algebra.element([y0, y1])
            value = mu * X * X - pi * mu * Y * Y
            if value.is_rational() and value.coords[0] != 0:
                result = AlbertResult(value.coords[0], mu * X, mu * Y, "transfer")
    if result is None:
        logger.warning(f"전이 형식 경로 실패, GF(2) 경로 사용: π = {pi}, μ = {mu}")
        result = AlbertResult(_albert_by_places(algebra, pi, mu), route="places")

    if not symbol(algebra, pi, mu * result.y).is_zero():
        raise VerificationFailed(f"(π, μ·{result.y}) ≠ 0")
    return result


def _albert_by_places(algebra: EtaleAlgebra, pi: EtaleElement, mu: EtaleElement) -> Fraction:
    """모든 자리 P 에서 (N_P π, y)_p = inv_P(π, μ)"""
    target = symbol(algebra, pi, mu)

    def rows_at(p: Prime):
        return [([local_norm(place, pi)], target.invariant(place)) for place in places_above(algebra, p)]

    support = element_support(pi) | element_support(mu)
    return solve_symbol_system(1, rows_at, support)[0]
