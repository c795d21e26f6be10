"""
다중이차 에탈 대수의 2-꼬임 브라우어 류

류는 자명하지 않은 국소 불변량을 갖는 자리들의 집합으로 저장한다.
모든 류의 상등은 불변량 벡터로만 판정한다.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union
import logging

from sympy import nextprime

from app.algebra.etale import (
    RATIONALS, EtaleAlgebra, EtaleElement, MonomialMap, prefix_embedding,
    quadratic_algebra, subalgebra_embedding, to_components,
)
from app.algebra.localfields import (
    INFINITY, LocalPlace, Prime, hilbert_symbol_qp, is_infinite, local_symbol,
    place_sort_key, places_above, restrict_place,
)
from app.config import get_config
from app.errors import (
    AlgebraMismatch, NoSolutionInSupport, NotAUnit, NotSplitByFa,
    PreconditionFailed, VerificationFailed,
)
from app.utils.arith import (
    Rational, SquareClass, prime_support, rational_content, squarefree_class, to_fraction,
)
from app.utils.f2_linear import solve_gf2

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BrauerClass2:
    """국소 불변량 벡터로 표현한 Br(E)[2] 의 원소"""
    algebra: EtaleAlgebra
    invariants: FrozenSet[LocalPlace] = field(default_factory=frozenset)

    @classmethod
    def zero(cls, algebra: EtaleAlgebra) -> "BrauerClass2":
        return cls(algebra, frozenset())

    def __add__(self, other: "BrauerClass2") -> "BrauerClass2":
        if other.algebra != self.algebra:
            raise AlgebraMismatch(f"{self.algebra.label()} 와(과) {other.algebra.label()} 의 류 덧셈")
        return BrauerClass2(self.algebra, self.invariants ^ other.invariants)

    def is_zero(self) -> bool:
        return not self.invariants

    def invariant(self, place: LocalPlace) -> int:
        return 1 if place in self.invariants else 0

    def primes(self) -> List[Prime]:
        return sorted({place.prime for place in self.invariants}, key=place_sort_key)

    def is_reciprocal(self) -> bool:
        """성분마다 자명하지 않은 불변량의 개수가 짝수"""
        counts = {}
        for place in self.invariants:
            counts[place.component] = counts.get(place.component, 0) + 1
        return all(count % 2 == 0 for count in counts.values())

    def labels(self) -> List[str]:
        ordered = sorted(self.invariants, key=lambda P: (place_sort_key(P.prime), P.component, P.signs))
        return [place.label() for place in ordered]

    def __str__(self) -> str:
        return "0" if self.is_zero() else "{" + ", ".join(self.labels()) + "}"


def rational_place(p: Prime) -> LocalPlace:
    return LocalPlace(RATIONALS, p)


def element_support(x: EtaleElement) -> Set[int]:
    """x 가 단원이 아닐 수 있는 소수들 (성분별 유리 내용, 원시 부분의 노름, 생성원)"""
    primes: Set[int] = set()
    for generator in x.algebra.generators:
        primes.update(prime_support(generator))
    for component, image in zip(x.algebra.components(), to_components(x)):
        if image.is_zero():
            raise NotAUnit(f"{x} 은(는) 가역원이 아닙니다")
        for generator in component.field.generators:
            primes.update(prime_support(generator))
        # 정수 생성원 위에서 원시 부분의 노름은 정수
        content = rational_content(image.coords)
        primes.update(prime_support(content))
        primes.update(prime_support((image * (1 / content)).norm()))
    return primes


def symbol_support(pi: EtaleElement, rho: EtaleElement) -> List[Prime]:
    primes = {2} | element_support(pi) | element_support(rho)
    return sorted(primes) + [INFINITY]


def rational_symbol(a: Rational, b: Rational) -> BrauerClass2:
    """Br(Q) 의 (a, b)"""
    a, b = to_fraction(a), to_fraction(b)
    if a == 0 or b == 0:
        raise NotAUnit("기호의 인자는 0이 될 수 없습니다")
    primes = sorted({2} | set(prime_support(a)) | set(prime_support(b))) + [INFINITY]
    nontrivial = frozenset(rational_place(p) for p in primes if hilbert_symbol_qp(a, b, p) == -1)
    return BrauerClass2(RATIONALS, nontrivial)


def _coerce(algebra: EtaleAlgebra, x: Union[EtaleElement, Rational]) -> EtaleElement:
    if isinstance(x, EtaleElement):
        if x.algebra != algebra:
            raise AlgebraMismatch(f"{x.algebra.label()} 원소를 {algebra.label()} 에서 사용")
        return x
    return algebra.scalar(x)


def symbol(algebra: EtaleAlgebra, pi: Union[EtaleElement, Rational], rho: Union[EtaleElement, Rational]) -> BrauerClass2:
    """사원수 기호 (π, ρ) 의 불변량 벡터"""
    pi, rho = _coerce(algebra, pi), _coerce(algebra, rho)
    if not pi.is_unit() or not rho.is_unit():
        raise NotAUnit(f"({pi}, {rho}): 가역원이 아닌 인자")
    if algebra.n == 0:
        return rational_symbol(pi.coords[0], rho.coords[0])
    nontrivial = set()
    for p in symbol_support(pi, rho):
        for place in places_above(algebra, p):
            if local_symbol(place, pi, rho) == -1:
                nontrivial.add(place)
    result = BrauerClass2(algebra, frozenset(nontrivial))
    logger.debug(f"{algebra.label()} 위의 기호 ({pi}, {rho}) = {result}")
    return result


def _upward_map(source: EtaleAlgebra, target: Union[EtaleAlgebra, MonomialMap]) -> MonomialMap:
    if isinstance(target, MonomialMap):
        if target.source != source:
            raise AlgebraMismatch("사상의 정의역이 류의 대수와 다릅니다")
        return target
    if target.generators[:source.n] != source.generators:
        raise AlgebraMismatch(f"{source.label()} 은(는) {target.label()} 의 접두 부분대수가 아닙니다")
    return prefix_embedding(target, source.n)


def _downward_map(target: EtaleAlgebra, base: Union[EtaleAlgebra, MonomialMap]) -> MonomialMap:
    if isinstance(base, MonomialMap):
        if base.target != target:
            raise AlgebraMismatch("사상의 공역이 류의 대수와 다릅니다")
        return base
    if target.generators[:base.n] != base.generators:
        raise AlgebraMismatch(f"{base.label()} 은(는) {target.label()} 의 접두 부분대수가 아닙니다")
    return prefix_embedding(target, base.n)


def restriction(B: BrauerClass2, target: Union[EtaleAlgebra, MonomialMap]) -> BrauerClass2:
    """기저 변환: 국소 차수가 홀수인 자리에서만 불변량이 살아남는다"""
    mapping = _upward_map(B.algebra, target)
    nontrivial = set()
    for p in B.primes():
        for place in places_above(mapping.target, p):
            below = restrict_place(place, mapping)
            if below in B.invariants and (place.degree // below.degree) % 2 == 1:
                nontrivial.add(place)
    return BrauerClass2(mapping.target, frozenset(nontrivial))


def corestriction(B: BrauerClass2, base: Union[EtaleAlgebra, MonomialMap]) -> BrauerClass2:
    """p 위 자리들의 불변량 합"""
    mapping = _downward_map(B.algebra, base)
    nontrivial: Set[LocalPlace] = set()
    for place in B.invariants:
        nontrivial ^= {restrict_place(place, mapping)}
    return BrauerClass2(mapping.source, frozenset(nontrivial))


def biquadratic_subalgebras(algebra: EtaleAlgebra) -> Tuple[MonomialMap, MonomialMap, MonomialMap]:
    """F_{a,d} 안의 F_a, F_d, F_ad"""
    if algebra.n != 2:
        raise AlgebraMismatch(f"생성원이 정확히 두 개여야 합니다: {algebra.label()}")
    return prefix_embedding(algebra, 1), subalgebra_embedding(algebra, [0b10]), subalgebra_embedding(algebra, [0b11])


def in_image_of_ground(B: BrauerClass2) -> bool:
    """F_a, F_d, F_ad 로의 코리스트릭션이 모두 0"""
    return all(corestriction(B, mapping).is_zero() for mapping in biquadratic_subalgebras(B.algebra))


def ground_preimage(B: BrauerClass2) -> Optional[BrauerClass2]:
    """res(A) = B 인 A ∈ Br(Q)[2] (없으면 None)"""
    algebra = B.algebra
    mapping = prefix_embedding(algebra, 0)
    chosen: Set[LocalPlace] = set()
    free_primes: List[Prime] = []
    for p in sorted({2} | {q for q in B.primes() if not is_infinite(q)}) + [INFINITY]:
        places = places_above(algebra, p)
        odd = [P for P in places if P.degree == 1]
        even = [P for P in places if P.degree > 1]
        if any(P in B.invariants for P in even):
            return None
        bits = {B.invariant(P) for P in odd}
        if len(bits) > 1:
            return None
        if not odd:
            free_primes.append(p)
        elif bits == {1}:
            chosen.add(rational_place(p))
    if len(chosen) % 2:
        # 모든 자리의 국소 차수가 짝수인 소수에 불변량을 하나 더 둔다
        candidate = free_primes[0] if free_primes else None
        q = 2
        while candidate is None:
            q = int(nextprime(q))
            if all(P.degree > 1 for P in places_above(algebra, q)):
                candidate = q
        chosen.add(rational_place(candidate))
    preimage = BrauerClass2(RATIONALS, frozenset(chosen))
    if restriction(preimage, mapping.target) != B:
        return None
    return preimage


RowBuilder = Callable[[Prime], List[Tuple[Sequence[Optional[Rational]], int]]]


def solve_symbol_system(count: int, rows_at: RowBuilder, support: Iterable[int]) -> List[Fraction]:
    """유리수 미지수 y_k 에 대해 Σ_k (e_k, y_k)_v = 목표 비트 를 모든 자리에서 푼다

    rows_at(p) 는 자리 p 의 조건 목록 (미지수별 첫 인자 e_k 또는 None, 목표 비트) 을 돌려준다.
    해가 없으면 지지 집합을 다음 소수들로 넓힌다.
    """
    primes = sorted(set(support) | {2})
    extra_budget = get_config().extra_primes
    next_candidate = 2
    for attempt in range(extra_budget + 1):
        generators: List[Fraction] = [Fraction(-1)] + [Fraction(p) for p in primes]
        width = count * len(generators)
        matrix, targets = [], []
        for p in primes + [INFINITY]:
            for first_args, target in rows_at(p):
                row = [0] * width
                for k, e in enumerate(first_args):
                    if e is None:
                        continue
                    for s, g in enumerate(generators):
                        if hilbert_symbol_qp(e, g, p) == -1:
                            row[k * len(generators) + s] = 1
                matrix.append(row)
                targets.append(target)
        solution = solve_gf2(matrix, targets, width)
        if solution is not None:
            values = []
            for k in range(count):
                value = Fraction(1)
                for s, g in enumerate(generators):
                    if solution[k * len(generators) + s]:
                        value *= g
                values.append(value)
            logger.debug(f"기호 연립방정식 해: 지지 {primes}, 시도 {attempt + 1}")
            return values
        while next_candidate in primes:
            next_candidate = int(nextprime(next_candidate))
        primes = sorted(primes + [next_candidate])
        logger.debug(f"지지 집합 확장: {next_candidate} 추가")
    raise NoSolutionInSupport(f"지지 집합 {primes} 안에서 해가 없습니다")


def express_as_symbol(A: BrauerClass2, a: Union[SquareClass, Rational]) -> SquareClass:
    """A = (a, u) 인 u"""
    if A.algebra != RATIONALS:
        raise AlgebraMismatch("유리수체 위의 류가 필요합니다")
    a_value = Fraction(int(a)) if isinstance(a, SquareClass) else to_fraction(a)
    if not restriction(A, quadratic_algebra(a_value)).is_zero():
        raise NotSplitByFa(f"{A} 은(는) F_{a_value} 에서 분해되지 않습니다")
    if A.is_zero():
        return SquareClass(1)

    def rows_at(p: Prime):
        return [([a_value], A.invariant(rational_place(p)))]

    support = {int(p) for p in A.primes() if not is_infinite(p)} | set(prime_support(a_value))
    u = squarefree_class(solve_symbol_system(1, rows_at, support)[0])
    if rational_symbol(a_value, int(u)) != A:
        raise VerificationFailed(f"({a_value}, {u}) ≠ {A}")
    return u


@dataclass(frozen=True)
class ChainDecomposition:
    """u = n_a·n_ab, v = n_b·n_ab 와 각 인자의 노름 증명서"""
    a: Fraction
    b: Fraction
    n_a: Fraction
    n_b: Fraction
    n_ab: Fraction
    xi_a: EtaleElement
    xi_b: EtaleElement
    xi_ab: EtaleElement

    def verify(self, u: Rational, v: Rational) -> bool:
        return (
            self.xi_a.norm() == self.n_a
            and self.xi_b.norm() == self.n_b
            and self.xi_ab.norm() == self.n_ab
            and self.n_a * self.n_ab == to_fraction(u)
            and self.n_b * self.n_ab == to_fraction(v)
        )


def chain_decompose(a: Union[SquareClass, Rational], u: Rational, b: Union[SquareClass, Rational], v: Rational) -> ChainDecomposition:
    """(a, u) = (b, v) 일 때 u = n_a n_ab, v = n_b n_ab 로 분해"""
    # conics 가 이 모듈을 사용하므로 지연 import
    from app.solvers.conics import norm_certificate

    a = Fraction(int(a)) if isinstance(a, SquareClass) else to_fraction(a)
    b = Fraction(int(b)) if isinstance(b, SquareClass) else to_fraction(b)
    u, v = to_fraction(u), to_fraction(v)
    if rational_symbol(a, u) != rational_symbol(b, v):
        raise PreconditionFailed(f"({a}, {u}) ≠ ({b}, {v})")

    if squarefree_class(a) == squarefree_class(b):
        n_ab = u
    elif rational_symbol(a, u).is_zero():
        n_ab = Fraction(1)
    else:
        def rows_at(p: Prime):
            return [
                ([a], rational_symbol(a, u).invariant(rational_place(p))),
                ([b], rational_symbol(b, v).invariant(rational_place(p))),
            ]

        support = set(prime_support(a)) | set(prime_support(b)) | set(prime_support(u)) | set(prime_support(v))
        n_ab = solve_symbol_system(1, rows_at, support)[0]

    n_a, n_b = u / n_ab, v / n_ab
    decomposition = ChainDecomposition(
        a, b, n_a, n_b, n_ab,
        norm_certificate(a, n_a), norm_certificate(b, n_b), norm_certificate(a * b, n_ab),
    )
    if not decomposition.verify(u, v):
        raise VerificationFailed("사슬 분해 검증 실패")
    return decomposition


def comes_from_ac_check(a: Rational, rho: EtaleElement, b: Rational, mu: EtaleElement) -> bool:
    """N ρ = N μ, D = Tr ρ + Tr μ ≠ 0 일 때 Br(F_b) 에서 (μ, a) = (D, a)"""
    if rho.norm() != mu.norm():
        raise PreconditionFailed("두 원소의 노름이 다릅니다")
    total = rho.trace() + mu.trace()
    if total == 0:
        raise PreconditionFailed("대각합의 합이 0입니다")
    algebra = mu.algebra
    if algebra.generators != (to_fraction(b),):
        raise AlgebraMismatch(f"μ 는 F_{b} 의 원소여야 합니다")
    return symbol(algebra, mu, to_fraction(a)) == symbol(algebra, total, to_fraction(a))
