"""
정의된 4중 Massey 곱의 소멸 증인 구성

정의 증명서 (α, δ) 에서 출발해 x ∈ Q×, ν ∈ F_a× 를 만들고
  (1) Br(F_{a,d}) 에서 (αx, δ) = (αx, ν)
  (2) N_{F_a/Q}(αx, ν) = 0
알버트 단계로 (αx, νy) = 0 인 y 를 얻어 증인 (αx, δy) 를 돌려준다.

x 와 ν 는 함수체 Q(x1, x2) 위의 f = x1² - c·x2², g = 2h/h2 를 유리점 P 에서
특수화해서 얻는다. P 는 h(P) = η 로 정해지고, η 는 보조점 P0 에서 계산한 상수 류
C ∈ Br(Q)[2] 가 (d, N(η)) 가 되도록 고른다.

참고: Q 위에서 정의된 곱은 어떤 홀수 차수 확대에서 소멸하면 Q 에서도 소멸한다.
이 모듈은 Q 에서 직접 증인을 만들므로 그 환원은 쓰지 않는다.

x, ν, y 는 제곱류의 작은 대표로 줄여서 쓴다. 분해 상한에 걸리면 다른 보조점과
η·z² 로 다시 시도한다.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import count, islice
from math import lcm
from typing import Dict, Iterator, List, Optional, Sequence, Tuple
import logging

from app.algebra.brauer import (
    BrauerClass2, corestriction, express_as_symbol, in_image_of_ground, rational_place, rational_symbol,
    solve_symbol_system, symbol,
)
from app.algebra.etale import (
    RATIONALS, EtaleAlgebra, EtaleElement, prefix_embedding, quadratic_algebra,
)
from app.algebra.localfields import Prime, is_infinite
from app.errors import (
    FactorizationBoundExceeded, NoCertificate, NotSplitByFa, PreconditionFailed,
    SearchBoundExceeded, VerificationFailed,
)
from app.funcfield.polynomials import BivariatePoly, BivariateRat
from app.funcfield.residues import (
    DivisorSpec, ResidueClass, norm_form_divisors, norm_residue, residue_symbol, restriction_class,
)
from app.funcfield.specialization import ParamSystem, specialize_class1
from app.pipeline.certificates import (
    DefinedCertificate, as_class, check_defined_certificate, check_vanish_certificate,
    certificate_obstruction, lift_pair, normalize_inputs, rebase, search_defined_certificate,
)
from app.solvers.conics import ConicPoint, find_conic_point, norm_certificate, solve_norm_equation
from app.solvers.qforms import AlbertResult, albert_find_y
from app.utils.arith import (
    SquareClass, is_rational_square, prime_support, rational_content, rational_sqrt, square_reduced,
    to_fraction,
)

logger = logging.getLogger(__name__)

AUXILIARY_RADIUS = 6
AUXILIARY_ATTEMPTS = 4
ETA_ATTEMPTS = 8


@dataclass(frozen=True)
class PipelineState:
    """구성에 쓰이는 데이터: α = α1² - c·α2², δ = u1 + u2·√d 와 K = Q(x1, x2) 위의 함수들"""
    a: SquareClass
    c: Fraction
    d: SquareClass
    alpha: EtaleElement
    delta: EtaleElement
    alpha1: EtaleElement
    alpha2: EtaleElement
    u1: Fraction
    u2: Fraction
    f_rational: BivariatePoly
    f: BivariatePoly
    h1: BivariatePoly
    h2: BivariatePoly
    h: BivariatePoly
    g: BivariateRat

    @property
    def field(self) -> EtaleAlgebra:
        return self.alpha.algebra

    def dependent(self) -> bool:
        """α1, α2 가 Q 위에서 일차종속"""
        p0, p1 = self.alpha1.coords
        q0, q1 = self.alpha2.coords
        return p0 * q1 - p1 * q0 == 0


def pipeline_state(a: SquareClass, c, d: SquareClass, alpha: EtaleElement, delta: EtaleElement) -> PipelineState:
    """전제 조건 확인 후 α1, α2 를 풀고 f, h1, h2, h, g 를 만든다"""
    c = to_fraction(c)
    alpha, delta = rebase(alpha, a), rebase(delta, d)
    if is_rational_square(c):
        raise PreconditionFailed(f"c = {c} 는 제곱이 아니어야 합니다")
    if delta.norm() != c:
        raise PreconditionFailed(f"N(δ) = {delta.norm()} ≠ c = {c}")

    F_a = alpha.algebra
    xi = solve_norm_equation(F_a.adjoin(c), alpha)
    alpha1, alpha2 = xi.split_last()
    u1, u2 = delta.coords
    if u1 * u1 == c:
        raise VerificationFailed("c = u1² 이 되어 h 가 퇴화합니다")

    from_q = prefix_embedding(F_a, 0)
    x1 = BivariatePoly.variable(F_a, 0)
    x2 = BivariatePoly.variable(F_a, 1)
    q1 = BivariatePoly.variable(RATIONALS, 0)
    q2 = BivariatePoly.variable(RATIONALS, 1)
    f_rational = q1 * q1 - q2 * q2 * c
    f = f_rational.map(from_q)
    h1 = x1 * alpha1 + x2 * (alpha2 * c)
    h2 = x2 * alpha1 + x1 * alpha2
    h = h1 + h2 * u1
    if f * alpha != h1 * h1 - h2 * h2 * c:
        raise VerificationFailed("항등식 αf = h1² - c·h2² 가 성립하지 않습니다")
    g = BivariateRat(h * 2, h2)
    return PipelineState(a, c, d, alpha, delta, alpha1, alpha2, u1, u2, f_rational, f, h1, h2, h, g)


def pipeline_divisors(state: PipelineState) -> Dict[str, List[DivisorSpec]]:
    """F_a 의 성분마다 D1 (f = 0), D2 (h2 = 0), D3 (h = 0)"""
    divisors: Dict[str, List[DivisorSpec]] = {"D1": [], "D2": [], "D3": []}
    for component in state.field.components():
        L, embed = component.field, component.embedding
        suffix = "" if len(state.field.components()) == 1 else f"@{component.index}"
        a1, a2 = embed.apply(state.alpha1), embed.apply(state.alpha2)
        divisors["D1"].extend(norm_form_divisors(L, state.c, f"D1{suffix}", embed))
        divisors["D2"].append(DivisorSpec.linear(L, 0, a2, a1, f"D2{suffix}", embed))
        divisors["D3"].append(DivisorSpec.linear(
            L, 0, a1 + a2 * state.u1, a2 * state.c + a1 * state.u1, f"D3{suffix}", embed))
    return divisors


@dataclass
class ResidueReport:
    """B = (αf, g) + (d, h) 의 잉여 검사"""
    d1_matches: bool
    d2_trivial: bool
    d3_trivial: bool
    corestriction_unramified: bool
    residues: Dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.d1_matches and self.d2_trivial and self.d3_trivial and self.corestriction_unramified


def residue_report(state: PipelineState) -> ResidueReport:
    """D2, D3 에서 비분기, D1 에서 잉여 2u1 + 2·x1/x2, 노름은 D1' 에서 비분기"""
    F_a = state.field
    alpha_f = BivariateRat.of(state.f * state.alpha)
    d_constant = BivariateRat.constant(F_a, int(state.d))
    h = BivariateRat.of(state.h)
    x1 = BivariatePoly.variable(F_a, 0)
    x2 = BivariatePoly.variable(F_a, 1)
    expected_d1 = BivariateRat(x1 * 2 + x2 * (2 * state.u1), x2)

    residues: Dict[str, str] = {}

    def B_residue(D: DivisorSpec) -> ResidueClass:
        value = residue_symbol(alpha_f, state.g, D) * residue_symbol(d_constant, h, D)
        residues[D.label] = str(value)
        return value

    divisors = pipeline_divisors(state)
    d1_matches = True
    base = EtaleAlgebra((state.c,))
    total: Optional[ResidueClass] = None
    for D in divisors["D1"]:
        value = B_residue(D)
        d1_matches = d1_matches and value.equals(restriction_class(expected_d1, D))
        pushed = norm_residue(value, base, D.base_map)
        total = pushed if total is None else total * pushed
    d2_trivial = all(B_residue(D).is_trivial() for D in divisors["D2"])
    d3_trivial = all(B_residue(D).is_trivial() for D in divisors["D3"])
    report = ResidueReport(d1_matches, d2_trivial, d3_trivial, total is not None and total.is_trivial(), residues)
    logger.debug(f"잉여 검사: {report}")
    return report


@dataclass
class ConstructionTrace:
    """구성의 중간 데이터"""
    alpha1: EtaleElement
    alpha2: EtaleElement
    u1: Fraction
    u2: Fraction
    route: str
    eta: Optional[EtaleElement] = None
    auxiliary_point: Optional[Tuple[int, int]] = None
    constant_class: List[str] = field(default_factory=list)
    point: Optional[Tuple[Fraction, Fraction]] = None
    order: Tuple[int, int] = (0, 1)
    x: Optional[Fraction] = None
    nu: Optional[EtaleElement] = None
    y: Optional[Fraction] = None


@dataclass
class XNuResult:
    x: Fraction
    nu: EtaleElement
    trace: ConstructionTrace


def verify_x_nu(a: SquareClass, d: SquareClass, alpha: EtaleElement, delta: EtaleElement,
                x: Fraction, nu: EtaleElement) -> bool:
    """(αx, δ) = (αx, ν) in Br(F_{a,d}) 이고 N_{F_a/Q}(αx, ν) = 0"""
    alpha_x = alpha * x
    lifted_alpha, lifted_delta = lift_pair(a, d, alpha_x, delta)
    lifted_nu, _ = lift_pair(a, d, nu, delta)
    algebra = lifted_alpha.algebra
    if symbol(algebra, lifted_alpha, lifted_delta) != symbol(algebra, lifted_alpha, lifted_nu):
        return False
    return corestriction(symbol(alpha.algebra, alpha_x, nu), RATIONALS).is_zero()


def _dependent_case(state: PipelineState) -> Fraction:
    """α = u·α_i² 인 u"""
    alpha1, alpha2 = state.alpha1, state.alpha2
    if alpha2.is_zero():
        return Fraction(1)
    ratio = _rational_ratio(alpha1, alpha2)
    if ratio is not None:
        return ratio * ratio - state.c
    ratio = _rational_ratio(alpha2, alpha1)
    return 1 - state.c * ratio * ratio


def _rational_ratio(x: EtaleElement, y: EtaleElement) -> Optional[Fraction]:
    """x = t·y 인 유리수 t"""
    pivot = next((k for k, value in enumerate(y.coords) if value), None)
    if pivot is None:
        return None
    t = x.coords[pivot] / y.coords[pivot]
    return t if x == y * t else None


def _spiral(radius: int) -> Iterator[Tuple[int, int]]:
    yield 0, 0
    for r in range(1, radius + 1):
        for i in range(-r, r + 1):
            for j in range(-r, r + 1):
                if max(abs(i), abs(j)) == r:
                    yield i, j


def _auxiliary_points(state: PipelineState) -> Iterator[Tuple[int, int]]:
    """f, h2, h 가 모두 정칙 가역인 작은 정수점들"""
    for i, j in _spiral(AUXILIARY_RADIUS):
        if state.f_rational.evaluate(i, j).coords[0] == 0:
            continue
        if state.h2.evaluate(i, j).is_unit() and state.h.evaluate(i, j).is_unit():
            yield i, j


def _constant_class(state: PipelineState, trace: ConstructionTrace) -> BrauerClass2:
    """보조점 P0 에서 C = N(αf(P0), g(P0)) + (d, N h(P0))"""
    F_a = state.field
    tried = 0
    for i, j in _auxiliary_points(state):
        if tried >= AUXILIARY_ATTEMPTS:
            break
        tried += 1
        f0 = state.f.evaluate(i, j)
        g0 = state.g.evaluate(i, j)
        h0 = state.h.evaluate(i, j)
        try:
            A = corestriction(symbol(F_a, state.alpha * f0, g0), RATIONALS) + rational_symbol(int(state.d), h0.norm())
        except FactorizationBoundExceeded as e:
            logger.warning(f"보조점 {(i, j)}: {str(e)}, 다음 점으로 재시도")
            continue
        trace.auxiliary_point = (i, j)
        trace.constant_class = A.labels()
        return A
    if tried == 0:
        raise SearchBoundExceeded("보조점을 찾지 못했습니다")
    raise FactorizationBoundExceeded(f"보조점 {tried}개 모두에서 분해 상한을 넘었습니다")


def _norm_adjustment(a: SquareClass, d: SquareClass, w: SquareClass) -> Fraction:
    """(d, m) = 0, (a, m) = (a, w) 인 m"""
    target = rational_symbol(int(a), int(w))

    def rows_at(p: Prime):
        return [([int(d)], 0), ([int(a)], target.invariant(rational_place(p)))]

    support = {int(p) for p in target.primes() if not is_infinite(p)}
    for value in (int(a), int(d), int(w)):
        support.update(prime_support(value))
    return solve_symbol_system(1, rows_at, support)[0]


def _recover_eta(state: PipelineState, trace: ConstructionTrace) -> EtaleElement:
    """C = (d, w) 의 w 를 F_d 의 노름 m 으로 보정해 F_a 의 노름 n = w·m 을 만들고 N(η) = n 인 η"""
    A = _constant_class(state, trace)
    if A.is_zero():
        return state.field.one()
    try:
        w = express_as_symbol(A, int(state.d))
    except NotSplitByFa as e:
        raise VerificationFailed(f"상수 류가 F_d 에서 분해되지 않습니다: {str(e)}")
    m = _norm_adjustment(state.a, state.d, w)
    n = square_reduced(int(w) * m)
    logger.debug(f"C = {A} = (d, {w}), m = {m}, n = {n}")
    eta = norm_certificate(int(state.a), n)
    if rational_symbol(int(state.d), eta.norm()) != A:
        raise VerificationFailed("(d, N η) ≠ C")
    return eta


def _eta_candidates(state: PipelineState, eta: EtaleElement) -> Iterator[EtaleElement]:
    """η·z² (z ∈ F_a): (d, N η) 는 그대로"""
    yield eta
    root = state.field.root(0)
    for k in count(1):
        for z in (root + k, root * k + 1, root - k):
            if z.is_unit():
                yield eta * z * z


def _solve_point(state: PipelineState, eta: EtaleElement) -> Tuple[Fraction, Fraction]:
    """(α1 + u1α2)·P1 + (u1α1 + cα2)·P2 = η"""
    v1 = state.alpha1 + state.alpha2 * state.u1
    v2 = state.alpha1 * state.u1 + state.alpha2 * state.c
    det = v1.coords[0] * v2.coords[1] - v2.coords[0] * v1.coords[1]
    if det == 0:
        raise VerificationFailed("h(P) = η 의 계수가 일차종속입니다")
    e0, e1 = eta.coords
    p1 = (e0 * v2.coords[1] - v2.coords[0] * e1) / det
    p2 = (v1.coords[0] * e1 - e0 * v1.coords[1]) / det
    if state.h.evaluate(p1, p2) != eta:
        raise VerificationFailed("h(P) ≠ η")
    return p1, p2


def _height(x: EtaleElement) -> int:
    return sum(c.numerator.bit_length() + c.denominator.bit_length() for c in x.coords)


def reduced_unit(x: EtaleElement, hints: Sequence[EtaleElement] = ()) -> EtaleElement:
    """x 와 같은 제곱류에서 계수가 작은 정수 좌표 대표

    hints 의 z 에 대해 x·z² 도 후보로 본다.
    """
    best = min([x] + [x * z * z for z in hints if z.is_unit()], key=_height)
    denominator = lcm(*(c.denominator for c in best.coords))
    integral = best * (denominator * denominator)
    content = rational_content(integral.coords)
    return integral * (square_reduced(content) / content)


def _x_nu_at(state: PipelineState, eta: EtaleElement, trace: ConstructionTrace) -> XNuResult:
    """h(P) = η 인 P 에서 x = s_P(f), ν = s_P(g)"""
    point = _solve_point(state, eta)
    hints = [state.h2.evaluate(*point), state.h.evaluate(*point)]
    ps = ParamSystem(point)
    for _ in range(2):
        x = square_reduced(specialize_class1(BivariateRat.of(state.f_rational), ps).rational_value())
        nu = reduced_unit(specialize_class1(state.g, ps), hints)
        if verify_x_nu(state.a, state.d, state.alpha, state.delta, x, nu):
            trace.eta, trace.point, trace.order, trace.x, trace.nu = eta, point, ps.order, x, nu
            logger.info(f"x = {x}, ν = {nu} (P = {point}, 순서 {ps.order})")
            return XNuResult(x, nu, trace)
        logger.warning(f"P = {point}, 순서 {ps.order} 에서 검증 실패, 매개변수 순서를 바꿔 재시도")
        ps = ps.swapped()
    raise VerificationFailed(f"P = {point} 의 두 매개변수 순서 모두 검증에 실패했습니다")


def x_nu_candidates(a, c, d, alpha: EtaleElement, delta: EtaleElement) -> Iterator[XNuResult]:
    """(1), (2) 를 만족하는 (x, ν) 들 (분해 상한이나 검증 실패는 다음 η 로 넘어간다)"""
    a, d = as_class(a), as_class(d)
    c = to_fraction(c)
    if is_rational_square(c):
        raise PreconditionFailed(f"c = {c} 는 제곱이 아니어야 합니다")
    lifted_alpha, lifted_delta = lift_pair(a, d, alpha, delta)
    if not in_image_of_ground(symbol(lifted_alpha.algebra, lifted_alpha, lifted_delta)):
        raise PreconditionFailed("(α, δ) 가 Br(Q)[2] 의 상에 속하지 않습니다")

    state = pipeline_state(a, c, d, alpha, delta)
    trace = ConstructionTrace(state.alpha1, state.alpha2, state.u1, state.u2, route="dependent")

    if state.dependent():
        x = square_reduced(_dependent_case(state))
        nu = state.field.one()
        trace.x, trace.nu = x, nu
        if not verify_x_nu(a, d, state.alpha, state.delta, x, nu):
            raise VerificationFailed("종속인 경우의 (x, ν) 검증 실패")
        yield XNuResult(x, nu, trace)
        return

    trace.route = "specialization"
    base_eta = _recover_eta(state, trace)
    for eta in islice(_eta_candidates(state, base_eta), ETA_ATTEMPTS):
        try:
            result = _x_nu_at(state, eta, trace)
        except (FactorizationBoundExceeded, VerificationFailed) as e:
            logger.warning(f"η = {eta}: {str(e)}, η·z² 로 재시도")
            continue
        yield result


def construct_x_nu(a, c, d, alpha: EtaleElement, delta: EtaleElement) -> XNuResult:
    """(1), (2) 를 만족하는 x ∈ Q×, ν ∈ F_a×"""
    for result in x_nu_candidates(a, c, d, alpha, delta):
        return result
    raise VerificationFailed(f"η 후보 {ETA_ATTEMPTS}개 모두 검증에 실패했습니다")


@dataclass
class Witness:
    """소멸 증인 (α', δ')

    albert 는 F_a 위의 X² - α'·Y² = ν·y 증명서, conic_point 는 F_{a,d} 위의
    X² = α'·Y² + δ'·Z² 의 점 (작은 높이 탐색에서 찾은 경우)이다.
    """
    a: SquareClass
    b: SquareClass
    c: SquareClass
    d: SquareClass
    alpha: EtaleElement
    delta: EtaleElement
    route: str
    trace: Optional[ConstructionTrace] = None
    albert: Optional[AlbertResult] = None
    conic_point: Optional[ConicPoint] = None

    def albert_holds(self) -> bool:
        albert = self.albert
        if albert is None or albert.X is None or albert.Y is None:
            return True
        nu = self.trace.nu if self.trace is not None and self.trace.nu is not None else self.alpha.algebra.one()
        return albert.X * albert.X - self.alpha * albert.Y * albert.Y == nu * albert.y

    def conic_point_holds(self) -> bool:
        point = self.conic_point
        if point is None:
            return True
        lifted_alpha, lifted_delta = lift_pair(self.a, self.d, self.alpha, self.delta)
        return point.pi == lifted_alpha and point.rho == lifted_delta and point.verify()

    def verify(self) -> bool:
        if not check_vanish_certificate(self.a, self.b, self.c, self.d, self.alpha, self.delta).accepted:
            return False
        return self.albert_holds() and self.conic_point_holds()


def _reduced_albert(albert: AlbertResult) -> AlbertResult:
    """y 를 작은 제곱류 대표로 바꾸고 (X, Y) 를 같은 비율로 늘린다"""
    y = square_reduced(albert.y)
    if y == albert.y:
        return albert
    scale = rational_sqrt(y / albert.y)
    if albert.X is None or albert.Y is None:
        return AlbertResult(y, route=albert.route)
    return AlbertResult(y, albert.X * scale, albert.Y * scale, albert.route)


def _attach_conic_point(witness: Witness) -> Witness:
    lifted_alpha, lifted_delta = lift_pair(witness.a, witness.d, witness.alpha, witness.delta)
    witness.conic_point = find_conic_point(lifted_alpha, lifted_delta)
    if witness.conic_point is None:
        logger.info(f"<{witness.a}, {witness.b}, {witness.c}, {witness.d}>: 작은 높이의 원뿔곡선 점 없음")
    return witness


def _general_witness(a: SquareClass, b: SquareClass, c: SquareClass, d: SquareClass,
                     certificate: DefinedCertificate) -> Witness:
    alpha, delta = rebase(certificate.alpha, a), rebase(certificate.delta, d)
    for result in x_nu_candidates(a, delta.norm(), d, alpha, delta):
        alpha_x = alpha * result.x
        try:
            albert = _reduced_albert(albert_find_y(a, alpha_x, result.nu))
            result.trace.y = albert.y
            witness = Witness(a, b, c, d, alpha_x, delta * albert.y, result.trace.route, result.trace, albert)
            if _attach_conic_point(witness).verify():
                return witness
            logger.warning(f"x = {result.x}: 증인 검증 실패, 다음 후보로 재시도")
        except FactorizationBoundExceeded as e:
            logger.warning(f"x = {result.x}: {str(e)}, 다음 후보로 재시도")
    raise VerificationFailed(f"<{a}, {b}, {c}, {d}>: 모든 (x, ν) 후보에서 증인 구성에 실패했습니다")


def vanish_witness(a, b, c, d, certificate: Optional[DefinedCertificate] = None,
                   budget: Optional[int] = None) -> Witness:
    """정의된 <a, b, c, d> 의 소멸 증인"""
    a, b, c, d = normalize_inputs(a, b, c, d)
    if certificate is None:
        certificate = search_defined_certificate(a, b, c, d, budget)
        if certificate is None:
            raise NoCertificate(f"<{a}, {b}, {c}, {d}>: 정의 증명서를 찾지 못했습니다",
                                obstruction=certificate_obstruction(a, b, c, d))
    else:
        report = check_defined_certificate(a, b, c, d, certificate.alpha, certificate.delta)
        if not report.accepted:
            raise NoCertificate(f"증명서가 거부되었습니다: {', '.join(report.flags)}")

    if c.is_trivial():
        F_a, F_d = quadratic_algebra(a), quadratic_algebra(d)
        alpha = solve_norm_equation(F_a, int(b), mod_squares=True)
        witness = _attach_conic_point(Witness(
            a, b, c, d, alpha, F_d.one(), "c-square",
            albert=AlbertResult(Fraction(1), F_a.one(), F_a.zero(), "trivial")))
        if not witness.verify():
            raise VerificationFailed(f"<{a}, {b}, {c}, {d}>: 증인 검증 실패")
    else:
        witness = _general_witness(a, b, c, d, certificate)
    logger.info(f"<{a}, {b}, {c}, {d}>: 증인 검증 완료 ({witness.route})")
    return witness
