from dataclasses import dataclass
from random import Random
from typing import Any, Callable, Dict, List, Optional, Sequence
import json
import logging

from pydantic import BaseModel, ValidationError

from app.algebra.brauer import symbol
from app.algebra.etale import EtaleAlgebra, EtaleElement, quadratic_algebra
from app.algebra.localfields import INFINITY, local_symbol, places_above
from app.config import SolverConfig, use_config
from app.errors import InvalidInput, MasseyError, NoSolution
from app.funcfield.polynomials import parse_rational_function
from app.funcfield.specialization import ParamSystem, specialize_class1, specialize_class2
from app.models.massey_data import (
    PAYLOADS, CertificateModel, CommandType, ConfigOverrides, ConicPayload, GeneratePayload,
    JobSpec, LocalInvariantPayload, NormEquationPayload, QuadruplePayload, ResultDocument,
    SpecializePayload, SymbolPayload, TraceModel, WitnessModel,
)
from app.pipeline.certificates import (
    DefinedCertificate, as_class, check_defined_certificate, check_vanish_certificate,
    normalize_inputs, rebase,
)
from app.pipeline.construction import (
    ConstructionTrace, Witness, pipeline_state, residue_report, vanish_witness,
)
from app.pipeline.instances import generate_instance
from app.solvers.conics import solve_conic, solve_norm_equation
from app.utils.arith import format_rational, parse_rational, same_square_class, squarefree_class

logger = logging.getLogger(__name__)


@dataclass
class Outcome:
    """명령 처리 결과"""
    result: Dict[str, Any]
    exit_code: int = 0
    obstruction: Optional[str] = None


Handler = Callable[[BaseModel, SolverConfig], Outcome]
HANDLERS: Dict[CommandType, Handler] = {}


def command(kind: CommandType):
    """명령 처리 함수 등록"""
    def register(handler: Handler) -> Handler:
        HANDLERS[kind] = handler
        return handler
    return register


# 입력 변환
def parse_algebra(generators: Sequence[str]) -> EtaleAlgebra:
    return EtaleAlgebra(tuple(parse_rational(g) for g in generators))


def parse_element(algebra: EtaleAlgebra, text: str) -> EtaleElement:
    """"c0,c1,..." 좌표 또는 유리수 하나"""
    parts = [part.strip() for part in text.split(",")]
    if len(parts) == 1:
        return algebra.scalar(parse_rational(parts[0]))
    return algebra.element(parts)


def _certificate_elements(payload: QuadruplePayload):
    if payload.alpha is None or payload.delta is None:
        raise InvalidInput("alpha 와 delta 가 모두 필요합니다")
    a, b, c, d = normalize_inputs(*(parse_rational(v) for v in (payload.a, payload.b, payload.c, payload.d)))
    alpha = parse_element(quadratic_algebra(a), payload.alpha)
    delta = parse_element(quadratic_algebra(d), payload.delta)
    return a, b, c, d, alpha, delta


# 출력 변환
def certificate_model(certificate: DefinedCertificate) -> CertificateModel:
    return CertificateModel(
        a=int(certificate.a), b=int(certificate.b), c=int(certificate.c), d=int(certificate.d),
        alpha=rebase(certificate.alpha, certificate.a).to_strings(),
        delta=rebase(certificate.delta, certificate.d).to_strings(),
    )


def trace_model(trace: ConstructionTrace) -> TraceModel:
    return TraceModel(
        route=trace.route,
        alpha1=trace.alpha1.to_strings(),
        alpha2=trace.alpha2.to_strings(),
        u1=format_rational(trace.u1),
        u2=format_rational(trace.u2),
        eta=trace.eta.to_strings() if trace.eta is not None else None,
        auxiliary_point=list(trace.auxiliary_point) if trace.auxiliary_point is not None else None,
        constant_class=list(trace.constant_class),
        point=[format_rational(p) for p in trace.point] if trace.point is not None else None,
        order=list(trace.order),
        x=format_rational(trace.x) if trace.x is not None else None,
        nu=trace.nu.to_strings() if trace.nu is not None else None,
        y=format_rational(trace.y) if trace.y is not None else None,
    )


def witness_model(witness: Witness, include_trace: bool) -> WitnessModel:
    albert = witness.albert
    albert_certificate = None
    if albert is not None and albert.X is not None and albert.Y is not None:
        albert_certificate = [albert.X.to_strings(), albert.Y.to_strings()]
    point = witness.conic_point
    conic_point = [point.X.to_strings(), point.Y.to_strings(), point.Z.to_strings()] if point is not None else None
    return WitnessModel(
        a=int(witness.a), b=int(witness.b), c=int(witness.c), d=int(witness.d),
        alpha=witness.alpha.to_strings(),
        delta=witness.delta.to_strings(),
        route=witness.route,
        albert_route=albert.route if albert is not None else None,
        albert_certificate=albert_certificate,
        conic_point=conic_point,
        verified=witness.verify(),
        trace=trace_model(witness.trace) if include_trace and witness.trace is not None else None,
    )


# 명령 처리
@command(CommandType.SYMBOL)
def symbol_command(payload: SymbolPayload, config: SolverConfig) -> Outcome:
    """(π, ρ) 의 모든 자명하지 않은 국소 불변량"""
    algebra = parse_algebra(payload.generators)
    B = symbol(algebra, parse_element(algebra, payload.pi), parse_element(algebra, payload.rho))
    return Outcome({
        "algebra": algebra.label(),
        "invariants": B.labels(),
        "zero": B.is_zero(),
        "reciprocal": B.is_reciprocal(),
    })


@command(CommandType.LOCAL_INV)
def local_invariant_command(payload: LocalInvariantPayload, config: SolverConfig) -> Outcome:
    """한 소수 위의 자리별 불변량"""
    algebra = parse_algebra(payload.generators)
    pi, rho = parse_element(algebra, payload.pi), parse_element(algebra, payload.rho)
    prime = INFINITY if payload.prime == "inf" else int(payload.prime)
    places = []
    for place in places_above(algebra, prime):
        places.append({
            "place": place.label(),
            "degree": place.degree,
            "invariant": 0 if local_symbol(place, pi, rho) == 1 else 1,
        })
    return Outcome({"algebra": algebra.label(), "prime": str(prime), "places": places})


@command(CommandType.CONIC)
def conic_command(payload: ConicPayload, config: SolverConfig) -> Outcome:
    """z² = a·x² + b·y² 의 해 또는 장애물"""
    outcome = solve_conic(parse_rational(payload.a), parse_rational(payload.b))
    if not outcome.found:
        raise NoSolution(f"({payload.a}, {payload.b}) 원뿔곡선에 유리점이 없습니다", obstruction=outcome.obstruction)
    solution = outcome.solution
    return Outcome({
        "x": format_rational(solution.x),
        "y": format_rational(solution.y),
        "z": format_rational(solution.z),
    })


@command(CommandType.NORM_EQ)
def norm_equation_command(payload: NormEquationPayload, config: SolverConfig) -> Outcome:
    """E = E0(√c) 에서 N(ξ) = t"""
    algebra = parse_algebra(payload.generators)
    t = parse_element(algebra.prefix(algebra.n - 1), payload.t)
    xi = solve_norm_equation(algebra, t, mod_squares=payload.mod_squares)
    return Outcome({
        "algebra": algebra.label(),
        "xi": xi.to_strings(),
        "norm": xi.norm_last().to_strings(),
    })


@command(CommandType.DEFINED_CHECK)
def defined_check_command(payload: QuadruplePayload, config: SolverConfig) -> Outcome:
    """정의 증명서 검사"""
    a, b, c, d, alpha, delta = _certificate_elements(payload)
    report = check_defined_certificate(a, b, c, d, alpha, delta)
    result = {"accepted": report.accepted, "flags": report.flags, "symbol": report.symbol.labels()}
    if report.accepted:
        return Outcome(result)
    return Outcome(result, exit_code=1, obstruction=report.flags[0])


@command(CommandType.VERIFY)
def verify_command(payload: QuadruplePayload, config: SolverConfig) -> Outcome:
    """소멸 증인 검사"""
    a, b, c, d, alpha, delta = _certificate_elements(payload)
    report = check_vanish_certificate(a, b, c, d, alpha, delta)
    result = {"accepted": report.accepted, "flags": report.flags, "symbol": report.symbol.labels()}
    if report.accepted:
        return Outcome(result)
    return Outcome(result, exit_code=1, obstruction=report.flags[0])


@command(CommandType.WITNESS)
def witness_command(payload: QuadruplePayload, config: SolverConfig) -> Outcome:
    """정의 증명서에서 소멸 증인 구성"""
    certificate = None
    if payload.alpha is not None or payload.delta is not None:
        certificate = DefinedCertificate(*_certificate_elements(payload))
    values = (parse_rational(v) for v in (payload.a, payload.b, payload.c, payload.d))
    witness = vanish_witness(*values, certificate=certificate, budget=config.budget)
    return Outcome(witness_model(witness, config.trace).model_dump())


@command(CommandType.RESIDUES)
def residues_command(payload: QuadruplePayload, config: SolverConfig) -> Outcome:
    """파이프라인 1-3 단계의 잉여 검사"""
    a, b, c, d, alpha, delta = _certificate_elements(payload)
    if not same_square_class(delta.norm(), int(c)):
        raise InvalidInput(f"N(δ) = {format_rational(delta.norm())} 이(가) c 와 다른 제곱류입니다")
    report = residue_report(pipeline_state(a, delta.norm(), d, alpha, delta))
    checks = {
        "d1_matches": report.d1_matches,
        "d2_trivial": report.d2_trivial,
        "d3_trivial": report.d3_trivial,
        "corestriction_unramified": report.corestriction_unramified,
    }
    result = {**checks, "passed": report.passed, "residues": report.residues}
    if report.passed:
        return Outcome(result)
    return Outcome(result, exit_code=1, obstruction=next(name for name, ok in checks.items() if not ok))


@command(CommandType.SPECIALIZE)
def specialize_command(payload: SpecializePayload, config: SolverConfig) -> Outcome:
    """s_{P,π}(f) 와 선택적으로 s_{P,π}(f, g)"""
    algebra = parse_algebra(payload.generators)
    ps = ParamSystem.at(*(parse_rational(p) for p in payload.point))
    if payload.swapped:
        ps = ps.swapped()
    f = parse_rational_function(payload.f, algebra)
    value = specialize_class1(f, ps)
    result: Dict[str, Any] = {"algebra": algebra.label(), "order": list(ps.order), "value": value.to_strings()}
    if value.is_rational():
        result["square_class"] = int(squarefree_class(value.rational_value()))
    if payload.g is not None:
        g = parse_rational_function(payload.g, algebra)
        result["symbol"] = specialize_class2(f, g, ps).labels()
    return Outcome(result)


@command(CommandType.GENERATE)
def generate_command(payload: GeneratePayload, config: SolverConfig) -> Outcome:
    """시드 고정 무작위 인스턴스와 정의 증명서"""
    rng = Random(config.seed)
    instances = [
        certificate_model(generate_instance(rng, nonsquare_c=payload.nonsquare_c)).model_dump()
        for _ in range(payload.count)
    ]
    return Outcome({"seed": config.seed, "instances": instances})


# 작업 실행
def resolve_config(base: SolverConfig, overrides: Optional[ConfigOverrides]) -> SolverConfig:
    if overrides is None:
        return base
    return base.model_copy(update=overrides.model_dump(exclude_none=True))


def _config_summary(config: SolverConfig) -> Dict[str, Any]:
    summary = config.model_dump(exclude={"jobs"})
    summary["factor_bound"] = str(config.factor_bound)
    return summary


def run(job: JobSpec, base: Optional[SolverConfig] = None) -> ResultDocument:
    """한 작업을 실행해 결과 문서로"""
    config = resolve_config(base or SolverConfig(), job.config)
    name = job.command.value
    document = ResultDocument(command=name, config=_config_summary(config))
    with use_config(config):
        try:
            payload = PAYLOADS[job.command].model_validate(job.payload)
            outcome = HANDLERS[job.command](payload, config)
            document.result = outcome.result
            document.exit_code = outcome.exit_code
            document.obstruction = outcome.obstruction
            document.status = "ok" if outcome.exit_code == 0 else "negative"
        except ValidationError as e:
            document.status, document.exit_code = "invalid", 3
            document.error = f"입력 검증 실패: {e.error_count()}개 오류 ({e.errors()[0]['msg']})"
        except MasseyError as e:
            document.status, document.exit_code = e.status, e.exit_code
            document.error = str(e)
            document.obstruction = e.obstruction
        except Exception as e:
            logger.error(f"{name} 실행 중 오류: {str(e)}")
            document.status, document.exit_code = "exhausted", 2
            document.error = f"{type(e).__name__}: {str(e)}"
    logger.info(f"{name}: {document.status} (exit {document.exit_code})")
    return document


def invalid_document(command_name: str, message: str) -> ResultDocument:
    return ResultDocument(command=command_name, status="invalid", exit_code=3, error=message)


def job_from_args(command_name: str, args: List[str]) -> JobSpec:
    """위치 인자는 선언 순서대로, key=value 는 이름으로 채운다"""
    kind = CommandType(command_name)
    fields = list(PAYLOADS[kind].model_fields)
    payload: Dict[str, Any] = {}
    position = 0
    for arg in args:
        key, sep, value = arg.partition("=")
        if sep and key in fields:
            payload[key] = value
            continue
        while position < len(fields) and fields[position] in payload:
            position += 1
        if position >= len(fields):
            raise InvalidInput(f"{command_name}: 인자가 너무 많습니다 ({arg})")
        payload[fields[position]] = arg
        position += 1
    return JobSpec(command=kind, payload=payload)


def execute_line(line: str, base: Dict[str, Any]) -> Dict[str, Any]:
    """JSON 한 줄 작업 실행 (프로세스 풀에서 호출)"""
    config = SolverConfig(**base)
    try:
        job = JobSpec.model_validate_json(line)
    except ValidationError as e:
        try:
            raw = json.loads(line)
            name = str(raw.get("command", "?")) if isinstance(raw, dict) else "?"
        except ValueError:
            name = "?"
        return invalid_document(name, f"작업 형식 오류: {e.errors()[0]['msg']}").model_dump()
    return run(job, config).model_dump()


def execute_args(command_name: str, args: List[str], base: Dict[str, Any]) -> Dict[str, Any]:
    """명령줄 인자 작업 실행"""
    try:
        job = job_from_args(command_name, args)
    except ValueError:
        return invalid_document(command_name, f"알 수 없는 명령: {command_name}").model_dump()
    except InvalidInput as e:
        return invalid_document(command_name, str(e)).model_dump()
    return run(job, SolverConfig(**base)).model_dump()
