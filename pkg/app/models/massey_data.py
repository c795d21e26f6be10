from pydantic import BaseModel, Field, field_validator
from typing import Any, Dict, List, Optional, Union
from enum import Enum

from app.errors import InvalidInput
from app.utils.arith import parse_rational


class CommandType(str, Enum):
    """CLI 명령 종류"""
    SYMBOL = "symbol"                # 사원수 기호의 불변량
    CONIC = "conic"                  # 원뿔곡선 유리점
    NORM_EQ = "norm-eq"              # 이차 단계 노름 방정식
    DEFINED_CHECK = "defined-check"  # 정의 증명서 검사
    WITNESS = "witness"              # 소멸 증인 구성
    VERIFY = "verify"                # 소멸 증인 검사
    SPECIALIZE = "specialize"        # 유리점에서의 특수화
    RESIDUES = "residues"            # 파이프라인 잉여 검사
    LOCAL_INV = "local-inv"          # 한 소수 위의 국소 불변량
    GENERATE = "generate"            # 무작위 인스턴스


def _check_rational(text: str) -> None:
    # pydantic 은 ValueError 만 검증 오류로 바꾼다
    try:
        parse_rational(text)
    except InvalidInput as e:
        raise ValueError(str(e))


def _rational_text(value: Any) -> str:
    text = str(value).strip()
    _check_rational(text)
    return text


def _element_text(value: Any) -> str:
    """좌표 목록은 "c0,c1,..." 로 합친다"""
    if isinstance(value, (list, tuple)):
        value = ",".join(str(v) for v in value)
    text = str(value).strip()
    for part in text.split(","):
        _check_rational(part)
    return text


def _rational_list(value: Any) -> List[str]:
    if value is None or value == "":
        return []
    if isinstance(value, str):
        value = [part for part in value.split(",") if part.strip()]
    if not isinstance(value, (list, tuple)):
        value = [value]
    return [_rational_text(v) for v in value]


def _flag(value: Any) -> Any:
    if isinstance(value, str):
        return value.strip().lower() in ("1", "true", "yes", "on")
    return value


class ConfigOverrides(BaseModel):
    """작업 단위 설정 덮어쓰기"""
    budget: Optional[int] = Field(None, ge=1, description="탐색 단계 예산")
    precision_cap: Optional[int] = Field(None, ge=8, description="p-진 정밀도 지수 상한")
    factor_bound: Optional[int] = Field(None, ge=2, description="소인수분해 허용 절댓값 상한")
    seed: Optional[int] = Field(None, description="난수 시드")
    extra_primes: Optional[int] = Field(None, ge=0, description="지지 집합 확장 소수 개수 상한")
    trace: Optional[bool] = Field(None, description="중간 데이터 포함 여부")


class JobSpec(BaseModel):
    """한 줄의 작업"""
    command: CommandType = Field(..., description="명령")
    payload: Dict[str, Any] = Field(default_factory=dict, description="명령별 입력")
    config: Optional[ConfigOverrides] = Field(None, description="설정 덮어쓰기")


class SymbolPayload(BaseModel):
    """(π, ρ) ∈ Br(E)[2]"""
    pi: str = Field(..., description="π 의 좌표 또는 유리수")
    rho: str = Field(..., description="ρ 의 좌표 또는 유리수")
    generators: List[str] = Field(default_factory=list, description="E 의 생성원")

    _check_elements = field_validator("pi", "rho", mode="before")(_element_text)
    _check_generators = field_validator("generators", mode="before")(_rational_list)


class ConicPayload(BaseModel):
    """z² = a·x² + b·y²"""
    a: str = Field(..., description="a")
    b: str = Field(..., description="b")

    _check = field_validator("a", "b", mode="before")(_rational_text)


class NormEquationPayload(BaseModel):
    """E = E0(√c) 에서 N(ξ) = t"""
    generators: List[str] = Field(..., min_length=1, description="E 의 생성원 (마지막이 c)")
    t: str = Field(..., description="E0 의 원소")
    mod_squares: bool = Field(False, description="유리 제곱 인자 무시")

    _check_generators = field_validator("generators", mode="before")(_rational_list)
    _check_t = field_validator("t", mode="before")(_element_text)
    _check_flag = field_validator("mod_squares", mode="before")(_flag)


class QuadruplePayload(BaseModel):
    """<a, b, c, d> 와 증명서 (α, δ)"""
    a: str = Field(..., description="a")
    b: str = Field(..., description="b")
    c: str = Field(..., description="c")
    d: str = Field(..., description="d")
    alpha: Optional[str] = Field(None, description="α ∈ F_a 의 좌표")
    delta: Optional[str] = Field(None, description="δ ∈ F_d 의 좌표")

    _check_rationals = field_validator("a", "b", "c", "d", mode="before")(_rational_text)

    @field_validator("alpha", "delta", mode="before")
    @classmethod
    def _check_elements(cls, value: Any) -> Optional[str]:
        return None if value is None else _element_text(value)


class SpecializePayload(BaseModel):
    """s_{P,π}(f) 와 s_{P,π}(f, g)"""
    f: str = Field(..., description="x1, x2 (와 근 r1, r2) 의 유리식")
    point: List[str] = Field(..., min_length=2, max_length=2, description="점 P")
    g: Optional[str] = Field(None, description="두 번째 인자")
    generators: List[str] = Field(default_factory=list, description="계수 대수의 생성원")
    swapped: bool = Field(False, description="매개변수 순서 (x2 먼저)")

    _check_point = field_validator("point", "generators", mode="before")(_rational_list)
    _check_flag = field_validator("swapped", mode="before")(_flag)


class LocalInvariantPayload(BaseModel):
    """한 소수 위 모든 자리에서의 (π, ρ)"""
    pi: str = Field(..., description="π")
    rho: str = Field(..., description="ρ")
    prime: str = Field(..., description="소수 또는 inf")
    generators: List[str] = Field(default_factory=list, description="E 의 생성원")

    _check_elements = field_validator("pi", "rho", mode="before")(_element_text)
    _check_generators = field_validator("generators", mode="before")(_rational_list)

    @field_validator("prime", mode="before")
    @classmethod
    def _check_prime(cls, value: Any) -> str:
        text = str(value).strip().lower()
        if text not in ("inf", "infinity") and not text.isdigit():
            raise ValueError(f"소수 또는 inf 여야 합니다: {value}")
        return "inf" if text.startswith("inf") else text


class GeneratePayload(BaseModel):
    """시드 고정 무작위 인스턴스"""
    count: int = Field(1, ge=1, le=1000, description="인스턴스 개수")
    nonsquare_c: bool = Field(True, description="c 가 제곱이 아닌 인스턴스만")

    _check_flag = field_validator("nonsquare_c", mode="before")(_flag)


PAYLOADS = {
    CommandType.SYMBOL: SymbolPayload,
    CommandType.CONIC: ConicPayload,
    CommandType.NORM_EQ: NormEquationPayload,
    CommandType.DEFINED_CHECK: QuadruplePayload,
    CommandType.WITNESS: QuadruplePayload,
    CommandType.VERIFY: QuadruplePayload,
    CommandType.SPECIALIZE: SpecializePayload,
    CommandType.RESIDUES: QuadruplePayload,
    CommandType.LOCAL_INV: LocalInvariantPayload,
    CommandType.GENERATE: GeneratePayload,
}


class CertificateModel(BaseModel):
    """정의 증명서 (α, δ)"""
    a: int = Field(..., description="a 의 무제곱 대표")
    b: int = Field(..., description="b 의 무제곱 대표")
    c: int = Field(..., description="c 의 무제곱 대표")
    d: int = Field(..., description="d 의 무제곱 대표")
    alpha: List[str] = Field(..., description="α ∈ F_a")
    delta: List[str] = Field(..., description="δ ∈ F_d")


class TraceModel(BaseModel):
    """구성 중간 데이터"""
    route: str = Field(..., description="dependent 또는 specialization")
    alpha1: List[str] = Field(..., description="α = α1² - c·α2² 의 α1")
    alpha2: List[str] = Field(..., description="α2")
    u1: str = Field(..., description="δ = u1 + u2·√d 의 u1")
    u2: str = Field(..., description="u2")
    eta: Optional[List[str]] = Field(None, description="η ∈ F_a")
    auxiliary_point: Optional[List[int]] = Field(None, description="보조점 P0")
    constant_class: List[str] = Field(default_factory=list, description="상수 류 C 의 불변량")
    point: Optional[List[str]] = Field(None, description="특수화 점 P")
    order: List[int] = Field(default_factory=lambda: [0, 1], description="매개변수 순서")
    x: Optional[str] = Field(None, description="x")
    nu: Optional[List[str]] = Field(None, description="ν ∈ F_a")
    y: Optional[str] = Field(None, description="알버트 단계의 y")


class WitnessModel(BaseModel):
    """소멸 증인 (α', δ')"""
    a: int = Field(..., description="a")
    b: int = Field(..., description="b")
    c: int = Field(..., description="c")
    d: int = Field(..., description="d")
    alpha: List[str] = Field(..., description="α' ∈ F_a")
    delta: List[str] = Field(..., description="δ' ∈ F_d")
    route: str = Field(..., description="c-square, dependent, specialization")
    albert_route: Optional[str] = Field(None, description="알버트 단계 경로")
    albert_certificate: Optional[List[List[str]]] = Field(
        None, description="F_a 위의 (X, Y): X² - α'·Y² = ν·y, 즉 (α', ν·y) = 0")
    conic_point: Optional[List[List[str]]] = Field(
        None, description="F_{a,d} 위의 (X, Y, Z): X² = α'·Y² + δ'·Z², 즉 (α', δ') = 0 (작은 높이에서 찾은 경우)")
    verified: bool = Field(..., description="독립 검증 결과")
    trace: Optional[TraceModel] = Field(None, description="--trace 일 때 중간 데이터")


class ResultDocument(BaseModel):
    """한 작업의 결과"""
    command: str = Field(..., description="명령")
    status: str = Field("ok", description="ok, negative, exhausted, invalid")
    exit_code: int = Field(0, description="종료 코드")
    result: Dict[str, Any] = Field(default_factory=dict, description="답과 증명서")
    error: Optional[str] = Field(None, description="오류 메시지")
    obstruction: Optional[str] = Field(None, description="장애물 자리")
    config: Dict[str, Union[int, bool, str]] = Field(default_factory=dict, description="적용된 설정")
