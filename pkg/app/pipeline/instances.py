"""
시드 고정 난수 인스턴스 생성
"""
from random import Random
from typing import Optional, Sequence
import logging

from app.algebra.etale import EtaleElement, quadratic_algebra
from app.errors import MasseyError, SearchBoundExceeded
from app.pipeline.certificates import (
    DefinedCertificate, check_defined_certificate, search_defined_certificate,
)
from app.pipeline.construction import vanish_witness
from app.utils.arith import squarefree_class

logger = logging.getLogger(__name__)

GENERATORS = (-7, -6, -5, -3, -2, -1, 2, 3, 5, 6, 7, 10, 11, 13)
# F_a 또는 F_d 가 분해되는 경우
SPLIT_GENERATORS = (1, 4, 9)
COORDINATE_RANGE = 6
MAX_ATTEMPTS = 40


def random_unit(rng: Random, generator: int) -> EtaleElement:
    """작은 좌표의 가역원"""
    algebra = quadratic_algebra(generator)
    while True:
        x = algebra.element([rng.randint(-COORDINATE_RANGE, COORDINATE_RANGE) for _ in range(algebra.dim)])
        if x.is_unit():
            return x


def _defined_certificate(rng: Random, nonsquare_c: bool, generators: Sequence[int]) -> Optional[DefinedCertificate]:
    a, d = rng.choice(generators), rng.choice(generators)
    alpha0, delta0 = random_unit(rng, a), random_unit(rng, d)
    b, c = squarefree_class(alpha0.norm()), squarefree_class(delta0.norm())
    if nonsquare_c and c.is_trivial():
        return None
    if check_defined_certificate(a, b, c, d, alpha0, delta0).accepted:
        logger.debug("무작위 증명서 채택")
        return DefinedCertificate(squarefree_class(a), b, c, squarefree_class(d), alpha0, delta0)
    return search_defined_certificate(a, b, c, d)


def generate_instance(rng: Random, nonsquare_c: bool = True, attempts: Optional[int] = None,
                      generators: Sequence[int] = GENERATORS, solvable: bool = True) -> DefinedCertificate:
    """무작위 α0 ∈ F_a, δ0 ∈ F_d 에서 b, c 를 읽고 정의 증명서가 있는 인스턴스만 채택

    solvable 이면 현재 설정의 예산 안에서 vanish_witness 가 끝나는 인스턴스만 돌려준다.
    """
    for attempt in range(attempts or MAX_ATTEMPTS):
        certificate = _defined_certificate(rng, nonsquare_c, generators)
        if certificate is None:
            continue
        if solvable:
            try:
                vanish_witness(certificate.a, certificate.b, certificate.c, certificate.d, certificate=certificate)
            except MasseyError as e:
                logger.warning(f"시도 {attempt + 1}: 증인 구성 실패로 건너뜀: {str(e)}")
                continue
        logger.debug(f"시도 {attempt + 1}: <{certificate.a}, {certificate.b}, {certificate.c}, {certificate.d}> 채택")
        return certificate
    raise SearchBoundExceeded("정의 가능한 인스턴스를 생성하지 못했습니다")
