import os
from contextlib import contextmanager
from contextvars import ContextVar
from typing import Iterator, Optional

from pydantic import BaseModel, Field


class SolverConfig(BaseModel):
    """탐색 예산과 정밀도 설정"""
    budget: int = Field(2000, ge=1, description="탐색 단계 예산")
    precision_cap: int = Field(256, ge=8, description="p-진 정밀도 지수 상한")
    factor_bound: int = Field(10**40, ge=2, description="소인수분해 허용 절댓값 상한")
    seed: int = Field(0, description="난수 시드")
    extra_primes: int = Field(10, ge=0, description="지지 집합 확장 소수 개수 상한")
    trace: bool = Field(False, description="중간 데이터 포함 여부")
    jobs: int = Field(1, ge=1, description="배치 동시 작업 수")

    @classmethod
    def from_env(cls) -> "SolverConfig":
        """환경 변수에서 설정 읽기"""
        return cls(
            budget=int(os.getenv("MASSEY_BUDGET", 2000)),
            precision_cap=int(os.getenv("MASSEY_PRECISION_CAP", 256)),
            factor_bound=int(os.getenv("MASSEY_FACTOR_BOUND", 10**40)),
            seed=int(os.getenv("MASSEY_SEED", 0)),
            extra_primes=int(os.getenv("MASSEY_EXTRA_PRIMES", 10)),
        )


_current_config: ContextVar[Optional[SolverConfig]] = ContextVar("massey_config", default=None)


def get_config() -> SolverConfig:
    """현재 활성 설정 반환"""
    config = _current_config.get()
    if config is None:
        config = SolverConfig()
        _current_config.set(config)
    return config


@contextmanager
def use_config(config: SolverConfig) -> Iterator[SolverConfig]:
    """블록 안에서만 설정 교체"""
    token = _current_config.set(config)
    try:
        yield config
    finally:
        _current_config.reset(token)
