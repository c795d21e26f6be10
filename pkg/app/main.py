from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Optional
import argparse
import asyncio
import json
import logging
import os
import sys

from dotenv import load_dotenv

from app.api.commands import execute_args, execute_line
from app.config import SolverConfig

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m app.main",
        description="4중 mod-2 Massey 곱 소멸 판정과 증인 구성",
    )
    parser.add_argument("command", nargs="?", help="명령 (없으면 stdin 의 JSON 줄)")
    parser.add_argument("args", nargs="*", help="위치 인자 또는 key=value")
    parser.add_argument("--budget", type=int, help="탐색 단계 예산")
    parser.add_argument("--precision-cap", type=int, help="p-진 정밀도 지수 상한")
    parser.add_argument("--factor-bound", type=int, help="소인수분해 허용 절댓값 상한")
    parser.add_argument("--seed", type=int, help="난수 시드")
    parser.add_argument("--trace", action="store_true", default=None, help="중간 데이터 포함")
    parser.add_argument("--jobs", type=int, help="배치 동시 작업 수")
    parser.add_argument("--log-level", default=None, help="로그 레벨 (기본 LOG_LEVEL 또는 INFO)")
    return parser


def configure_logging(level: Optional[str]) -> None:
    # stdout 은 JSON 줄 전용
    log_level = level or os.getenv("LOG_LEVEL", "INFO")
    logging.basicConfig(
        level=getattr(logging, log_level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


def base_config(options: argparse.Namespace) -> SolverConfig:
    """환경 변수 위에 명령줄 플래그를 덮어쓴다"""
    config = SolverConfig.from_env()
    flags = {
        "budget": options.budget,
        "precision_cap": options.precision_cap,
        "factor_bound": options.factor_bound,
        "seed": options.seed,
        "trace": options.trace,
        "jobs": options.jobs,
    }
    return SolverConfig(**{**config.model_dump(), **{k: v for k, v in flags.items() if v is not None}})


async def run_batch(lines: List[str], base: Dict[str, Any], jobs: int) -> List[Dict[str, Any]]:
    """독립 작업을 병렬 실행하고 입력 순서대로 결과 반환"""
    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [loop.run_in_executor(pool, execute_line, line, base) for line in lines]
        return list(await asyncio.gather(*futures))


def emit(document: Dict[str, Any]) -> None:
    sys.stdout.write(json.dumps(document, sort_keys=True, ensure_ascii=False) + "\n")
    sys.stdout.flush()


def main(argv: Optional[List[str]] = None) -> int:
    options = build_parser().parse_args(argv)
    load_dotenv()
    configure_logging(options.log_level)
    try:
        config = base_config(options)
    except Exception as e:
        logger.error(f"설정 오류: {str(e)}")
        emit({"command": options.command or "?", "status": "invalid", "exit_code": 3, "error": str(e)})
        return 3
    base = config.model_dump()

    if options.command:
        document = execute_args(options.command, options.args, base)
        emit(document)
        return document["exit_code"]

    lines = [line for line in sys.stdin.read().splitlines() if line.strip()]
    if config.jobs > 1 and len(lines) > 1:
        documents = asyncio.run(run_batch(lines, base, config.jobs))
    else:
        documents = [execute_line(line, base) for line in lines]
    for document in documents:
        emit(document)
    logger.info(f"작업 {len(documents)}개 처리 완료")
    return max((document["exit_code"] for document in documents), default=0)


if __name__ == "__main__":
    sys.exit(main())
