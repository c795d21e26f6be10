#!/usr/bin/env python3
"""
테스트 인스턴스 생성 스크립트

시드 고정 무작위 <a, b, c, d> 와 정의 증명서를 witness 작업 JSON 줄로 출력한다.
    python add_test_instances.py 20 --seed 7 | python -m app.main --jobs 4
"""
import argparse
import json
import logging
import os
from random import Random

from dotenv import load_dotenv

from app.api.commands import certificate_model
from app.config import SolverConfig, use_config
from app.pipeline.instances import generate_instance

logger = logging.getLogger(__name__)


def add_test_instances(count: int, seed: int, nonsquare_c: bool) -> None:
    rng = Random(seed)
    config = SolverConfig.from_env()
    with use_config(config):
        for index in range(count):
            certificate = certificate_model(generate_instance(rng, nonsquare_c=nonsquare_c))
            job = {"command": "witness", "payload": certificate.model_dump()}
            print(json.dumps(job, sort_keys=True, ensure_ascii=False))
            logger.info(f"인스턴스 {index + 1}/{count}: <{certificate.a}, {certificate.b}, {certificate.c}, {certificate.d}>")


if __name__ == "__main__":
    load_dotenv()
    logging.basicConfig(
        level=getattr(logging, os.getenv("LOG_LEVEL", "INFO").upper()),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    parser = argparse.ArgumentParser(description="테스트 인스턴스 생성")
    parser.add_argument("count", type=int, nargs="?", default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--allow-square-c", action="store_true", help="c 가 제곱인 인스턴스 허용")
    options = parser.parse_args()
    add_test_instances(options.count, options.seed, not options.allow_square_c)
