from typing import List, Optional, Sequence
import logging

import numpy as np

logger = logging.getLogger(__name__)


def solve_gf2(rows: Sequence[Sequence[int]], targets: Sequence[int], width: int) -> Optional[List[int]]:
    """GF(2) 위의 연립방정식 A x = b 의 한 해 (자유변수는 0)"""
    if width == 0:
        return [] if not any(t % 2 for t in targets) else None
    if not rows:
        return [0] * width
    augmented = np.zeros((len(rows), width + 1), dtype=np.uint8)
    for i, (row, target) in enumerate(zip(rows, targets)):
        augmented[i, :width] = np.asarray(row, dtype=np.uint8) % 2
        augmented[i, width] = target % 2

    pivots: List[int] = []
    rank = 0
    for column in range(width):
        candidates = np.nonzero(augmented[rank:, column])[0]
        if candidates.size == 0:
            continue
        pivot = rank + int(candidates[0])
        if pivot != rank:
            augmented[[rank, pivot]] = augmented[[pivot, rank]]
        mask = augmented[:, column].astype(bool)
        mask[rank] = False
        augmented[mask] ^= augmented[rank]
        pivots.append(column)
        rank += 1
        if rank == len(rows):
            break

    # 모순 행: 계수 0, 우변 1
    if np.any((augmented[:, :width].sum(axis=1) == 0) & (augmented[:, width] == 1)):
        return None
    solution = [0] * width
    for i, column in enumerate(pivots):
        solution[column] = int(augmented[i, width])
    logger.debug(f"GF(2) 풀이: 행 {len(rows)}, 열 {width}, 계수 {rank}")
    return solution


def gf2_rank(rows: Sequence[Sequence[int]], width: int) -> int:
    if not rows or width == 0:
        return 0
    matrix = np.asarray([list(r) for r in rows], dtype=np.uint8) % 2
    rank = 0
    for column in range(width):
        candidates = np.nonzero(matrix[rank:, column])[0]
        if candidates.size == 0:
            continue
        pivot = rank + int(candidates[0])
        matrix[[rank, pivot]] = matrix[[pivot, rank]]
        mask = matrix[:, column].astype(bool)
        mask[rank] = False
        matrix[mask] ^= matrix[rank]
        rank += 1
        if rank == matrix.shape[0]:
            break
    return rank
