"""
Replicate fan-out over a process pool.

Replicates are split into contiguous index blocks; each block's values come
back in replicate order, so the assembled array (and every statistic computed
from it) does not depend on how many workers ran.
"""

import concurrent.futures as cf
import logging
from typing import Callable, List, Tuple

import numpy as np

logger = logging.getLogger(__name__)

ReplicateFn = Callable[[int], float]


def _run_block(fn: ReplicateFn, start: int, stop: int) -> np.ndarray:
    return np.array([fn(i) for i in range(start, stop)], dtype=float)


def _blocks(n_replicates: int, n_blocks: int) -> List[Tuple[int, int]]:
    sizes = [n_replicates // n_blocks] * n_blocks
    for i in range(n_replicates % n_blocks):
        sizes[i] += 1
    blocks = []
    start = 0
    for size in sizes:
        if size > 0:
            blocks.append((start, start + size))
        start += size
    return blocks


def map_replicates(fn: ReplicateFn, n_replicates: int, workers: int = 1,
                   blocks_per_worker: int = 4) -> np.ndarray:
    """Evaluate ``fn(i)`` for i in range(n_replicates); ``fn`` must be picklable."""
    if n_replicates <= 0:
        return np.zeros(0)
    if workers <= 1:
        return _run_block(fn, 0, n_replicates)

    blocks = _blocks(n_replicates, min(n_replicates, workers * blocks_per_worker))
    results = [None] * len(blocks)
    done = 0
    with cf.ProcessPoolExecutor(max_workers=workers) as ex:
        futures = {ex.submit(_run_block, fn, start, stop): i for i, (start, stop) in enumerate(blocks)}
        for future in cf.as_completed(futures):
            index = futures[future]
            results[index] = future.result()
            done += blocks[index][1] - blocks[index][0]
            logger.info("replicates: %d/%d", done, n_replicates)
    return np.concatenate(results)
