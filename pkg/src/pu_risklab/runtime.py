"""Seed streams and the process pool used by the Monte Carlo campaigns.

Replicates are grouped in blocks of fixed size; each block draws from its own
stream keyed by (seed, grid index, block index). Neither the block layout nor
the streams depend on the worker count, so results are identical for any
number of workers.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

BLOCK_SIZE = 500


def stream(seed: int, grid_index: int, block_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(grid_index, block_index)))


def blocks(replicates: int, block_size: int = BLOCK_SIZE) -> list[tuple[int, int]]:
    """(block index, replicate count) pairs covering ``replicates``."""
    return [(i, min(block_size, replicates - start))
            for i, start in enumerate(range(0, replicates, block_size))]


def default_workers() -> int:
    env = os.environ.get("PU_RISKLAB_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_tasks(fn, tasks: list, workers: int = 1) -> list:
    """Map ``fn`` over ``tasks`` preserving order; a process pool when workers > 1."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(fn, tasks))
