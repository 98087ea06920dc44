"""Seeded replicate runner.

Each replicate receives ``(seed, replicate_index, *args)`` and derives its own
counter-based stream, so results are identical for any worker count; they are
always merged in replicate order.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

from .rng import mean_and_se

WORKERS_ENV = "CMJTREES_WORKERS"


def resolve_workers(workers: int | None) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, int(workers or 1))


def _call(func, seed, args, rep):
    return func(seed, rep, *args)


@dataclass
class ReplicateHarness:
    seed: int
    reps: int
    workers: int = 1

    def map(self, func, *args) -> list:
        """Run ``func(seed, r, *args)`` for r = 0..reps-1; results in order."""
        job = partial(_call, func, self.seed, args)
        if self.workers <= 1 or self.reps <= 1:
            return [job(r) for r in range(self.reps)]
        chunk = max(1, self.reps // (4 * self.workers))
        with ProcessPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(job, range(self.reps), chunksize=chunk))

    @staticmethod
    def summary(values) -> dict:
        mean, se = mean_and_se(values)
        return {"n": len(values), "mean": mean, "se": se}
