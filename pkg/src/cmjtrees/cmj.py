"""Event-driven simulation of a pure-birth CMJ population.

The queue holds exactly one pending event per individual: its next birth.
Popping the global minimum appends the newborn, then schedules the parent's
next birth (rank + 1) and the newborn's first birth, in that order.  Ties,
which only arise from underflowed holding times, are broken by
``(time, parent_id, child_rank)``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .harness import ReplicateHarness
from .purebirth import Count, Horizon
from .rates import RateSequence
from .rng import PURPOSE_CMJ, ExpStream, stream

DEFAULT_POPULATION_CAP = 10 ** 7

COMPLETE = "complete"
CAP_EXCEEDED = "cap_exceeded"
EXHAUSTED = "exhausted"


@dataclass(frozen=True, order=True)
class BirthEvent:
    time: float
    parent_id: int
    child_rank: int


@dataclass
class Genealogy:
    """Parents and birth times in birth order; ``parent[0] == -1`` marks the root."""

    parent: np.ndarray
    birth_time: np.ndarray
    status: str = COMPLETE
    underflows: int = 0
    out_degree: np.ndarray = field(init=False)

    def __post_init__(self):
        self.parent = np.asarray(self.parent, dtype=np.int64)
        self.birth_time = np.asarray(self.birth_time, dtype=np.float64)
        n = len(self.parent)
        self.out_degree = np.bincount(self.parent[1:], minlength=n)[:n] if n > 1 else np.zeros(n, np.int64)

    def __len__(self):
        return len(self.parent)

    @property
    def explosion_suspected(self) -> bool:
        return self.status == CAP_EXCEEDED


class _InvRates:
    """Lazily extended table of 1/lambda_i, indexable by rank (1-based)."""

    def __init__(self, seq: RateSequence, initial: int = 64):
        self.seq = seq
        self.values = [0.0]  # rank 0 unused
        self._extend(initial)

    def _extend(self, upto: int):
        upto = int(min(upto, self.seq.length))
        have = len(self.values) - 1
        if upto > have:
            self.values.extend(self.seq.inv_range(have + 1, upto).tolist())

    def holding(self, rank: int, e: float) -> float:
        if rank >= len(self.values):
            self._extend(2 * rank)
            if rank >= len(self.values):
                return math.inf  # beyond a finite table: no further births
        return e * self.values[rank]


def simulate(seq: RateSequence, stop: Count | Horizon, rng: np.random.Generator,
             cap: int = DEFAULT_POPULATION_CAP) -> Genealogy:
    """Grow the population from a single ancestor born at time 0.

    ``Count(N)`` stops at N individuals (root included); ``Horizon(T)`` stops at
    the first birth after T, or with status ``cap_exceeded`` once ``cap``
    individuals exist.
    """
    exp = ExpStream(rng)
    inv = _InvRates(seq, 64 if isinstance(stop, Horizon) else min(stop.n + 1, 1 << 20))
    pop, push = heapq.heappop, heapq.heappush

    parents = [-1]
    times = [0.0]
    underflows = 0
    h = inv.holding(1, exp.next())
    underflows += h == 0.0
    heap = [(h, 0, 1)]
    status = COMPLETE

    if isinstance(stop, Count):
        target, horizon = stop.n, math.inf
    else:
        target, horizon = math.inf, stop.t
        cap = max(1, cap)

    while len(parents) < target:
        if len(parents) >= cap:
            status = CAP_EXCEEDED
            break
        time, p, rank = pop(heap)
        if time > horizon:
            break
        if time == math.inf:
            status = EXHAUSTED
            break
        n = len(parents)
        parents.append(p)
        times.append(time)
        h1 = inv.holding(rank + 1, exp.next())
        h2 = inv.holding(1, exp.next())
        underflows += (h1 == 0.0) + (h2 == 0.0)
        push(heap, (time + h1, p, rank + 1))
        push(heap, (time + h2, n, 1))
    return Genealogy(np.array(parents), np.array(times), status, int(underflows))


def tau_trajectory(g: Genealogy) -> list[tuple[int, float]]:
    """(n, tau_n) for every individual in birth order."""
    return [(n, float(t)) for n, t in enumerate(g.birth_time)]


# --------------------------------------------------------------------------
# explosion probe
# --------------------------------------------------------------------------

@dataclass
class ProbeTable:
    """Estimated P{tau_N <= T} per horizon T, tau counted with the root as individual 1."""

    N: int
    reps: int
    horizons: list[float]
    probability: list[float]
    se: list[float]
    final_times: np.ndarray

    def rows(self):
        return list(zip(self.horizons, self.probability, self.se))


def _probe_rep(seed, rep, seq, N):
    g = simulate(seq, Count(N), stream(seed, rep, PURPOSE_CMJ))
    return float(g.birth_time[-1]) if len(g) == N else math.inf


def explosion_probe(seq: RateSequence, N: int, T_grid, reps: int, seed: int,
                    workers: int = 1) -> ProbeTable:
    """Monte Carlo estimate of P{tau_N <= T} for each T in ``T_grid``."""
    if N < 1 or reps < 1:
        raise DomainError("need N >= 1 and reps >= 1")
    final = np.array(ReplicateHarness(seed, reps, workers).map(_probe_rep, seq, N))
    probs, ses = [], []
    for T in T_grid:
        p = float(np.mean(final <= T))
        probs.append(p)
        ses.append(math.sqrt(p * (1 - p) / reps))
    return ProbeTable(N, reps, [float(T) for T in T_grid], probs, ses, final)
