"""Counter-based random streams for reproducible, parallel-safe Monte Carlo.

A master seed is hashed once into a Philox key.  Each (purpose, replicate)
pair owns the disjoint counter block ``[*, *, purpose, replicate]``, so the
stream of replicate r never depends on how many other replicates exist or
which worker runs it.  Growing the replicate count leaves earlier replicates
untouched.
"""

from __future__ import annotations

import math

import numpy as np

# purpose tags, occupying the third counter word
PURPOSE_GENERIC = 0
PURPOSE_ARRIVALS = 1
PURPOSE_CMJ = 2
PURPOSE_GROW = 3
PURPOSE_COUPLING = 4

_MASK64 = (1 << 64) - 1


def philox_key(seed: int) -> np.ndarray:
    return np.random.SeedSequence(int(seed) & _MASK64).generate_state(2, np.uint64)


def stream(seed: int, replicate: int = 0, purpose: int = PURPOSE_GENERIC) -> np.random.Generator:
    """Generator for one replicate; the counter high words carry (purpose, replicate)."""
    counter = np.array([0, 0, purpose & _MASK64, replicate & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=philox_key(seed), counter=counter))


def open_uniforms(gen: np.random.Generator, size: int) -> np.ndarray:
    """Uniforms on the open interval (0, 1) from 53 raw bits each."""
    raw = gen.bit_generator.random_raw(size)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


def std_exponentials(gen: np.random.Generator, size: int) -> np.ndarray:
    """Exp(1) variates by inverse CDF, -log(U) with U in (0, 1)."""
    return -np.log(open_uniforms(gen, size))


class ExpStream:
    """Buffered Exp(1) draws consumed one at a time or in bulk.

    Raw draws are taken sequentially from the bit generator, so the sequence
    of variates does not depend on buffer sizes.
    """

    def __init__(self, gen: np.random.Generator, block: int = 32, max_block: int = 1 << 16):
        self.gen = gen
        self._block = block
        self._max_block = max_block
        self._buf: list[float] = []
        self._pos = 0

    def _refill(self):
        self._buf = std_exponentials(self.gen, self._block).tolist()
        self._pos = 0
        self._block = min(self._block * 2, self._max_block)

    def next(self) -> float:
        if self._pos >= len(self._buf):
            self._refill()
        x = self._buf[self._pos]
        self._pos += 1
        return x

    def take(self, n: int) -> np.ndarray:
        rest = self._buf[self._pos:self._pos + n]
        self._pos += len(rest)
        if len(rest) == n:
            return np.array(rest, dtype=np.float64)
        more = std_exponentials(self.gen, n - len(rest))
        return np.concatenate([np.array(rest, dtype=np.float64), more])


def seed_from(value) -> int:
    """Normalise a user seed (int or numeric string) to a 64-bit integer."""
    v = int(value)
    if v < 0 or v > _MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {value}")
    return v


def mean_and_se(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return math.nan, math.nan
    if x.size == 1:
        return float(x[0]), math.nan
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))
