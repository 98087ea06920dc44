"""A single individual's reproduction process and the analytic bounds built on it.

Arrival times are T_i = E_1 + ... + E_i with independent E_j ~ Exp(lambda_j),
sampled as ``Exp(1) * 2**-log2(lambda_j)``.  Holding times that underflow are
exactly zero ("instantaneous births"); they are counted, never hidden.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RateRangeError
from .harness import ReplicateHarness
from .rates import RateSequence
from .rng import PURPOSE_ARRIVALS, std_exponentials, stream

LOG2E = math.log2(math.e)
LN2 = math.log(2.0)

# returned by gamma_lower_bound_log2 when y = alpha * t overflows
GAMMA_SATURATED = -math.inf

DEFAULT_INDEX_CAP = 10 ** 7


@dataclass(frozen=True)
class Count:
    """Stop after n events."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"count stop needs n >= 1, got {self.n}")


@dataclass(frozen=True)
class Horizon:
    """Stop at the first event strictly after time t."""

    t: float

    def __post_init__(self):
        if not self.t >= 0 or math.isinf(self.t):
            raise DomainError(f"horizon must be finite and >= 0, got {self.t}")


@dataclass
class ArrivalSample:
    times: np.ndarray
    truncated_at: Count | Horizon
    underflows: int = 0
    cap_hit: bool = False

    def __len__(self):
        return len(self.times)


def _holding_times(seq: RateSequence, a: int, b: int, gen) -> tuple[np.ndarray, int]:
    inv = seq.inv_range(a, b)
    with np.errstate(under="ignore"):
        e = std_exponentials(gen, b - a + 1) * inv
    return e, int(np.count_nonzero(e == 0.0))


def sample_arrivals(seq: RateSequence, stop: Count | Horizon, rng: np.random.Generator,
                    cap: int = DEFAULT_INDEX_CAP) -> ArrivalSample:
    """Sample T_1 <= T_2 <= ... up to the stop rule.

    Under a horizon the sample is cut at ``cap`` arrivals (or at the end of a
    rate table) and flagged with ``cap_hit``.
    """
    if isinstance(stop, Count):
        e, under = _holding_times(seq, 1, stop.n, rng)
        return ArrivalSample(np.cumsum(e), stop, under)

    if stop.t <= 0:
        return ArrivalSample(np.empty(0), stop)
    limit = int(min(cap, seq.length))
    chunks = []
    total = 0.0
    under = 0
    lo = 1
    size = 64
    while lo <= limit:
        hi = min(limit, lo + size - 1)
        e, u = _holding_times(seq, lo, hi, rng)
        t = total + np.cumsum(e)
        stop_at = int(np.searchsorted(t, stop.t, side="right"))
        if stop_at < t.size:
            chunks.append(t[:stop_at])
            under += int(np.count_nonzero(e[:stop_at] == 0.0))
            return ArrivalSample(np.concatenate(chunks), stop, under)
        chunks.append(t)
        under += u
        total = float(t[-1])
        lo = hi + 1
        size = min(size * 4, 1 << 20)
    return ArrivalSample(np.concatenate(chunks), stop, under, cap_hit=True)


# --------------------------------------------------------------------------
# analytic bounds
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaParams:
    """X ~ Gamma(d, alpha) evaluated at threshold t; alpha and t kept in log2."""

    d: int
    rate_log2: float
    t_log2: float

    def __post_init__(self):
        if self.d < 1:
            raise DomainError("gamma shape d must be >= 1")
        if not math.isfinite(self.y_log2):
            raise DomainError("log2(alpha * t) must be finite")

    @classmethod
    def with_threshold(cls, d: int, rate_log2: float, t: float) -> GammaParams:
        if not t > 0:
            raise DomainError("threshold t must be positive")
        return cls(d, rate_log2, math.log2(t))

    @property
    def y_log2(self) -> float:
        return self.rate_log2 + self.t_log2


def gamma_lower_bound_log2(p: GammaParams) -> float:
    """log2 of e^{-y} (y/d)^d, a lower bound on P{X <= t} with y = alpha t.

    Returns ``GAMMA_SATURATED`` (-inf) when y itself overflows a double.
    """
    yl = p.y_log2
    if yl > 1023:
        return GAMMA_SATURATED
    d = float(p.d)
    if math.isinf(d):
        raise RateRangeError(f"gamma shape {p.d} exceeds the double range")
    return -(2.0 ** yl) * LOG2E + d * (yl - math.log2(p.d))


def markov_upper_tail_complement_log2(d: int, rate_log2: float, t: float | None = None, *,
                                      t_log2: float | None = None) -> float | None:
    """log2(1 - E S / t) for S ~ Gamma(d, alpha), where E S = d / alpha.

    Returns ``None`` when E S >= t, i.e. the Markov bound carries no information.
    The threshold may be passed as ``t`` or, for extreme values, as ``t_log2``.
    """
    if t_log2 is None:
        if t is None or not t > 0:
            raise DomainError("threshold t must be positive")
        t_log2 = math.log2(t)
    ratio_log2 = math.log2(d) - rate_log2 - t_log2
    if ratio_log2 >= 0:
        return None
    with np.errstate(under="ignore"):
        ratio = 2.0 ** ratio_log2 if ratio_log2 > -1100 else 0.0
    return math.log1p(-ratio) / LN2


def intensity_sum(seq: RateSequence, n: int, shift: float, inv: np.ndarray | None = None) -> float:
    """Sum over i <= n of 1 / (lambda_i + shift), computed from reciprocal rates."""
    if inv is None:
        inv = seq.inv_range(1, n)
    else:
        inv = inv[:n]
    return float(np.sum(inv / (1.0 + shift * inv)))


def chernoff_intensity_term_log2(seq: RateSequence, t: float, beta: float, n: int,
                                 inv: np.ndarray | None = None) -> float:
    """log2 of exp{beta log n (t - sum_{i<=n} 1/(lambda_i + beta log n))}.

    The n-th term of the intensity series is summable once this is at most
    ``-2 log2 n``.  ``inv`` may carry precomputed reciprocal rates 1..>=n.
    """
    if not (t > 0 and beta > 0):
        raise DomainError("t and beta must be positive")
    if n < 2:
        raise DomainError("n must be >= 2")
    shift = beta * math.log(n)
    return shift * (t - intensity_sum(seq, n, shift, inv)) / LN2


@dataclass
class IntensityEstimate:
    mean: float
    se: float
    reps: int
    cap_hits: int
    cap: int

    @property
    def cap_hit(self) -> bool:
        return self.cap_hits > 0


def _count_arrivals(seed, rep, seq, t, cap):
    s = sample_arrivals(seq, Horizon(t), stream(seed, rep, PURPOSE_ARRIVALS), cap=cap)
    return len(s), s.cap_hit


def estimate_intensity(seq: RateSequence, t: float, reps: int, seed: int,
                       cap: int = DEFAULT_INDEX_CAP, workers: int = 1) -> IntensityEstimate:
    """Monte Carlo mean of xi([0, t]), the number of arrivals up to t.

    Replicates that reach ``cap`` arrivals (a possible explosion within the
    horizon) are counted in ``cap_hits`` and enter the mean at the cap.
    """
    if reps < 1:
        raise DomainError("reps must be >= 1")
    if t <= 0:
        return IntensityEstimate(0.0, 0.0, reps, 0, cap)
    out = ReplicateHarness(seed, reps, workers).map(_count_arrivals, seq, t, cap)
    counts = np.array([c for c, _ in out], dtype=np.float64)
    hits = sum(h for _, h in out)
    se = float(counts.std(ddof=1) / math.sqrt(reps)) if reps > 1 else math.nan
    return IntensityEstimate(float(counts.mean()), se, reps, hits, cap)
