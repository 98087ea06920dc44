"""Finite, auditable certificates for explosion and non-explosion.

Each check returns a :class:`CertificateReport` whose verdict is certified
only when every inequality listed in its evidence holds at the stated
indices.  Grid evidence cannot prove an asymptotic statement; every report
carries that caveat.  Extreme quantities (rates up to 2**(2**(k**3))) are
handled in log2 throughout, with exact integers for d_k, M_i and the
block classification.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, RateRangeError
from .purebirth import (
    LOG2E,
    GammaParams,
    gamma_lower_bound_log2,
    markov_upper_tail_complement_log2,
)
from .rates import (
    MAX_PATHOLOGICAL_BLOCK,
    RateSequence,
    block_length,
    block_rate_log2,
    boundary_index,
    is_dominated_by,
    iterlog_threshold,
    reciprocal_partial_sum,
)

EXPLOSION = "ExplosionCertified"
NON_EXPLOSION = "NonExplosionCertified"
INCONCLUSIVE = "Inconclusive"

GRID_CAVEAT = "finite-grid evidence; the asymptotic hypotheses are extrapolated, not proved"

# exact-integer budget for the counterexample rows (M_i has about 2 i**2 bits)
MAX_COUNTEREXAMPLE_I = 1000

LOG2_FOUR_THIRDS = math.log2(4 / 3)
LOG2_3 = math.log2(3)


@dataclass
class Evidence:
    name: str
    index: int | list | None
    value: float | None
    threshold: float | None = None
    holds: bool | None = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "index": self.index,
            "value": _jsonable(self.value),
            "threshold": _jsonable(self.threshold),
            "holds": self.holds,
        }


@dataclass
class CertificateReport:
    certificate: str
    verdict: str
    parameters: dict
    evidence: list[Evidence] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    rows: list[dict] = field(default_factory=list)

    def __post_init__(self):
        if self.verdict != INCONCLUSIVE:
            bad = [e.name for e in self.evidence if e.holds is False]
            if bad:
                raise AssertionError(f"certified verdict with failing evidence: {bad}")

    @property
    def certified(self) -> bool:
        return self.verdict != INCONCLUSIVE

    def to_dict(self) -> dict:
        return {
            "certificate": self.certificate,
            "verdict": self.verdict,
            "parameters": _jsonable(self.parameters),
            "evidence": [e.to_dict() for e in self.evidence],
            "notes": list(self.notes),
            "rows": [_jsonable(r) for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def default_grid(lo_exp: float = 2, hi_exp: float = 6, per_decade: int = 4) -> list[int]:
    pts = np.logspace(lo_exp, hi_exp, int(round((hi_exp - lo_exp) * per_decade)) + 1)
    return sorted(set(int(round(p)) for p in pts))


def _check_grid(n_grid) -> list[int]:
    grid = [int(n) for n in n_grid]
    if not grid or grid[0] < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("n_grid must be a non-empty strictly ascending list of indices >= 1")
    return grid


# --------------------------------------------------------------------------
# condition (i): convergent reciprocal series
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerTailBound:
    """Declared analytic bound lambda_i >= c * i**p for all i >= start, p > 1."""

    c: float
    p: float
    start: int = 1

    def tail_log2_term(self, idx: np.ndarray) -> np.ndarray:
        return math.log2(self.c) + self.p * np.log2(idx)

    def tail_sum_bound(self, n: int) -> float:
        """Upper bound on sum_{i > n} 1/(c i**p) by the integral from n."""
        return n ** (1 - self.p) / (self.c * (self.p - 1))


def check_condition_i(seq: RateSequence, n_grid, tail_bound: PowerTailBound | None = None) -> CertificateReport:
    """Partial sums S_n of 1/lambda_i on the grid and doubling increments S_2n - S_n.

    Explosion is certified only with a declared tail bound that is verified
    termwise on the whole prefix 1..max(grid).
    """
    grid = _check_grid(n_grid)
    N = grid[-1]
    ev: list[Evidence] = []
    notes = [GRID_CAVEAT]
    sums = []
    acc_lo, acc = 1, 0.0
    for n in grid:
        acc += reciprocal_partial_sum(seq, acc_lo, n) if n >= acc_lo else 0.0
        acc_lo = n + 1
        sums.append(acc)
        ev.append(Evidence("reciprocal_partial_sum", n, acc))
    incs = []
    for n in grid:
        inc = reciprocal_partial_sum(seq, n + 1, 2 * n)
        incs.append(inc)
        ev.append(Evidence("doubling_increment", [n + 1, 2 * n], inc))

    half = len(grid) // 2
    shrinking = all(b <= a for a, b in zip(incs[half:], incs[half + 1:])) and incs[-1] < incs[half]
    params = {"n_grid": grid, "rates": seq.to_descriptor()}

    divergent = not shrinking
    if seq.kind == "pathological":
        m = 1
        while boundary_index(m + 1) <= N:
            m += 1
        ev.append(Evidence("boundary_terms_below_max_index", [1, N], sums[-1], float(m), sums[-1] >= m))
        notes.append(f"{m} rate-1 boundary entries up to {N}; each contributes 1 and there are "
                     "infinitely many, so the series diverges")
        divergent = True
        shrinking = False

    if tail_bound is not None:
        params["tail_bound"] = {"c": tail_bound.c, "p": tail_bound.p, "start": tail_bound.start}
        ok_p = tail_bound.p > 1
        ev.append(Evidence("tail_exponent_above_one", None, tail_bound.p, 1.0, ok_p))
        first_bad = None
        lo = tail_bound.start
        while lo <= N:
            hi = min(N, lo + (1 << 20) - 1)
            idx = np.arange(lo, hi + 1, dtype=np.float64)
            bad = np.nonzero(seq.log2_range(lo, hi) < tail_bound.tail_log2_term(idx))[0]
            if bad.size:
                first_bad = lo + int(bad[0])
                break
            lo = hi + 1
        verified = first_bad is None
        ev.append(Evidence("termwise_tail_bound_on_prefix", [tail_bound.start, N],
                           None if verified else float(first_bad), None, verified))
        if ok_p and verified:
            tail = tail_bound.tail_sum_bound(N)
            ev.append(Evidence("series_upper_bound", N, sums[-1] + tail, math.inf, True))
            notes.append("declared bound extrapolated beyond the verified prefix")
            return CertificateReport("i", EXPLOSION, params, ev, notes)
        notes.append("declared tail bound failed verification")
    elif shrinking:
        notes.append("increments shrink on the grid but no analytic tail bound was supplied")
    if divergent:
        notes.append("partial sums diverge: the reciprocal series condition does not apply")
    params["divergent_evidence"] = divergent
    return CertificateReport("i", INCONCLUSIVE, params, ev, notes)


# --------------------------------------------------------------------------
# condition (ii): slope, window sums, parameter triple, Chernoff term
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamTriple:
    t: float
    beta: float
    r: float

    def __post_init__(self):
        if not (self.t > 0 and self.beta > 0 and self.r > 0):
            raise DomainError("t, beta and r must be strictly positive")

    def window_threshold(self, eps: float) -> float:
        """(t + 2/beta)(1 + beta/(r eps)), the level the window sums must exceed."""
        return (self.t + 2 / self.beta) * (1 + self.beta / (self.r * eps))


def window_start(n: int, eps: float) -> int:
    return max(1, math.ceil(eps * math.log(n)))


def _search_axes(refine_around: ParamTriple | None = None):
    if refine_around is None:
        return (np.logspace(-4, 0, 9), np.logspace(0, 4, 9), np.logspace(0, 6, 13))
    c = refine_around
    return tuple(v * np.logspace(-0.25, 0.25, 5) for v in (c.t, c.beta, c.r))


def check_condition_ii(seq: RateSequence, eps: float, n_grid, triple_search_budget: int = 5000,
                       majorant: RateSequence | None = None) -> CertificateReport:
    """Four-stage non-explosion evidence on a grid of indices.

    1. lambda_n / n increases over the upper half of the grid.
    2. Window sums W(n) = sum_{ceil(eps log n)}^{n} 1/lambda_i do not decay;
       their minimum over the upper half of the grid is the liminf proxy.
    3. A triple (t, beta, r) with proxy > (t + 2/beta)(1 + beta/(r eps)) and
       lambda_i >= r i at every upper-half grid index.
    4. For every upper-half grid n, sum_{i<=n} 1/(lambda_i + beta log n) > t + 2/beta,
       equivalently the Chernoff term is at most n**-2.

    If the sequence itself fails and a ``majorant`` is given, the domination
    route is tried: lambda_i <= mu_i past a finite prefix and the majorant
    passing all four stages.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    grid = _check_grid(n_grid)
    if grid[0] < 2:
        raise DomainError("grid indices must be >= 2")
    own = _condition_ii_stages(seq, eps, grid, triple_search_budget)
    if own.certified or majorant is None:
        return own

    N = grid[-1]
    half_start = grid[len(grid) // 2]
    dom = is_dominated_by(seq, majorant, N)
    dom_ok = dom.holds_from <= half_start
    ev = [Evidence(f"own_{own.parameters.get('failed_stage', 'stage')}_failed", None, None)]
    ev.append(Evidence("domination_holds_from", [dom.holds_from, N], float(dom.holds_from),
                       float(half_start), dom_ok))
    params = {
        "rates": seq.to_descriptor(),
        "majorant": majorant.to_descriptor(),
        "eps": eps,
        "n_grid": grid,
        "domination": {
            "prefix": N,
            "first_violation": dom.first_violation,
            "last_violation": dom.last_violation,
            "violations": dom.n_violations,
        },
    }
    notes = [GRID_CAVEAT,
             "raising finitely many rates of the majorant keeps both limit conditions, "
             "so domination past a finite prefix suffices"]
    if not dom_ok:
        notes.append("domination fails on the upper half of the grid")
        return CertificateReport("ii", INCONCLUSIVE, params, ev, notes)
    sub = _condition_ii_stages(majorant, eps, grid, triple_search_budget)
    for e in sub.evidence:
        ev.append(Evidence("majorant." + e.name, e.index, e.value, e.threshold, e.holds))
    params["majorant_parameters"] = sub.parameters
    if sub.certified:
        params["route"] = "domination"
        return CertificateReport("ii", NON_EXPLOSION, params, ev, notes + ["certified by domination"])
    notes.append("majorant does not pass the four stages")
    return CertificateReport("ii", INCONCLUSIVE, params, ev, notes)


def _condition_ii_stages(seq, eps, grid, budget) -> CertificateReport:
    N = grid[-1]
    half = len(grid) // 2
    upper = grid[half:]
    inv = seq.inv_range(1, N)
    cum = np.concatenate([[0.0], np.cumsum(inv)])
    params: dict = {"rates": seq.to_descriptor(), "eps": eps, "n_grid": grid}
    ev: list[Evidence] = []
    notes = [GRID_CAVEAT]

    def fail(stage, witness, why):
        params["failed_stage"] = stage
        params["witness_index"] = witness
        notes.append(f"{stage} failed: {why}")
        return CertificateReport("ii", INCONCLUSIVE, params, ev, notes)

    # stage 1: slope lambda_n / n
    slope = [seq.log2(n) - math.log2(n) for n in grid]
    for n, s in zip(grid, slope):
        ev.append(Evidence("slope_log2", n, s))
    up = slope[half:]
    drops = [upper[j + 1] for j in range(len(up) - 1) if up[j + 1] < up[j]]
    stage1 = not drops and up[-1] > up[0]
    ev.append(Evidence("stage1_slope_increasing", [upper[0], N], up[-1] - up[0], 0.0, stage1))
    if not stage1:
        return fail("stage1", drops[0] if drops else N, "lambda_n / n does not grow on the grid")

    # stage 2: window sums
    W = []
    for n in grid:
        lo = window_start(n, eps)
        W.append(float(cum[n] - cum[lo - 1]))
        ev.append(Evidence("window_sum", [lo, n], W[-1]))
    proxy = min(W[half:])
    stage2 = proxy > 0 and W[-1] >= W[half]
    params["liminf_proxy"] = proxy
    ev.append(Evidence("stage2_window_liminf_proxy", [upper[0], N], proxy, 0.0, stage2))
    if not stage2:
        return fail("stage2", N, "window sums decay towards zero on the grid")

    # stages 3 and 4: witness search
    log2_upper = np.array([seq.log2(n) for n in upper])
    ln_grid = np.log(np.array(grid, dtype=np.float64))
    sums_cache: dict[float, np.ndarray] = {}

    def intensity_sums(beta):
        if beta not in sums_cache:
            sums_cache[beta] = np.array(
                [float(np.sum(inv[:n] / (1.0 + beta * ln * inv[:n]))) for n, ln in zip(grid, ln_grid)]
            )
        return sums_cache[beta]

    def side_ok(r):
        return bool(np.all(log2_upper >= math.log2(r) + np.log2(np.array(upper, dtype=np.float64))))

    def stage4(tr: ParamTriple):
        sums = intensity_sums(tr.beta)
        ok = sums > tr.t + 2 / tr.beta
        j = len(grid)
        while j > 0 and ok[j - 1]:
            j -= 1
        return j, sums

    evaluated = 0
    best: tuple[float, ParamTriple] | None = None
    witness = None
    for axes in (_search_axes(), None):
        if axes is None:
            if best is None:
                break
            axes = _search_axes(best[1])
        ts, betas, rs = axes
        for t in ts:
            for beta in betas:
                for r in rs:
                    if evaluated >= budget:
                        break
                    evaluated += 1
                    tr = ParamTriple(float(t), float(beta), float(r))
                    if not side_ok(tr.r):
                        continue
                    margin = tr.window_threshold(eps) / proxy
                    if margin >= 1:
                        if best is None or margin < best[0]:
                            best = (margin, tr)
                        continue
                    j, _ = stage4(tr)
                    if j <= half:
                        witness = tr
                        break
                    if best is None or margin < best[0]:
                        best = (margin, tr)
                if witness:
                    break
            if witness:
                break
        if witness:
            break
    params["triples_evaluated"] = evaluated
    if witness is None:
        return fail("stage3", N, "no (t, beta, r) satisfies the window and intensity inequalities")

    tr = witness
    params["triple"] = {"t": tr.t, "beta": tr.beta, "r": tr.r}
    ev.append(Evidence("stage3_window_exceeds_threshold", [upper[0], N], proxy, tr.window_threshold(eps), True))
    ev.append(Evidence("stage3_rate_at_least_r_times_index", [upper[0], N], float(np.min(
        log2_upper - np.log2(np.array(upper, dtype=np.float64)))), math.log2(tr.r), True))
    j, sums = stage4(tr)
    level = tr.t + 2 / tr.beta
    threshold_index = grid[j]
    params["chernoff_threshold_index"] = threshold_index
    for k, n in enumerate(grid):
        chern = tr.beta * ln_grid[k] * (tr.t - sums[k]) / math.log(2)
        if k >= j:
            ev.append(Evidence("intensity_sum", n, float(sums[k]), level, bool(sums[k] > level)))
            ev.append(Evidence("chernoff_term_log2", n, chern, -2 * math.log2(n), bool(chern <= -2 * math.log2(n))))
        else:
            ev.append(Evidence("intensity_sum", n, float(sums[k]), level, None))
            ev.append(Evidence("chernoff_term_log2", n, chern, -2 * math.log2(n), None))
    notes.append(f"Chernoff term below n^-2 for every grid n >= {threshold_index}")
    notes.append("side condition lambda_i >= r i checked on upper-half grid indices only")
    return CertificateReport("ii", NON_EXPLOSION, params, ev, notes)


# --------------------------------------------------------------------------
# iterated-log window sums
# --------------------------------------------------------------------------

@dataclass
class WindowTable:
    c: float
    k: int
    rows: list[tuple[int, float, float, float]]
    note: str = ("convergence of the ratio to 1 is slow, at the rate of the "
                 "next iterated logarithm; tolerances grow with k")


def window_min_n(k: int) -> float:
    """Smallest n with log^{(k+2)} n > 1 (so every iterated log in the asymptotic exceeds 1)."""
    return iterlog_threshold(k + 2)


def iterated_log_window(c: float, k: int, n_grid, chunk: int = 1 << 22) -> WindowTable:
    """Exact window sums sum_{ceil(log n)}^{n} 1/(c i log i ... log^{(k)} i) against
    c^-1 (log^{(k+1)} n - log^{(k+2)} n), streamed in chunks."""
    grid = _check_grid(n_grid)
    min_n = window_min_n(k)
    if grid[0] < min_n:
        raise DomainError(f"n={grid[0]} too small for k={k}: need n >= {min_n}")
    seq = RateSequence.iterated_log(c, k)
    starts = [max(1, math.ceil(math.log(n))) for n in grid]
    marks = sorted(set([s - 1 for s in starts] + grid))
    prefix = {0: 0.0}
    acc, lo = 0.0, 1
    for mk in marks:
        while lo <= mk:
            hi = min(mk, lo + chunk - 1)
            acc += float(np.sum(seq.inv_range(lo, hi)))
            lo = hi + 1
        prefix[mk] = acc
    rows = []
    for n, s in zip(grid, starts):
        exact = prefix[n] - prefix[s - 1]
        ln_k1 = n
        for _ in range(k + 1):
            ln_k1 = math.log(ln_k1)
        asym = (ln_k1 - math.log(ln_k1)) / c
        rows.append((n, exact, asym, exact / asym))
    return WindowTable(c, k, rows)


# --------------------------------------------------------------------------
# counterexample: explosive rates with divergent reciprocal series
# --------------------------------------------------------------------------

def M_value(i: int) -> int:
    """M_i = i + sum_{k<=i} d_k."""
    return i + sum(block_length(k) for k in range(1, i + 1))


def cube_root_floor_log2(i: int) -> int:
    """floor((log2 i)**(1/3)) computed exactly: largest m with 2**(m**3) <= i."""
    m = 0
    while 2 ** ((m + 1) ** 3) <= i:
        m += 1
    return m


def in_markov_set(k: int, i: int) -> bool:
    """True iff 2**(k**3) >= 2k^2 + k + i + 2 (otherwise k is in the complementary set).

    Exact integers for small k; once k**3 >= 60 membership is immediate because
    2**60 exceeds the right-hand side for every i < 2**59.
    """
    if k ** 3 >= 60:
        if i >= 2 ** 59:
            raise RateRangeError("index too large for the short-circuit block classification")
        return True
    return 2 ** (k ** 3) >= 2 * k * k + k + i + 2


def partition(i: int) -> tuple[list[int], list[int]]:
    """Split {2, ..., i+1} into the Markov set and the Gamma set."""
    A, B = [], []
    for k in range(2, i + 2):
        (A if in_markov_set(k, i) else B).append(k)
    return A, B


def _markov_factor_log2(k: int, i: int) -> float:
    """log2(1 - E S_k / t_{i,k}); exactly 0 in double precision once alpha_k is unrepresentable."""
    if k > MAX_PATHOLOGICAL_BLOCK:
        return 0.0
    v = markov_upper_tail_complement_log2(block_length(k), block_rate_log2(k), t_log2=-k - i - 1)
    if v is None:
        raise AssertionError(f"Markov bound vacuous for k={k}, i={i} although k is in the Markov set")
    return v


def counterexample_row(i: int, M_i: int, M_next: int) -> dict:
    """Evidence for one index i, all probabilities as log2 lower bounds."""
    log2_i = math.log2(i)
    # S_0 ~ Gamma(i + 2, 1) at 2^{-i-1}
    s0 = gamma_lower_bound_log2(GammaParams(i + 2, 0.0, -i - 1))
    s0_target = log2_i - i * i * LOG2_3
    # S_1 ~ Gamma(4, 4) at 2^{-i-2}, y = 2^{-i} <= 1
    g1 = GammaParams(block_length(1), block_rate_log2(1), -i - 2)
    s1_gamma = gamma_lower_bound_log2(g1)
    s1_stated = -LOG2E - 4 * i - 8

    A, B = partition(i)
    D = sum(block_length(k) for k in B)
    markov = [_markov_factor_log2(k, i) for k in A]
    gamma_B, stated_B = [], []
    for k in B:
        stated_B.append(-block_length(k) * LOG2E - i * block_length(k))
        gamma_B.append(gamma_lower_bound_log2(GammaParams(block_length(k), block_rate_log2(k), -k - i - 1)))

    stated_product = s1_stated - len(A) + sum(stated_B)
    combined_mid = -len(A) - i * D - 4 * i - 8 - (D + 1) * LOG2E
    combined_final = -i * D - 5 * i - 8 - (D + 1) * LOG2E
    sharp_product = max(s1_gamma, s1_stated) + sum(markov) + sum(max(g, s) for g, s in zip(gamma_B, stated_B))

    m = cube_root_floor_log2(i)
    f2_bound = block_length(m + 1) * len(B)
    cube = math.log2(i) ** (1 / 3) if i > 1 else 0.0
    f2_outer_log2 = 2 * (cube + 1) ** 2 + (math.log2(cube) if cube > 0 else -math.inf)

    main_product = i * i * LOG2_FOUR_THIRDS + sharp_product
    log2_M_over_i = math.log2(M_i) - log2_i
    return {
        "i": i,
        "t_log2": -i,
        "M": str(M_i) if M_i < 10 ** 30 else None,
        "M_log2": math.log2(M_i),
        "M_next_log2": math.log2(M_next),
        "M_exceeds_4_pow_i2": M_i > 4 ** (i * i),
        "S0_bound_log2": s0,
        "S0_target_log2": s0_target,
        "S0_margin_log2": s0 - s0_target,
        "S1_gamma_log2": s1_gamma,
        "S1_stated_log2": s1_stated,
        "S1_y_log2": g1.y_log2,
        "markov_set": A if len(A) <= 8 else [A[0], "...", A[-1]],
        "markov_set_size": len(A),
        "gamma_set": B,
        "D": D,
        "markov_factors_log2_min": min(markov) if markov else 0.0,
        "gamma_factors_log2": gamma_B,
        "stated_factors_log2": stated_B,
        "stated_product_log2": stated_product,
        "combined_mid_log2": combined_mid,
        "combined_final_log2": combined_final,
        "combined_identity_error": abs(stated_product - combined_mid),
        "sharp_product_log2": sharp_product,
        "D_bound": f2_bound,
        "D_within_bound": D <= f2_bound,
        "D_outer_bound_log2": f2_outer_log2,
        "gamma_set_smaller_than_cube_root": len(B) < cube,
        "next_block_outside_gamma_set": (m + 2) not in B,
        "main_product_log2": main_product,
        "main_product_combined_log2": i * i * LOG2_FOUR_THIRDS + combined_final,
        "main_target_log2": log2_M_over_i + s0 + sharp_product,
    }


def counterexample_certificate(i_max: int) -> CertificateReport:
    """Rows i = 1..i_max for the explosive rate sequence with divergent reciprocal sum.

    Verdict: explosion certified when the main-product log2 values are
    positive and strictly increasing on the last quarter of the i-range.
    """
    if i_max < 1:
        raise DomainError("i_max must be >= 1")
    if i_max > MAX_COUNTEREXAMPLE_I:
        raise RateRangeError(f"i_max={i_max} exceeds the exact-arithmetic budget of {MAX_COUNTEREXAMPLE_I}")
    rows = []
    M_i = 1 + block_length(1)
    for i in range(1, i_max + 1):
        M_next = M_i + 1 + block_length(i + 1)
        rows.append(counterexample_row(i, M_i, M_next))
        M_i = M_next

    ev: list[Evidence] = []
    for r in rows:
        i = r["i"]
        ev.append(Evidence("M_exceeds_4_pow_i2", i, r["M_log2"], 2.0 * i * i, r["M_exceeds_4_pow_i2"]))
        ev.append(Evidence("combined_identity", i, r["combined_identity_error"], 1e-9,
                           r["combined_identity_error"] <= 1e-9))
        ev.append(Evidence("D_within_bound", i, float(r["D"]), float(r["D_bound"]), r["D_within_bound"]))
        ev.append(Evidence("main_product_log2", i, r["main_product_log2"], 0.0, None))

    vals = [r["main_product_log2"] for r in rows]
    q = max(1, i_max - (i_max // 4))  # first index of the last quarter
    tail = vals[q - 1:]
    positive = all(v > 0 for v in tail)
    increasing = all(b > a for a, b in zip(tail, tail[1:]))
    ev.append(Evidence("main_product_positive_last_quarter", [q, i_max], min(tail), 0.0, positive))
    ev.append(Evidence("main_product_increasing_last_quarter", [q, i_max], None, None, increasing))

    # first index from which the sequence stays positive and increasing
    from_i = None
    for j in range(len(vals) - 1, -1, -1):
        if vals[j] > 0 and (j == len(vals) - 1 or vals[j + 1] > vals[j]):
            from_i = j + 1
        else:
            break
    if from_i == i_max and i_max > 1:
        from_i = None  # a single final point says nothing about growth
    gamma_set_start = next((r["i"] for r in rows if r["gamma_set"]), None)
    notes = [
        GRID_CAVEAT,
        "probability bounds in log2; M_i, d_k and the block classification in exact integers",
        f"main-product log2 positive and increasing from i = {from_i}" if from_i else
        "main-product log2 not eventually positive and increasing within the range",
    ]
    if gamma_set_start is not None:
        notes.append(f"gamma set first non-empty at i = {gamma_set_start}")
    cube_fail = [r["i"] for r in rows if not r["gamma_set_smaller_than_cube_root"] and r["gamma_set"]]
    if cube_fail:
        notes.append(f"gamma set not yet smaller than (log2 i)^(1/3) up to i = {cube_fail[-1]}")
    params = {"i_max": i_max, "t_schedule": "2^-i", "M_schedule": "i + sum_{k<=i} d_k",
              "positive_increasing_from": from_i, "gamma_set_first_nonempty": gamma_set_start}
    verdict = EXPLOSION if positive and increasing and all(e.holds is not False for e in ev) else INCONCLUSIVE
    return CertificateReport("iii", verdict, params, ev, notes, rows)


# --------------------------------------------------------------------------
# cross-check against simulation
# --------------------------------------------------------------------------

def certificate_vs_simulation(seq: RateSequence, report: CertificateReport, probe=None) -> dict:
    """Flag disagreements between a certificate and an explosion probe for human review.

    The certificate is never overridden.  ``probe`` is a ``cmj.ProbeTable``.
    """
    summary = {
        "rates": seq.to_descriptor(),
        "verdict": report.verdict,
        "simulation_evidence": False,
        "explosion_signal": None,
        "consistent": True,
        "flags": [],
    }
    if probe is None or probe.reps == 0 or not probe.horizons:
        summary["message"] = "no simulation evidence"
        return summary
    summary["simulation_evidence"] = True
    p_early = probe.probability[0]
    p_late = max(probe.probability)
    signal = p_late >= 0.5
    summary["explosion_signal"] = signal
    summary["probe"] = {"N": probe.N, "reps": probe.reps, "rows": [list(r) for r in probe.rows()]}
    if report.verdict == NON_EXPLOSION and p_early >= 0.5:
        summary["consistent"] = False
        summary["flags"].append(
            f"non-explosion certified but P(tau_N <= {probe.horizons[0]}) = {p_early:.3f}")
    if report.verdict == EXPLOSION and not signal:
        summary["consistent"] = False
        summary["flags"].append("explosion certified but the probe shows no early-birth mass at this N")
    summary["message"] = "consistent" if summary["consistent"] else "review suggested"
    return summary
