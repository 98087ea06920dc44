"""General preferential attachment trees without fitness.

Vertex n attaches to an existing vertex m with probability proportional to
f(out-degree of m).  Growing with weight f has the same law as the discrete
skeleton of a pure-birth CMJ process with rates lambda_i = f(i - 1); the
``coupling_test`` checks this statistically, step by step.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .cmj import Genealogy, simulate
from .errors import ConfigError, DomainError
from .harness import ReplicateHarness
from .purebirth import Count
from .rates import RateSequence
from .rng import PURPOSE_COUPLING, open_uniforms, stream

FENWICK_THRESHOLD = 10 ** 4
MIN_EXPECTED = 5.0


@dataclass(frozen=True)
class WeightFunction:
    """Attachment weight f: N_0 -> (0, inf).

    kinds: ``constant`` (f = c), ``affine`` (f(k) = k + shift),
    ``power`` (f(k) = (k + 1)**p), ``table`` (f(k) = values[k]).
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("constant", "affine", "power", "table"):
            raise ConfigError(f"unknown weight kind {self.kind!r}")
        if self.kind == "constant" and not self.params.get("c", 0) > 0:
            raise ConfigError("constant weight needs c > 0")
        if self.kind == "affine" and not self.params.get("shift", 0) > 0:
            raise ConfigError("affine weight k + shift needs shift > 0")
        if self.kind == "table":
            vals = self.params.get("values", ())
            if not vals or not all(math.isfinite(v) and v > 0 for v in vals):
                raise ConfigError("table weight needs finite positive values")

    @classmethod
    def constant(cls, c: float = 1.0) -> WeightFunction:
        return cls("constant", {"c": float(c)})

    @classmethod
    def affine(cls, shift: float) -> WeightFunction:
        return cls("affine", {"shift": float(shift)})

    @classmethod
    def power(cls, p: float) -> WeightFunction:
        return cls("power", {"p": float(p)})

    @classmethod
    def table(cls, values) -> WeightFunction:
        return cls("table", {"values": [float(v) for v in values]})

    @classmethod
    def parse(cls, text: str) -> WeightFunction:
        """``constant[:c]``, ``affine:shift``, ``power:p``."""
        name, _, rest = text.partition(":")
        try:
            if name == "constant":
                return cls.constant(float(rest) if rest else 1.0)
            if name == "affine":
                return cls.affine(float(rest))
            if name == "power":
                return cls.power(float(rest))
        except ValueError as exc:
            raise ConfigError(f"cannot parse weight {text!r}: {exc}") from None
        raise ConfigError(f"unknown weight function {text!r}")

    def __call__(self, k: int) -> float:
        p = self.params
        if self.kind == "constant":
            v = p["c"]
        elif self.kind == "affine":
            v = k + p["shift"]
        elif self.kind == "power":
            v = (k + 1) ** p["p"]
        else:
            vals = p["values"]
            if k >= len(vals):
                raise DomainError(f"weight table has no entry for degree {k}")
            v = vals[k]
        v = float(v)
        if not (math.isfinite(v) and v > 0):
            raise ConfigError(f"weight f({k}) = {v} is not a finite positive number")
        return v

    def to_rates(self) -> RateSequence:
        """The CMJ rate sequence lambda_i = f(i - 1)."""
        p = self.params
        if self.kind == "constant":
            return RateSequence.constant(p["c"])
        if self.kind == "affine":
            return RateSequence.affine(1.0, p["shift"] - 1.0)
        if self.kind == "power":
            return RateSequence.power(p["p"])
        return RateSequence.table([math.log2(v) for v in p["values"]])

    def to_descriptor(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}


@dataclass
class PATree:
    """Recursive tree on vertices 0..n-1 with ``parent[0] == -1``."""

    parent: np.ndarray
    totals: np.ndarray | None = None  # running denominators, when recorded

    def __post_init__(self):
        self.parent = np.asarray(self.parent, dtype=np.int64)

    def __len__(self):
        return len(self.parent)

    @property
    def out_degree(self) -> np.ndarray:
        n = len(self.parent)
        if n == 1:
            return np.zeros(1, dtype=np.int64)
        return np.bincount(self.parent[1:], minlength=n)

    def depth(self) -> np.ndarray:
        par = self.parent.tolist()
        d = [0] * len(par)
        for v in range(1, len(par)):
            d[v] = d[par[v]] + 1
        return np.array(d, dtype=np.int64)


class _Fenwick:
    def __init__(self, size: int):
        self.n = size
        self.tree = [0.0] * (size + 1)
        self.top = 1 << (size.bit_length() - 1) if size else 0

    def add(self, i: int, delta: float):
        i += 1
        tree, n = self.tree, self.n
        while i <= n:
            tree[i] += delta
            i += i & -i

    def search(self, target: float) -> int:
        """Smallest index whose prefix sum (inclusive) exceeds target."""
        pos = 0
        step = self.top
        tree, n = self.tree, self.n
        while step:
            nxt = pos + step
            if nxt <= n and tree[nxt] <= target:
                pos = nxt
                target -= tree[nxt]
            step >>= 1
        return pos


def grow(f: WeightFunction, n: int, rng: np.random.Generator, method: str = "auto",
         record_totals: bool = False) -> PATree:
    """Attach vertices 1..n one at a time by the degree-weighted rule.

    The denominator is updated incrementally: ``f(d + 1) - f(d)`` for the
    chosen parent plus ``f(0)`` for the newcomer.  ``method`` is ``scan``,
    ``fenwick`` or ``auto`` (scan up to 10**4 vertices); both consume the same
    uniform per step and agree exactly whenever the partial sums are exact.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if method == "auto":
        method = "scan" if n <= FENWICK_THRESHOLD else "fenwick"
    if method not in ("scan", "fenwick"):
        raise ConfigError(f"unknown sampling method {method!r}")

    cache: list[float] = []

    def weight(k: int) -> float:
        while len(cache) <= k:
            cache.append(f(len(cache)))
        return cache[k]

    u = open_uniforms(rng, n)
    parent = np.full(n + 1, -1, dtype=np.int64)
    deg = [0] * (n + 1)
    w0 = weight(0)
    total = w0
    totals = np.empty(n) if record_totals else None

    if method == "scan":
        w = np.zeros(n + 1)
        w[0] = w0
        for v in range(1, n + 1):
            if record_totals:
                totals[v - 1] = total
            cums = np.cumsum(w[:v])
            m = min(int(np.searchsorted(cums, u[v - 1] * total, side="right")), v - 1)
            parent[v] = m
            d = deg[m]
            deg[m] = d + 1
            w[m] = weight(d + 1)
            w[v] = w0
            total += (weight(d + 1) - weight(d)) + w0
    else:
        fw = _Fenwick(n + 1)
        fw.add(0, w0)
        for v in range(1, n + 1):
            if record_totals:
                totals[v - 1] = total
            m = min(fw.search(u[v - 1] * total), v - 1)
            parent[v] = m
            d = deg[m]
            deg[m] = d + 1
            delta = weight(d + 1) - weight(d)
            fw.add(m, delta)
            fw.add(v, w0)
            total += delta + w0
    return PATree(parent, totals)


def skeleton(g: Genealogy) -> PATree:
    """Read a CMJ genealogy (already in birth order) as a recursive tree."""
    return PATree(np.array(g.parent, copy=True))


# --------------------------------------------------------------------------
# coupling test
# --------------------------------------------------------------------------

def attachment_probabilities(f: WeightFunction, prefix_parents) -> np.ndarray:
    """Exact probabilities for the parent of the next vertex given the prefix tree.

    ``prefix_parents`` lists the parents of vertices 1..m-1.
    """
    m = len(prefix_parents) + 1
    deg = np.bincount(np.asarray(prefix_parents, dtype=np.int64), minlength=m) if m > 1 else np.zeros(1, int)
    w = np.array([f(int(k)) for k in deg])
    return w / w.sum()


def _widened_chisq(observed: np.ndarray, expected: np.ndarray) -> tuple[float, int]:
    """Pearson statistic after merging the smallest cells until each has E >= 5."""
    cells = sorted(zip(expected.tolist(), observed.astype(float).tolist()))
    while len(cells) > 1 and cells[0][0] < MIN_EXPECTED:
        (e0, o0), (e1, o1) = cells[0], cells[1]
        cells = sorted([(e0 + e1, o0 + o1)] + cells[2:])
    e = [c[0] for c in cells]
    o = [c[1] for c in cells]
    if len(e) < 2:
        return 0.0, 0
    stat = sum((oi - ei) ** 2 / ei for oi, ei in zip(o, e))
    return float(stat), len(e) - 1


@dataclass
class StepResult:
    step: int
    statistic: float
    df: int
    p_value: float
    groups: int
    dropped: int
    frequencies: list[float]
    expected_frequencies: list[float]

    @property
    def underpowered(self) -> bool:
        return self.df == 0 and self.step > 1


@dataclass
class CouplingReport:
    weight: dict
    n: int
    reps: int
    seed: int
    steps: list[StepResult]

    @property
    def underpowered(self) -> bool:
        return self.reps < 10 ** 4 or any(s.underpowered for s in self.steps)

    def min_p_value(self) -> float:
        return min((s.p_value for s in self.steps if not s.underpowered), default=math.nan)

    def passes(self, alpha: float = 1e-3) -> bool:
        return all(s.underpowered or s.p_value > alpha for s in self.steps)

    def to_dict(self) -> dict:
        return {
            "weight": self.weight,
            "n": self.n,
            "reps": self.reps,
            "seed": self.seed,
            "underpowered": self.underpowered,
            "steps": [
                {
                    "step": s.step,
                    "statistic": s.statistic,
                    "df": s.df,
                    "p_value": s.p_value,
                    "groups": s.groups,
                    "dropped": s.dropped,
                    "frequencies": s.frequencies,
                    "expected_frequencies": s.expected_frequencies,
                }
                for s in self.steps
            ],
        }


def _skeleton_rep(seed, rep, rates, n):
    g = simulate(rates, Count(n + 1), stream(seed, rep, PURPOSE_COUPLING))
    return tuple(g.parent[1:].tolist())


def coupling_test(f: WeightFunction, n: int, reps: int, seed: int, workers: int = 1,
                  rates: RateSequence | None = None) -> CouplingReport:
    """Compare CMJ skeleton parent choices with the exact attachment law.

    For each step m = 1..n the replicates are grouped by the realised prefix
    tree on vertices 0..m-1; within a group the parent of m must follow the
    exact conditional probabilities.  Per-group Pearson statistics (cells
    widened to E >= 5) are pooled into one chi-square test per step.

    ``rates`` overrides the CMJ rates (default lambda_i = f(i - 1)); useful as
    a negative control.
    """
    if not 1 <= n <= 8:
        raise DomainError("coupling test supports 1 <= n <= 8")
    if rates is None:
        rates = f.to_rates()
    trees = ReplicateHarness(seed, reps, workers).map(_skeleton_rep, rates, n)
    steps = []
    for m in range(1, n + 1):
        groups: dict[tuple, np.ndarray] = defaultdict(lambda: np.zeros(m, dtype=np.int64))
        for tr in trees:
            groups[tr[:m - 1]][tr[m - 1]] += 1
        stat, df, used, dropped = 0.0, 0, 0, 0
        pooled_obs = np.zeros(m)
        pooled_exp = np.zeros(m)
        for prefix, obs in groups.items():
            probs = attachment_probabilities(f, prefix)
            total = int(obs.sum())
            pooled_obs += obs
            pooled_exp += probs * total
            s, k = _widened_chisq(obs, probs * total)
            if k == 0:
                dropped += total
                continue
            stat += s
            df += k
            used += 1
        if m == 1:
            p = 1.0  # single candidate: the law is degenerate
        else:
            p = float(stats.chi2.sf(stat, df)) if df > 0 else math.nan
        steps.append(StepResult(m, stat, df, p, used, dropped,
                                (pooled_obs / reps).tolist(), (pooled_exp / reps).tolist()))
    return CouplingReport(f.to_descriptor(), n, reps, seed, steps)


# --------------------------------------------------------------------------
# shape diagnostics
# --------------------------------------------------------------------------

STAR_LIKE = "StarLike"
PATH_LIKE = "PathLike"
MIXED = "Mixed"
INCONCLUSIVE = "Inconclusive"


@dataclass
class ShapeDiagnostics:
    """Max out-degree and height at checkpoint sizes, plus a heuristic label.

    The label compares finite-size growth only; it says nothing provable about
    infinite stars or paths in the limiting tree.
    """

    max_degree_trajectory: list[tuple[int, int]]
    height_trajectory: list[tuple[int, int]]
    verdict_hint: str


def shape_diagnostics(t: PATree, checkpoints) -> ShapeDiagnostics:
    """Trajectories at the given tree sizes (number of vertices, ascending)."""
    checkpoints = [int(c) for c in checkpoints]
    if any(b < a for a, b in zip(checkpoints, checkpoints[1:])):
        raise DomainError("checkpoints must be ascending")
    if checkpoints and (checkpoints[0] < 1 or checkpoints[-1] > len(t)):
        raise DomainError(f"checkpoints must lie in 1..{len(t)}")
    par = t.parent.tolist()
    deg = [0] * len(par)
    depth = [0] * len(par)
    max_deg = height = 0
    degs, heights = [], []
    ci = 0
    for v in range(len(par) + 1):
        while ci < len(checkpoints) and checkpoints[ci] == v:
            degs.append((v, max_deg))
            heights.append((v, height))
            ci += 1
        if v == len(par) or ci == len(checkpoints):
            break
        if v:
            p = par[v]
            deg[p] += 1
            depth[v] = depth[p] + 1
            max_deg = max(max_deg, deg[p])
            height = max(height, depth[v])
    return ShapeDiagnostics(degs, heights, _verdict(degs, heights))


def _verdict(degs, heights) -> str:
    if not degs:
        return INCONCLUSIVE
    D, H = degs[-1][1], heights[-1][1]
    if H == 0:
        return INCONCLUSIVE
    ratio = D / H
    if ratio > 10:
        return STAR_LIKE
    if ratio < 0.1:
        return PATH_LIKE
    if len(degs) > 1 and D > degs[0][1] and H > heights[0][1]:
        return MIXED
    return INCONCLUSIVE
