"""Birth-rate sequences lambda_i, i >= 1, stored and queried as log2(lambda_i).

Every family answers two questions: the scalar ``log2(i)`` and the vectorised
``log2_range(a, b)``.  Reciprocal rates are obtained as ``2**-log2`` and
underflow to exactly zero once ``log2(lambda_i)`` exceeds the double range,
which is the documented behaviour for the pathological sequence whose block
rates are ``2**(2**(k**3))``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, RateRangeError

KINDS = ("constant", "affine", "powerpa", "iterlog", "pathological", "table")

# largest k with 2**(k**3) finite as a double
MAX_PATHOLOGICAL_BLOCK = 10

_CHUNK = 1 << 20


# --------------------------------------------------------------------------
# pathological block structure: 1, a_1 x d_1, 1, a_2 x d_2, 1, ...
# --------------------------------------------------------------------------

def block_length(k: int) -> int:
    """d_k = 4**(k**2) as an exact integer."""
    return 4 ** (k * k)


def block_rate_log2(k: int) -> float:
    """log2(alpha_k) = 2**(k**3); raises once the value leaves the double range."""
    if k > MAX_PATHOLOGICAL_BLOCK:
        raise RateRangeError(
            f"pathological block {k}: log2(alpha_{k}) = 2**{k ** 3} exceeds the "
            f"double exponent range (first unrepresentable block is "
            f"{MAX_PATHOLOGICAL_BLOCK + 1})"
        )
    return float(2 ** (k ** 3))


def boundary_index(m: int) -> int:
    """Index of the m-th rate-1 boundary entry (m >= 1); the first is index 1."""
    if m < 1:
        raise DomainError("boundary number must be >= 1")
    return 1 + sum(block_length(k) + 1 for k in range(1, m))


def locate(i: int) -> tuple[int, bool]:
    """Return ``(m, is_boundary)`` for index i of the pathological sequence.

    Boundary m sits at ``boundary_index(m)``; block m occupies the d_m indices
    right after it.
    """
    if i < 1:
        raise DomainError(f"rate index must be >= 1, got {i}")
    b = 1
    m = 1
    while True:
        if i == b:
            return m, True
        end = b + block_length(m)
        if i <= end:
            return m, False
        b = end + 1
        m += 1


# --------------------------------------------------------------------------
# iterated logarithms
# --------------------------------------------------------------------------

def exp_tower(k: int) -> float:
    """e^e^...^e with k levels (exp_tower(0) = 1); ``inf`` once it overflows."""
    x = 1.0
    for _ in range(k):
        try:
            x = math.exp(x)
        except OverflowError:
            return math.inf
    return x


def _iterlog_above_one(i: int, k: int) -> bool:
    x = float(i)
    for _ in range(k):
        if x <= 0:
            return False
        x = math.log(x)
    return x > 1 if k else True


def iterlog_threshold(k: int) -> float:
    """Smallest integer i with log^{(j)} i > 1 for every j = 1..k.

    Returned as a float because for k >= 4 the threshold is ``inf`` (no
    double-representable index qualifies).
    """
    if k == 0:
        return 1
    tower = exp_tower(k)
    if math.isinf(tower) or tower > 2.0 ** 62:
        return math.inf
    th = int(math.floor(tower)) + 1
    while not _iterlog_above_one(th, k):
        th += 1
    while th > 1 and _iterlog_above_one(th - 1, k):
        th -= 1
    return th


def iterated_log(x, k: int):
    """k-fold natural logarithm, elementwise."""
    y = np.asarray(x, dtype=np.float64)
    for _ in range(k):
        y = np.log(y)
    return y


# --------------------------------------------------------------------------
# the rate sequence
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RateSequence:
    """A strictly positive rate per index i >= 1.

    Build instances through the classmethods (``constant``, ``affine``,
    ``power``, ``iterated_log``, ``pathological``, ``table``) or from a JSON
    descriptor with :meth:`from_descriptor`.
    """

    kind: str
    params: dict = field(default_factory=dict)
    _table: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown rate kind {self.kind!r}; expected one of {KINDS}")
        p = self.params
        if self.kind == "constant":
            if not p.get("c", 0) > 0:
                raise ConfigError("constant rate needs c > 0")
        elif self.kind == "affine":
            a, b = p.get("a"), p.get("b")
            if a is None or b is None or a < 0 or a + b <= 0:
                raise ConfigError("affine rate a*i + b needs a >= 0 and a + b > 0")
        elif self.kind == "powerpa":
            if "p" not in p or not math.isfinite(p["p"]):
                raise ConfigError("power rate needs a finite exponent p")
        elif self.kind == "iterlog":
            if not p.get("c", 0) > 0 or int(p.get("k", -1)) < 0:
                raise ConfigError("iterated-log rate needs c > 0 and integer k >= 0")
        elif self.kind == "table":
            tab = np.asarray(p.get("log2_values", ()), dtype=np.float64)
            if tab.size == 0 or not np.all(np.isfinite(tab)):
                raise ConfigError("table rate needs a non-empty list of finite log2 values")
            object.__setattr__(self, "_table", tab)

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, c: float = 1.0) -> RateSequence:
        return cls("constant", {"c": float(c)})

    @classmethod
    def affine(cls, a: float, b: float) -> RateSequence:
        return cls("affine", {"a": float(a), "b": float(b)})

    @classmethod
    def power(cls, p: float) -> RateSequence:
        return cls("powerpa", {"p": float(p)})

    @classmethod
    def iterated_log(cls, c: float, k: int) -> RateSequence:
        return cls("iterlog", {"c": float(c), "k": int(k)})

    @classmethod
    def pathological(cls) -> RateSequence:
        return cls("pathological", {})

    @classmethod
    def table(cls, log2_values) -> RateSequence:
        return cls("table", {"log2_values": [float(v) for v in log2_values]})

    # -- descriptors ----------------------------------------------------------

    def to_descriptor(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}

    @classmethod
    def from_descriptor(cls, desc: dict, base_dir: Path | None = None) -> RateSequence:
        """Build from ``{"kind": ..., "params": {...}}``.

        A table may give its values inline (``log2_values``) or as ``path``
        to a CSV file with one log2 value per line.
        """
        if not isinstance(desc, dict) or "kind" not in desc:
            raise ConfigError("rate descriptor must be an object with a 'kind' field")
        kind = desc["kind"]
        params = dict(desc.get("params", {}))
        if kind == "table" and "path" in params:
            path = Path(params.pop("path"))
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            params["log2_values"] = read_table_csv(path)
        try:
            if kind == "iterlog" and "k" in params:
                params["k"] = int(params["k"])
            return cls(kind, params)
        except TypeError as exc:
            raise ConfigError(f"bad parameters for rate kind {kind!r}: {exc}") from None

    @classmethod
    def parse(cls, text: str) -> RateSequence:
        """Parse the short CLI form, e.g. ``constant:1``, ``affine:1,0``,
        ``powerpa:2``, ``iterlog:1,1``, ``pathological``, ``table:rates.csv``."""
        name, _, rest = text.partition(":")
        name = name.strip().lower()
        args = [s for s in rest.split(",") if s.strip()] if rest else []
        try:
            if name == "constant":
                return cls.constant(float(args[0]) if args else 1.0)
            if name == "affine":
                return cls.affine(float(args[0]), float(args[1]))
            if name in ("powerpa", "power"):
                return cls.power(float(args[0]))
            if name in ("iterlog", "iteratedlog"):
                return cls.iterated_log(float(args[0]), int(args[1]))
            if name == "pathological":
                return cls.pathological()
            if name == "table":
                return cls.table(read_table_csv(Path(rest)))
        except (IndexError, ValueError) as exc:
            raise ConfigError(f"cannot parse rate descriptor {text!r}: {exc}") from None
        raise ConfigError(f"unknown rate kind in {text!r}")

    # -- queries --------------------------------------------------------------

    @property
    def threshold(self) -> float:
        """First index from which the iterated-log formula applies (1 otherwise)."""
        if self.kind == "iterlog":
            return iterlog_threshold(self.params["k"])
        return 1

    @property
    def length(self) -> float:
        """Number of defined indices (finite only for tables)."""
        return len(self._table) if self.kind == "table" else math.inf

    def log2(self, i: int) -> float:
        if i < 1:
            raise DomainError(f"rate index must be >= 1, got {i}")
        kind, p = self.kind, self.params
        if kind == "constant":
            return math.log2(p["c"])
        if kind == "affine":
            return math.log2(p["a"] * i + p["b"])
        if kind == "powerpa":
            return p["p"] * math.log2(i)
        if kind == "iterlog":
            c, k = p["c"], p["k"]
            if i < self.threshold:
                return math.log2(c)
            val = math.log2(c) + math.log2(i)
            x = float(i)
            for _ in range(k):
                x = math.log(x)
                val += math.log2(x)
            return val
        if kind == "pathological":
            m, at_boundary = locate(i)
            return 0.0 if at_boundary else block_rate_log2(m)
        if i > len(self._table):
            raise DomainError(f"index {i} beyond rate table of length {len(self._table)}")
        return float(self._table[i - 1])

    def log2_range(self, a: int, b: int) -> np.ndarray:
        """log2(lambda_i) for i = a..b inclusive as a float64 array."""
        if a < 1:
            raise DomainError(f"rate index must be >= 1, got {a}")
        if b < a:
            return np.empty(0)
        kind, p = self.kind, self.params
        if kind == "constant":
            return np.full(b - a + 1, math.log2(p["c"]))
        idx = np.arange(a, b + 1, dtype=np.float64)
        if kind == "affine":
            return np.log2(p["a"] * idx + p["b"])
        if kind == "powerpa":
            return p["p"] * np.log2(idx)
        if kind == "iterlog":
            c, k = p["c"], p["k"]
            out = np.full(idx.shape, math.log2(c))
            mask = idx >= self.threshold
            if mask.any():
                x = idx[mask]
                val = math.log2(c) + np.log2(x)
                for _ in range(k):
                    x = np.log(x)
                    val += np.log2(x)
                out[mask] = val
            return out
        if kind == "pathological":
            return _pathological_range(a, b)
        if b > len(self._table):
            raise DomainError(f"index {b} beyond rate table of length {len(self._table)}")
        return self._table[a - 1:b].copy()

    def inv_range(self, a: int, b: int) -> np.ndarray:
        """Reciprocal rates 1/lambda_i for i = a..b, underflowing to 0."""
        with np.errstate(under="ignore"):
            return np.exp2(-self.log2_range(a, b))


def _pathological_range(a: int, b: int) -> np.ndarray:
    out = np.empty(b - a + 1)
    m, _ = locate(a)
    start = boundary_index(m)
    while start <= b:
        # boundary entry
        if a <= start:
            out[start - a] = 0.0
        lo, hi = start + 1, start + block_length(m)
        s, e = max(lo, a), min(hi, b)
        if s <= e:
            out[s - a:e - a + 1] = block_rate_log2(m)
        start = hi + 1
        m += 1
    return out


def read_table_csv(path: Path) -> list[float]:
    """Read one log2 rate per line (first column; blank lines and '#' comments skipped)."""
    values = []
    try:
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or not row[0].strip() or row[0].lstrip().startswith("#"):
                    continue
                values.append(float(row[0]))
    except OSError as exc:
        raise ConfigError(f"cannot read rate table {path}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"bad value in rate table {path}: {exc}") from None
    return values


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------

def rate_log2(seq: RateSequence, i: int) -> float:
    """log2(lambda_i)."""
    return seq.log2(i)


def reciprocal_partial_sum(seq: RateSequence, a: int, b: int, max_index: int = 10 ** 10) -> float:
    """Sum of 1/lambda_i for i = a..b.

    Terms are ``2**-log2(lambda_i)``; those below the smallest positive double
    contribute exactly zero.  Chunks are summed with ``math.fsum`` so the result
    is correctly rounded and additive over adjacent ranges.
    """
    if a < 1 or b < a:
        raise DomainError(f"need 1 <= a <= b, got a={a}, b={b}")
    if b > max_index:
        raise DomainError(f"b={b} exceeds the configured maximum index {max_index}")
    partials = []
    lo = a
    while lo <= b:
        hi = min(b, lo + _CHUNK - 1)
        partials.extend(seq.inv_range(lo, hi).tolist())
        partials = [math.fsum(partials)]
        lo = hi + 1
    return math.fsum(partials)


@dataclass(frozen=True)
class DominationResult:
    """Finite-prefix evidence that lambda_i <= mu_i; truthy iff no violation."""

    dominated: bool
    prefix: int
    first_violation: int | None
    last_violation: int | None
    n_violations: int

    def __bool__(self):
        return self.dominated

    @property
    def holds_from(self) -> int:
        """First index after which the comparison holds up to the prefix."""
        return 1 if self.last_violation is None else self.last_violation + 1


def is_dominated_by(seq: RateSequence, majorant: RateSequence, prefix: int, start: int = 1) -> DominationResult:
    """Compare lambda_i <= mu_i in log2 for every i in start..prefix."""
    if prefix < 1:
        raise DomainError("prefix must be >= 1")
    first = last = None
    count = 0
    lo = start
    while lo <= prefix:
        hi = min(prefix, lo + _CHUNK - 1)
        bad = np.nonzero(seq.log2_range(lo, hi) > majorant.log2_range(lo, hi))[0]
        if bad.size:
            if first is None:
                first = lo + int(bad[0])
            last = lo + int(bad[-1])
            count += int(bad.size)
        lo = hi + 1
    return DominationResult(count == 0, prefix, first, last, count)
