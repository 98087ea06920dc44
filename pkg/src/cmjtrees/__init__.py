"""Pure-birth Crump-Mode-Jagers processes and general preferential attachment trees.

The package simulates CMJ populations whose individuals reproduce according to
a pure birth point process, grows preferential attachment trees, checks the
distributional coupling between the two, and evaluates explosion and
non-explosion certificates with all extreme-range arithmetic kept in log2.
"""

from .errors import ConfigError, DomainError, RateRangeError
from .rates import RateSequence, rate_log2, reciprocal_partial_sum, is_dominated_by
from .purebirth import Count, Horizon
from .rng import stream

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Count",
    "DomainError",
    "Horizon",
    "RateRangeError",
    "RateSequence",
    "is_dominated_by",
    "rate_log2",
    "reciprocal_partial_sum",
    "stream",
]
