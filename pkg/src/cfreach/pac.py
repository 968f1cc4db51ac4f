"""Sample-size bounds behind the probabilistic guarantees.

``pac_sample_size`` is the a-priori count that makes the Christoffel sublevel
set epsilon-accurate with confidence 1 - delta. ``chernoff_sample_size`` is the
a-posteriori count used to certify an estimate on fresh samples.
"""
from dataclasses import dataclass
from math import ceil, log

from .basis import checked_binomial


def _check_unit(name, value):
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {value!r}")


@dataclass(frozen=True)
class PacParams:
    epsilon: float
    delta: float
    n: int
    k: int

    def __post_init__(self):
        _check_unit("epsilon", self.epsilon)
        _check_unit("delta", self.delta)
        if self.n < 1 or self.k < 0:
            raise ValueError(f"need n >= 1 and k >= 0, got n={self.n}, k={self.k}")


@dataclass(frozen=True)
class ChernoffParams:
    margin: float
    confidence: float

    def __post_init__(self):
        _check_unit("margin", self.margin)
        _check_unit("confidence", self.confidence)


def vc_dimension(n, k):
    """VC dimension of degree-2k polynomial sublevel sets in n variables."""
    if n < 1 or k < 0:
        raise ValueError(f"need n >= 1 and k >= 0, got n={n}, k={k}")
    return checked_binomial(n + 2 * k, n)


def pac_sample_size(p):
    """ceil((5/eps) * (ln(4/delta) + vc * ln(40/eps))), natural logs, one ceiling."""
    vc = vc_dimension(p.n, p.k)
    return ceil(5.0 / p.epsilon * (log(4.0 / p.delta) + vc * log(40.0 / p.epsilon)))


def chernoff_sample_size(c):
    """One-sided Hoeffding count: ceil(ln(1/(1-confidence)) / (2 margin^2))."""
    return ceil(log(1.0 / (1.0 - c.confidence)) / (2.0 * c.margin**2))


def accuracy_lower_bound(report):
    """Certified accuracy: empirical accuracy minus the margin, clamped to [0, 1]."""
    value = report.empirical_accuracy - report.chernoff.margin
    return min(1.0, max(0.0, value))
