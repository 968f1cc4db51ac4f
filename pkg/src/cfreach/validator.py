"""A-posteriori accuracy of a fitted estimate on fresh samples."""
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch
from .pac import ChernoffParams, accuracy_lower_bound, chernoff_sample_size
from .sampler import generate_cloud

# validation streams are keyed by seed ^ this, never by the training seed itself
VALIDATION_SALT = 0x9E3779B97F4A7C15


def validation_seed(seed):
    return (int(seed) ^ VALIDATION_SALT) & 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class AccuracyReport:
    n_ap: int
    n_out: int
    chernoff: ChernoffParams
    seed: int = None
    outliers: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.n_out <= self.n_ap:
            raise ValueError(f"n_out={self.n_out} outside [0, n_ap={self.n_ap}]")

    @property
    def empirical_accuracy(self):
        return 1.0 - self.n_out / self.n_ap

    @property
    def certified_lower_bound(self):
        return accuracy_lower_bound(self)

    def to_dict(self):
        return {
            "n_ap": self.n_ap,
            "n_out": self.n_out,
            "empirical_accuracy": self.empirical_accuracy,
            "margin": self.chernoff.margin,
            "confidence": self.chernoff.confidence,
            "certified_lower_bound": self.certified_lower_bound,
            "seed": self.seed,
        }


def count_outside(est, points, threads=1):
    """Indices of the points with C(x) > alpha."""
    inside = est.contains(np.asarray(points, dtype=float), threads)
    return np.flatnonzero(~np.atleast_1d(inside))


def validate_points(est, points, chernoff, seed=None, keep_outliers=False, threads=1):
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != est.n:
        raise DimensionMismatch(f"estimator dimension {est.n}, points shape {points.shape}")
    bad = count_outside(est, points, threads)
    return AccuracyReport(
        n_ap=points.shape[0],
        n_out=int(bad.size),
        chernoff=chernoff,
        seed=seed,
        outliers=points[bad] if keep_outliers else None,
    )


def validate(est, problem, chernoff, seed, keep_outliers=False, threads=1):
    """Draw chernoff_sample_size(chernoff) fresh endpoints and count misses.

    ``seed`` is salted before use, so passing the training seed still yields
    samples independent of the training cloud.
    """
    if problem.dim != est.n:
        raise DimensionMismatch(
            f"problem stores {problem.dim}-dimensional states, estimator expects {est.n}"
        )
    n_ap = chernoff_sample_size(chernoff)
    cloud = generate_cloud(problem, n_ap, validation_seed(seed), threads)
    return validate_points(est, cloud.points, chernoff, seed, keep_outliers, threads)
