"""Data-driven reachable set estimation with empirical inverse Christoffel functions.

Sample trajectory endpoints, fit C(x) = z(x)^T M^{-1} z(x) to them, and use
{x : C(x) <= alpha} as the reachable set estimate, with PAC sample sizes and
a-posteriori validation.
"""
from ._backend import available as available_backends
from .basis import MonomialBasis, basis_size, enumerate_basis, eval_basis
from .christoffel import ChristoffelEstimator, NormalizationMap, fit, level_from_points
from .errors import (
    DimensionMismatch,
    InsufficientSamples,
    MonotonicityViolated,
    NonFiniteState,
    SingularMoment,
)
from .pac import (
    ChernoffParams,
    PacParams,
    accuracy_lower_bound,
    chernoff_sample_size,
    pac_sample_size,
    vc_dimension,
)
from .sampler import ReachabilityProblem, SampleCloud, generate_cloud, project
from .systems import IntegratorConfig, make_system, monotone_interval, simulate
from .validator import AccuracyReport, validate

__version__ = "0.1.0"
