"""Empirical inverse Christoffel function and its sublevel-set estimate.

Given points x_1..x_N and a degree k, the fitted function is

    C(x) = z(x)^T M^{-1} z(x),    M = (1/N) sum_i z(x_i) z(x_i)^T,

with z the degree <= k monomial vector, and the estimate is {x : C(x) <= alpha}
where alpha is the largest C over the training points. Points are rescaled to
[-1, 1]^n before anything is accumulated; C is invariant under that change of
polynomial coordinates, and without it degree-20 moments are hopeless in
double precision.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from . import _backend
from .basis import MonomialBasis, basis_size, enumerate_basis
from .errors import DimensionMismatch, InsufficientSamples, SingularMoment

# relative jitter ladder (times trace/m), tried after a plain factorization fails
JITTER_LADDER = tuple(10.0**-e for e in range(12, 5, -1))


@dataclass(frozen=True)
class NormalizationMap:
    offset: np.ndarray
    scale: np.ndarray

    @classmethod
    def identity(cls, n):
        return cls(np.zeros(n), np.ones(n))

    @classmethod
    def from_points(cls, X):
        """Map the bounding box of ``X`` onto [-1, 1]^n."""
        lo = X.min(axis=0)
        hi = X.max(axis=0)
        offset = 0.5 * (lo + hi)
        scale = 0.5 * (hi - lo)
        flat = ~(scale > 0)
        offset[flat] = lo[flat]
        scale[flat] = 1.0
        return cls(offset, scale)

    def apply(self, X):
        return np.ascontiguousarray((np.asarray(X, dtype=float) - self.offset) / self.scale)


def _as_points(data):
    X = np.asarray(getattr(data, "points", data), dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise DimensionMismatch(f"expected an (N, n) point array, got shape {X.shape}")
    return np.ascontiguousarray(X)


def moment_matrix(Xn, basis, threads=1):
    """(1/N) sum z z^T over already-normalized points.

    Chunks of fixed size are accumulated independently and combined with a
    fixed pairwise tree, so serial and threaded runs give identical bits.
    """
    kern = _backend.kernels
    m = basis.size

    def partial(a, b):
        S = np.empty((m, m))
        kern.moment_partial(Xn[a:b], basis.pred, basis.var, S)
        return S

    total = _backend.pairwise_sum(_backend.iter_chunks(partial, Xn.shape[0], threads))
    return total / Xn.shape[0]


def factorize(M, k=None):
    """Cholesky factor of M, adding escalating diagonal jitter on failure.

    A factorization also counts as failed when a squared pivot falls below
    half the first jitter rung: such a matrix is singular to working precision.
    Returns (L, jitter) with L L^T = M + jitter * I.
    """
    m = M.shape[0]
    unit = np.trace(M) / m
    min_pivot = 0.5 * JITTER_LADDER[0] * unit
    levels = [0.0] + [rel * unit for rel in JITTER_LADDER]
    for jitter in levels:
        try:
            L = np.linalg.cholesky(M + jitter * np.eye(m))
        except np.linalg.LinAlgError:
            continue
        if np.all(np.isfinite(L)) and np.all(np.diag(L) ** 2 >= min_pivot):
            return np.ascontiguousarray(L), jitter
    raise SingularMoment(
        f"moment matrix of size {m} is not positive definite even with jitter "
        f"{levels[-1]:.3g}; the points may lie on one degree-{k} algebraic set"
    )


@dataclass(frozen=True, eq=False)
class ChristoffelEstimator:
    """A fitted empirical inverse Christoffel function with its level.

    Callers always pass raw (unnormalized) coordinates.
    """

    basis: MonomialBasis
    chol_lower: np.ndarray = field(repr=False)
    alpha: float
    normalization: NormalizationMap = field(repr=False)
    meta: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.basis.n

    @property
    def k(self):
        return self.basis.k

    def _normalized(self, x):
        X = np.asarray(x, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.ndim != 2 or X.shape[1] != self.n:
            raise DimensionMismatch(
                f"estimator has dimension {self.n}, got points of shape {np.shape(x)}"
            )
        return self.normalization.apply(X), single

    def evaluate(self, x, threads=1):
        """C at a point (n,) or at each row of an (N, n) array."""
        Xn, single = self._normalized(x)
        out = np.empty(Xn.shape[0])
        kern = _backend.kernels
        L = self.chol_lower

        def work(a, b):
            kern.christoffel_values(Xn[a:b], self.basis.pred, self.basis.var, L, out[a:b])

        _backend.run_chunks(work, Xn.shape[0], threads)
        return float(out[0]) if single else out

    __call__ = evaluate

    def christoffel(self, x):
        """The (non-inverted) Christoffel function 1 / C(x)."""
        return 1.0 / self.evaluate(x)

    def contains(self, x, threads=1):
        """Membership in {C <= alpha}; no slack at query time."""
        values = self.evaluate(x, threads)
        return values <= self.alpha if np.ndim(values) else bool(values <= self.alpha)

    def with_alpha(self, alpha):
        return replace(self, alpha=float(alpha))


def level_from_points(est, points, threads=1):
    """Largest C over ``points``; the level that makes them all members."""
    X = _as_points(points)
    if X.shape[0] == 0:
        raise ValueError("cannot take a level from an empty point set")
    return float(np.max(est.evaluate(X, threads)))


def fit(cloud, k, *, normalize=True, threads=1, meta=None):
    """Fit the degree-k empirical inverse Christoffel function to ``cloud``.

    ``cloud`` is a SampleCloud or an (N, n) array. Raises InsufficientSamples
    when N < binomial(n+k, n) and SingularMoment when the moment matrix cannot
    be factorized.
    """
    X = _as_points(cloud)
    N, n = X.shape
    m = basis_size(n, k)
    if N < m:
        raise InsufficientSamples(f"{N} points cannot determine {m} moments (n={n}, k={k})")
    if not np.all(np.isfinite(X)):
        raise ValueError("cloud contains non-finite points")
    basis = enumerate_basis(n, k)
    norm = NormalizationMap.from_points(X) if normalize else NormalizationMap.identity(n)
    Xn = norm.apply(X)
    M = moment_matrix(Xn, basis, threads)
    L, jitter = factorize(M, k)
    info = {"n_points": N, "k": k, "jitter": jitter, "normalized": bool(normalize)}
    seed = getattr(cloud, "seed", None)
    if seed is not None:
        info["seed"] = seed
    info.update(meta or {})
    est = ChristoffelEstimator(basis, L, 0.0, norm, info)
    return est.with_alpha(level_from_points(est, X, threads))
