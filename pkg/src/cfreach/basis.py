"""Monomial feature vectors of bounded total degree, in graded lex order."""
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb

import numpy as np

from . import _backend
from .errors import DimensionMismatch

INT64_MAX = 2**63 - 1


def checked_binomial(a, b):
    value = comb(a, b)
    if value > INT64_MAX:
        raise OverflowError(f"binomial({a}, {b}) exceeds the 64-bit integer range")
    return value


def basis_size(n, k):
    """Number of monomials of degree <= k in n variables, binomial(n+k, n)."""
    if n < 1 or k < 0:
        raise ValueError(f"need n >= 1 and k >= 0, got n={n}, k={k}")
    return checked_binomial(n + k, n)


@dataclass(frozen=True, eq=False)
class MonomialBasis:
    """Ordered exponent table for all monomials of degree <= k in n variables.

    ``pred[j]`` and ``var[j]`` give, for each non-constant monomial, a
    lower-degree monomial and the variable that multiplies it to reach ``j``;
    evaluation walks the table once so each entry costs one multiplication.
    """

    n: int
    k: int
    exponents: np.ndarray = field(repr=False)
    pred: np.ndarray = field(repr=False)
    var: np.ndarray = field(repr=False)

    @property
    def size(self):
        return self.exponents.shape[0]

    def __len__(self):
        return self.size

    def __eq__(self, other):
        if not isinstance(other, MonomialBasis):
            return NotImplemented
        return (self.n, self.k) == (other.n, other.k) and np.array_equal(
            self.exponents, other.exponents
        )

    def __hash__(self):
        return hash((self.n, self.k))

    def __call__(self, x):
        return eval_basis(self, x)


def _graded_exponents(n, k):
    rows = []
    for d in range(k + 1):
        block = []
        # each multiset of d variable indices is one monomial of degree d
        for combo in combinations_with_replacement(range(n), d):
            e = [0] * n
            for v in combo:
                e[v] += 1
            block.append(tuple(e))
        # ties: higher power of earlier variables first, so x1 precedes x2
        block.sort(reverse=True)
        rows.extend(block)
    return rows


def basis_from_exponents(exponents):
    """Basis over an explicit exponent table (rows in evaluation order).

    Every non-constant monomial must appear after some monomial that divides
    it by a single variable, which holds for any graded order. The table must
    be the complete set of degree <= k monomials.
    """
    rows = [tuple(int(v) for v in e) for e in exponents]
    if not rows or any(v < 0 for e in rows for v in e):
        raise ValueError("exponent table must be non-empty with non-negative entries")
    n = len(rows[0])
    k = max(sum(e) for e in rows)
    if any(len(e) != n for e in rows) or len(set(rows)) != len(rows):
        raise ValueError("exponent rows must share one length and be distinct")
    if len(rows) != basis_size(n, k) or any(rows[0]):
        raise ValueError("exponent table is not a complete basis starting at the constant")
    position = {}
    pred = np.zeros(len(rows), dtype=np.intp)
    var = np.zeros(len(rows), dtype=np.intp)
    for j, e in enumerate(rows):
        if j:
            for v, p in enumerate(e):
                lower = e[:v] + (p - 1,) + e[v + 1 :] if p else None
                if lower in position:
                    pred[j], var[j] = position[lower], v
                    break
            else:
                raise ValueError(f"monomial {e} precedes all of its divisors")
        position[e] = j
    exps = np.array(rows, dtype=np.uint8 if k < 256 else np.uint16).reshape(len(rows), n)
    for arr in (exps, pred, var):
        arr.setflags(write=False)
    return MonomialBasis(n=n, k=k, exponents=exps, pred=pred, var=var)


@lru_cache(maxsize=64)
def enumerate_basis(n, k):
    """Build the degree <= k monomial basis in n variables (graded lex order)."""
    basis_size(n, k)
    return basis_from_exponents(_graded_exponents(n, k))


def eval_basis(basis, x):
    """Evaluate z_k at one point (shape (n,)) or a batch (shape (N, n))."""
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.ascontiguousarray(np.atleast_2d(X))
    if X.ndim != 2 or X.shape[1] != basis.n:
        raise DimensionMismatch(f"expected points of dimension {basis.n}, got shape {np.shape(x)}")
    Z = np.empty((X.shape[0], basis.size))
    _backend.kernels.eval_basis_batch(X, basis.pred, basis.var, Z)
    return Z[0] if single else Z
