"""Independent reference computations used to derive frozen test values.

Nothing here calls into the package's basis evaluation, moment kernels or
integrator.
"""
from itertools import product

import numpy as np
from scipy.integrate import solve_ivp


def brute_exponents(n, k):
    """All exponent tuples with total degree <= k, by exhaustive search."""
    return [e for e in product(range(k + 1), repeat=n) if sum(e) <= k]


def monomials(X, exponents):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    E = np.asarray(exponents, dtype=float)
    return np.prod(X[:, None, :] ** E[None, :, :], axis=2)


def christoffel_direct(train, probes, exponents):
    """C at probes using an explicitly inverted moment matrix (no scaling)."""
    Z = monomials(train, exponents)
    M = Z.T @ Z / Z.shape[0]
    Minv = np.linalg.inv(M)
    P = monomials(probes, exponents)
    return np.einsum("ij,jk,ik->i", P, Minv, P)


def duffing_rhs(alpha=0.05, gamma=0.4, omega=1.3):
    def f(t, s):
        x, y = s
        return [y, -alpha * y + x - x**3 + gamma * np.cos(omega * t)]

    return f


def reference_endpoint(f, t0, t1, x0, tol=1e-10, method="RK45"):
    """Adaptive embedded Runge-Kutta solution at t1."""
    sol = solve_ivp(f, (t0, t1), x0, method=method, rtol=tol, atol=tol)
    assert sol.success
    return sol.y[:, -1]
