"""Pure numpy versions of the compiled kernels.

Signatures and operation order mirror ``_core.pyx`` so the two backends agree
to rounding (bitwise wherever no transcendental function is involved). Work is
vectorized across the points of a chunk rather than looped per point.
"""
import numpy as np
from scipy.linalg import solve_triangular

NAME = "python"


def _field(code, p, forcing, x, d, out):
    if code == 0:
        np.multiply(p[0], x, out=out)
    elif code == 1:
        x0 = x[:, 0]
        x1 = x[:, 1]
        out[:, 0] = x1
        out[:, 1] = -p[0] * x1 + x0 - x0 * x0 * x0 + forcing
    elif code == 2:
        th = x[:, 4]
        out[:, 0] = x[:, 1]
        out[:, 1] = d[:, 0] * p[1] * np.sin(th)
        out[:, 2] = x[:, 3]
        out[:, 3] = -p[0] + d[:, 0] * p[1] * np.cos(th)
        out[:, 4] = x[:, 5]
        out[:, 5] = -p[2] * th - p[3] * x[:, 5] + p[4] * d[:, 1]
    else:
        T, v, w, xbar, c, beta = p[:6]
        n = x.shape[1]
        fin = d[:, 0]
        for i in range(n - 1):
            if i == n - 2:
                cong = w * (xbar - x[:, i + 1]) / beta
            else:
                cong = w * (xbar - x[:, i + 1])
            fout = np.fmin(np.fmin(c, v * x[:, i]), cong)
            out[:, i] = (fin - fout) / T
            fin = fout
        fout = np.fmin(c, v * x[:, n - 1])
        out[:, n - 1] = (fin - fout) / T


def simulate_batch(code, params, steps, forcing, x0, dist, out):
    p = [float(v) for v in params]
    x = np.array(x0, dtype=float, copy=True)
    k1 = np.empty_like(x)
    k2 = np.empty_like(x)
    k3 = np.empty_like(x)
    k4 = np.empty_like(x)
    # divergence is reported through the return value, not numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for s in range(len(steps)):
            h = float(steps[s])
            half = 0.5 * h
            fa, fm, fb = (float(v) for v in forcing[s])
            _field(code, p, fa, x, dist, k1)
            _field(code, p, fm, x + half * k1, dist, k2)
            _field(code, p, fm, x + half * k2, dist, k3)
            _field(code, p, fb, x + h * k3, dist, k4)
            x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out[...] = x
    bad = np.flatnonzero(~np.isfinite(x).all(axis=1))
    return int(bad[0]) if bad.size else -1


def eval_basis_batch(X, pred, var, Z):
    Z[:, 0] = 1.0
    for a in range(1, len(pred)):
        np.multiply(Z[:, pred[a]], X[:, var[a]], out=Z[:, a])


def moment_partial(X, pred, var, S):
    Z = np.empty((X.shape[0], len(pred)))
    eval_basis_batch(X, pred, var, Z)
    S[...] = Z.T @ Z
    # BLAS may leave the product asymmetric in the last bit
    S[...] = np.tril(S) + np.tril(S, -1).T


def christoffel_values(X, pred, var, L, out):
    Z = np.empty((X.shape[0], len(pred)))
    eval_basis_batch(X, pred, var, Z)
    V = solve_triangular(L, Z.T, lower=True, check_finite=False)
    out[...] = np.einsum("ij,ij->j", V, V)
