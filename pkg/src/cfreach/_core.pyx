# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: batched RK4 integration, monomial features, moment
accumulation and Christoffel evaluation.

Every routine works on a contiguous slice of points and releases the GIL, so
the Python layer can fan fixed-size chunks out to a thread pool. Results for a
given point never depend on which chunk or thread processed it.
"""
from libc.math cimport sin, cos, isfinite
from libc.stdlib cimport malloc, free
import numpy as np

cdef enum:
    MAX_DIM = 16
    # trajectories advanced in lockstep; hides the RK4 dependency chain
    LANES = 8

NAME = "cython"


cdef inline double _min(double a, double b) noexcept nogil:
    # finite inputs only; matches fmin there
    return a if a <= b else b


cdef inline void _field(int code, const double* p, double forcing, const double* x,
                        const double* d, double* out, int n) noexcept nogil:
    # layout: component i of lane l lives at [i * LANES + l]
    cdef int i, l
    cdef double fout, a, c
    cdef double prev[LANES]
    if code == 0:
        for i in range(n * LANES):
            out[i] = p[0] * x[i]
    elif code == 1:
        # p = (damping, gamma, omega); forcing = gamma*cos(omega*t)
        for l in range(LANES):
            a = x[l]
            out[l] = x[LANES + l]
            out[LANES + l] = -p[0] * x[LANES + l] + a - a * a * a + forcing
    elif code == 2:
        # p = (g, K, d0, d1, n0); d = (u1, u2)
        for l in range(LANES):
            out[l] = x[LANES + l]
            out[LANES + l] = d[l] * p[1] * sin(x[4 * LANES + l])
            out[2 * LANES + l] = x[3 * LANES + l]
            out[3 * LANES + l] = -p[0] + d[l] * p[1] * cos(x[4 * LANES + l])
            out[4 * LANES + l] = x[5 * LANES + l]
            out[5 * LANES + l] = (-p[2] * x[4 * LANES + l] - p[3] * x[5 * LANES + l]
                                  + p[4] * d[LANES + l])
    else:
        # p = (T, v, w, xbar, c, beta); d = (inflow,)
        for l in range(LANES):
            prev[l] = d[l]
        for i in range(n):
            for l in range(LANES):
                fout = _min(p[4], p[1] * x[i * LANES + l])
                if i < n - 1:
                    c = p[2] * (p[3] - x[(i + 1) * LANES + l])
                    if i == n - 2:
                        c = c / p[5]
                    fout = _min(fout, c)
                out[i * LANES + l] = (prev[l] - fout) / p[0]
                prev[l] = fout


def simulate_batch(int code, const double[::1] params, const double[::1] steps,
                   const double[:, ::1] forcing, const double[:, ::1] x0,
                   const double[:, ::1] dist, double[:, ::1] out):
    """Integrate every row of ``x0`` with classical RK4 over the step schedule.

    Returns the index of the first trajectory that ended non-finite, or -1.
    """
    cdef Py_ssize_t npts = x0.shape[0]
    cdef int n = x0.shape[1]
    cdef int w = dist.shape[1]
    cdef Py_ssize_t nsteps = steps.shape[0]
    cdef Py_ssize_t base, j, s
    cdef int i, l, q, live
    cdef double h, half, sixth
    cdef double x[MAX_DIM * LANES]
    cdef double tmp[MAX_DIM * LANES]
    cdef double k1[MAX_DIM * LANES]
    cdef double k2[MAX_DIM * LANES]
    cdef double k3[MAX_DIM * LANES]
    cdef double k4[MAX_DIM * LANES]
    cdef double dv[4 * LANES]
    cdef double pbuf[8]
    cdef Py_ssize_t bad = -1
    if n > MAX_DIM or w > 4 or params.shape[0] > 8:
        raise ValueError("system exceeds compiled kernel limits")
    for i in range(params.shape[0]):
        pbuf[i] = params[i]
    with nogil:
        base = 0
        while base < npts:
            live = LANES if npts - base >= LANES else <int>(npts - base)
            # idle lanes replay the block's first trajectory and are discarded
            for l in range(LANES):
                j = base + (l if l < live else 0)
                for i in range(n):
                    x[i * LANES + l] = x0[j, i]
                for i in range(w):
                    dv[i * LANES + l] = dist[j, i]
            for s in range(nsteps):
                h = steps[s]
                half = 0.5 * h
                sixth = h / 6.0
                _field(code, pbuf, forcing[s, 0], x, dv, k1, n)
                for q in range(n * LANES):
                    tmp[q] = x[q] + half * k1[q]
                _field(code, pbuf, forcing[s, 1], tmp, dv, k2, n)
                for q in range(n * LANES):
                    tmp[q] = x[q] + half * k2[q]
                _field(code, pbuf, forcing[s, 1], tmp, dv, k3, n)
                for q in range(n * LANES):
                    tmp[q] = x[q] + h * k3[q]
                _field(code, pbuf, forcing[s, 2], tmp, dv, k4, n)
                for q in range(n * LANES):
                    x[q] = x[q] + sixth * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q])
            for l in range(live):
                for i in range(n):
                    out[base + l, i] = x[i * LANES + l]
                    if bad < 0 and not isfinite(x[i * LANES + l]):
                        bad = base + l
            base += LANES
    return bad


cdef inline void _features(const double* x, const Py_ssize_t* pred, const Py_ssize_t* var,
                           Py_ssize_t m, double* z) noexcept nogil:
    cdef Py_ssize_t a
    z[0] = 1.0
    for a in range(1, m):
        z[a] = z[pred[a]] * x[var[a]]


def eval_basis_batch(const double[:, ::1] X, const Py_ssize_t[::1] pred,
                     const Py_ssize_t[::1] var, double[:, ::1] Z):
    cdef Py_ssize_t j
    cdef Py_ssize_t m = pred.shape[0]
    with nogil:
        for j in range(X.shape[0]):
            _features(&X[j, 0], &pred[0], &var[0], m, &Z[j, 0])


def moment_partial(X, pred, var, S):
    """S = sum_j z(x_j) z(x_j)^T; features natively, the product through BLAS."""
    Z = np.empty((X.shape[0], pred.shape[0]))
    eval_basis_batch(X, pred, var, Z)
    P = Z.T @ Z
    # BLAS may leave the product asymmetric in the last bit
    np.copyto(S, np.tril(P) + np.tril(P, -1).T)


def christoffel_values(const double[:, ::1] X, const Py_ssize_t[::1] pred,
                       const Py_ssize_t[::1] var, const double[:, ::1] L,
                       double[::1] out):
    """out[j] = |v|^2 where L v = z(x_j), by forward substitution."""
    cdef Py_ssize_t m = pred.shape[0]
    cdef Py_ssize_t j, a, b
    cdef double acc, total
    cdef double* z = <double*> malloc(2 * m * sizeof(double))
    cdef double* v
    if z == NULL:
        raise MemoryError()
    v = z + m
    try:
        with nogil:
            for j in range(X.shape[0]):
                _features(&X[j, 0], &pred[0], &var[0], m, z)
                total = 0.0
                for a in range(m):
                    acc = z[a]
                    for b in range(a):
                        acc = acc - L[a, b] * v[b]
                    v[a] = acc / L[a, a]
                    total = total + v[a] * v[a]
                out[j] = total
    finally:
        free(z)
