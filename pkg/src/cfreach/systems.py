"""Benchmark dynamics and the fixed-step RK4 transition map.

Three systems ship: the forced Duffing oscillator, a planar quadrotor, and a
six-cell traffic model; ``custom-test`` is the linear field dx/dt = rate * x
used for integrator checks. Disturbances are constant in time.
"""
from dataclasses import dataclass, field
from math import cos, floor
from types import MappingProxyType

import numpy as np

from . import _backend, _pykernels
from .errors import DimensionMismatch, MonotonicityViolated, NonFiniteState

SYSTEM_CODES = {"custom-test": 0, "duffing": 1, "quadrotor": 2, "traffic": 3}

PARAM_ORDER = {
    "custom-test": ("rate",),
    "duffing": ("alpha", "gamma", "omega"),
    "quadrotor": ("g", "K", "d0", "d1", "n0"),
    "traffic": ("T", "v", "w", "xbar", "c", "beta"),
}

DEFAULT_PARAMS = {
    "custom-test": {"rate": 1.0},
    "duffing": {"alpha": 0.05, "gamma": 0.4, "omega": 1.3},
    "quadrotor": {"g": 9.81, "K": 0.89 / 1.4, "d0": 70.0, "d1": 17.0, "n0": 55.0},
    # c = v*w*xbar/(v+w) is the cell capacity implied by v, w and xbar
    "traffic": {"T": 30.0, "v": 0.5, "w": 1.0 / 6.0, "xbar": 320.0, "c": 40.0, "beta": 1.0},
}

DEFAULT_STEPS = {"custom-test": 0.01, "duffing": 0.01, "quadrotor": 0.005, "traffic": 0.05}

_DIMS = {"custom-test": (1, 0), "duffing": (2, 0), "quadrotor": (6, 2), "traffic": (6, 1)}
_MONOTONE = {"custom-test", "traffic"}


@dataclass(frozen=True)
class SystemSpec:
    id: str
    state_dim: int
    disturbance_dim: int
    params: MappingProxyType = field(default_factory=lambda: MappingProxyType({}))

    @property
    def code(self):
        return SYSTEM_CODES[self.id]

    @property
    def monotone(self):
        return self.id in _MONOTONE

    def param_vector(self):
        return np.array([self.params[name] for name in PARAM_ORDER[self.id]], dtype=float)


def make_system(system_id, params=None, state_dim=None):
    """Build a SystemSpec with per-system default parameters.

    ``state_dim`` may be overridden for ``custom-test`` (any n) and
    ``traffic`` (number of cells, at least 2).
    """
    if system_id not in SYSTEM_CODES:
        raise ValueError(f"unknown system {system_id!r}; expected one of {sorted(SYSTEM_CODES)}")
    merged = dict(DEFAULT_PARAMS[system_id])
    for key, value in (params or {}).items():
        if key not in merged:
            raise ValueError(f"system {system_id!r} has no parameter {key!r}")
        merged[key] = float(value)
    n, w = _DIMS[system_id]
    if state_dim is not None and state_dim != n:
        if system_id == "custom-test" and state_dim >= 1:
            n = state_dim
        elif system_id == "traffic" and state_dim >= 2:
            n = state_dim
        else:
            raise ValueError(f"system {system_id!r} cannot have state dimension {state_dim}")
    if n > 16:
        raise ValueError("state dimension above 16 is not supported")
    return SystemSpec(system_id, n, w, MappingProxyType(merged))


@dataclass(frozen=True)
class IntegratorConfig:
    """Classical RK4 with a fixed step."""

    step: float

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"integrator step must be positive, got {self.step}")


def step_schedule(t0, t1, step):
    """Start times and step lengths from t0 to t1.

    A final shortened step is added when ``step`` does not divide the span to
    within 1e-9 relative.
    """
    if t1 < t0:
        raise ValueError(f"t1 ({t1}) precedes t0 ({t0})")
    span = t1 - t0
    if span == 0:
        return np.empty(0), np.empty(0)
    q = span / step
    nearest = round(q)
    if nearest >= 1 and abs(q - nearest) <= 1e-9 * q:
        count, last = nearest, None
    else:
        count = floor(q)
        last = t1 - (t0 + count * step)
    times = t0 + step * np.arange(count, dtype=float)
    steps = np.full(count, float(step))
    if last is not None and last > 0:
        times = np.append(times, t0 + count * step)
        steps = np.append(steps, last)
    return times, steps


def _forcing_table(spec, times, steps):
    table = np.zeros((len(times), 3))
    if spec.id == "duffing":
        gamma, omega = spec.params["gamma"], spec.params["omega"]
        for s, (t, h) in enumerate(zip(times, steps)):
            table[s] = (
                gamma * cos(omega * t),
                gamma * cos(omega * (t + 0.5 * h)),
                gamma * cos(omega * (t + h)),
            )
    return table


def _field(spec, t, state, d):
    x = np.asarray(state, dtype=float).reshape(1, -1)
    if x.shape[1] != spec.state_dim:
        raise DimensionMismatch(f"{spec.id} state has dimension {spec.state_dim}")
    dv = np.asarray(d, dtype=float).reshape(1, -1)
    if dv.shape[1] != spec.disturbance_dim:
        raise DimensionMismatch(f"{spec.id} disturbance has dimension {spec.disturbance_dim}")
    forcing = 0.0
    if spec.id == "duffing":
        forcing = spec.params["gamma"] * cos(spec.params["omega"] * t)
    out = np.empty_like(x)
    _pykernels._field(spec.code, list(spec.param_vector()), forcing, x, dv, out)
    return out[0]


def duffing_field(t, state, params=None):
    """(dx/dt, dy/dt) of the forced Duffing oscillator."""
    return _field(make_system("duffing", params), t, state, ())


def quadrotor_field(t, state, u, params=None):
    """Time derivative of (x, dx, h, dh, theta, dtheta) under inputs (u1, u2)."""
    return _field(make_system("quadrotor", params), t, state, u)


def traffic_field(t, state, d, params=None):
    state = np.asarray(state, dtype=float)
    spec = make_system("traffic", params, state_dim=state.size)
    return _field(spec, t, state, np.atleast_1d(d))


def simulate_batch(spec, integ, t0, t1, x0, d=None, threads=1, backend=None):
    """Endpoint of every trajectory: row j starts at x0[j] under disturbance d[j].

    Trajectories are integrated in fixed chunks, so the output does not depend
    on ``threads``.
    """
    X0 = np.ascontiguousarray(np.atleast_2d(np.asarray(x0, dtype=float)))
    N = X0.shape[0]
    if X0.shape[1] != spec.state_dim:
        raise DimensionMismatch(f"{spec.id} expects {spec.state_dim} states, got {X0.shape[1]}")
    D = np.asarray(d if d is not None else (), dtype=float)
    D = np.zeros((N, 0)) if D.size == 0 else D.reshape(N, -1)
    if D.shape[1] != spec.disturbance_dim:
        raise DimensionMismatch(
            f"{spec.id} expects {spec.disturbance_dim} disturbances, got {D.shape[1]}"
        )
    D = np.ascontiguousarray(D)
    times, steps = step_schedule(t0, t1, integ.step)
    forcing = _forcing_table(spec, times, steps)
    params = spec.param_vector()
    kern = _backend.get(backend)
    out = np.empty_like(X0)

    def work(a, b):
        bad = kern.simulate_batch(spec.code, params, steps, forcing, X0[a:b], D[a:b], out[a:b])
        return -1 if bad < 0 else a + bad

    for bad in _backend.iter_chunks(work, N, threads):
        if bad >= 0:
            raise NonFiniteState(
                f"{spec.id} trajectory {bad} became non-finite (step {integ.step} too large?)",
                index=bad,
            )
    return out


def simulate(spec, integ, t0, t1, x0, d=()):
    """Phi(t1; t0, x0, d) for a single trajectory."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (spec.state_dim,):
        raise DimensionMismatch(f"{spec.id} expects {spec.state_dim} states, got shape {x0.shape}")
    return simulate_batch(spec, integ, t0, t1, x0[None, :], np.asarray(d, dtype=float)[None, :])[0]


def monotone_interval(spec, integ, t0, t1, x_lo, x_hi, d_lo=(), d_hi=()):
    """Tightest box around the reachable set of a monotone system.

    The corners are the endpoints of the lowest and highest trajectories.
    """
    if not spec.monotone:
        raise ValueError(f"system {spec.id!r} is not monotone; no interval bound applies")
    x_lo, x_hi = np.asarray(x_lo, float), np.asarray(x_hi, float)
    d_lo, d_hi = np.asarray(d_lo, float), np.asarray(d_hi, float)
    if np.any(x_lo > x_hi) or np.any(d_lo > d_hi):
        raise ValueError("interval bounds must satisfy lower <= upper")
    ends = simulate_batch(spec, integ, t0, t1, np.stack([x_lo, x_hi]), np.stack([d_lo, d_hi]))
    lower, upper = ends
    if np.any(lower > upper):
        raise MonotonicityViolated(
            f"lower endpoint exceeds upper in components {np.flatnonzero(lower > upper).tolist()}"
        )
    return lower, upper
