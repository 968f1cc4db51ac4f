"""Reachability problems and Monte Carlo sample clouds.

Draws for trajectory ``i`` come from a counter-based stream: a Philox
generator keyed by the seed, positioned at a block offset proportional to
``i``. A point therefore depends only on (seed, i), which makes clouds
independent of chunking and threading, and makes the first N points of a
longer run equal to the N-point run.
"""
import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field, replace
from math import ceil

import numpy as np

from . import _backend
from .errors import DimensionMismatch, NonFiniteState
from .systems import IntegratorConfig, SystemSpec, simulate_batch

STATE_NAMES = {
    "duffing": ("x", "y"),
    "quadrotor": ("x", "xdot", "h", "hdot", "theta", "thetadot"),
}

_TO_UNIT = 1.0 / 9007199254740992.0  # 2**-53, as in numpy's Generator.random


def state_names(spec):
    return STATE_NAMES.get(spec.id, tuple(f"x{i + 1}" for i in range(spec.state_dim)))


@dataclass(frozen=True)
class ReachabilityProblem:
    """Initial box, disturbance box, horizon and optional projection.

    ``projection`` holds 0-based state indices kept in the cloud (None keeps
    every state).
    """

    system: SystemSpec
    integ: IntegratorConfig
    t0: float
    t1: float
    x0_lower: np.ndarray
    x0_upper: np.ndarray
    d_lower: np.ndarray = field(default_factory=lambda: np.zeros(0))
    d_upper: np.ndarray = field(default_factory=lambda: np.zeros(0))
    projection: tuple = None

    def __post_init__(self):
        for name in ("x0_lower", "x0_upper", "d_lower", "d_upper"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).ravel())
        n, w = self.system.state_dim, self.system.disturbance_dim
        if self.x0_lower.size != n or self.x0_upper.size != n:
            raise DimensionMismatch(f"{self.system.id} initial interval needs {n} components")
        if self.d_lower.size != w or self.d_upper.size != w:
            raise DimensionMismatch(f"{self.system.id} disturbance interval needs {w} components")
        if np.any(self.x0_lower > self.x0_upper) or np.any(self.d_lower > self.d_upper):
            raise ValueError("interval lower bounds must not exceed upper bounds")
        if self.t1 < self.t0:
            raise ValueError("t1 must not precede t0")
        if self.projection is not None:
            proj = tuple(int(i) for i in self.projection)
            if len(set(proj)) != len(proj) or not all(0 <= i < n for i in proj) or not proj:
                raise ValueError(f"projection {proj} must be distinct indices in [0, {n})")
            object.__setattr__(self, "projection", proj)

    @property
    def dim(self):
        """Dimension of the stored (possibly projected) states."""
        return self.system.state_dim if self.projection is None else len(self.projection)

    @property
    def draws_per_index(self):
        return self.system.state_dim + self.system.disturbance_dim

    def coordinate_names(self):
        names = state_names(self.system)
        return names if self.projection is None else tuple(names[i] for i in self.projection)

    def to_dict(self):
        return {
            "system": self.system.id,
            "state_dim": self.system.state_dim,
            "params": dict(self.system.params),
            "step": self.integ.step,
            "t0": self.t0,
            "t1": self.t1,
            "x0_lower": self.x0_lower.tolist(),
            "x0_upper": self.x0_upper.tolist(),
            "d_lower": self.d_lower.tolist(),
            "d_upper": self.d_upper.tolist(),
            "projection": None if self.projection is None else list(self.projection),
        }

    def digest(self):
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class SampleCloud:
    points: np.ndarray
    seed: int = None
    digest: str = ""
    names: tuple = ()

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("a cloud needs at least one point in an (N, dim) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("cloud points must be finite")
        object.__setattr__(self, "points", pts)
        if not self.names:
            object.__setattr__(self, "names", tuple(f"x{i + 1}" for i in range(pts.shape[1])))

    @property
    def n_points(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return self.n_points


def _blocks(draws):
    # Philox emits 4 words per counter increment
    return max(1, ceil(draws / 4))


def index_stream(seed, index, draws):
    """The Generator holding the draws of trajectory ``index``."""
    bg = np.random.Philox(key=seed)
    bg.advance(index * _blocks(draws))
    return np.random.Generator(bg)


def draw_uniform(lower, upper, rng):
    """One point uniform on the box [lower, upper]; flat sides stay constant."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if np.any(lower > upper):
        raise ValueError("lower bound exceeds upper bound")
    return lower + (upper - lower) * rng.random(lower.size)


def index_uniforms(seed, start, stop, draws):
    """Uniforms for trajectories start..stop-1, shape (stop-start, draws).

    Row i equals ``index_stream(seed, start + i, draws).random(draws)``.
    """
    width = 4 * _blocks(draws)
    bg = np.random.Philox(key=seed)
    bg.advance(start * _blocks(draws))
    raw = bg.random_raw((stop - start) * width).reshape(stop - start, width)[:, :draws]
    return (raw >> np.uint64(11)).astype(float) * _TO_UNIT


def _draw_chunk(problem, seed, a, b):
    u = index_uniforms(seed, a, b, problem.draws_per_index)
    n = problem.system.state_dim
    x0 = problem.x0_lower + (problem.x0_upper - problem.x0_lower) * u[:, :n]
    d = problem.d_lower + (problem.d_upper - problem.d_lower) * u[:, n:]
    return x0, d


def generate_cloud(problem, n_points, seed, threads=1):
    """Simulate ``n_points`` iid trajectories and store their (projected) endpoints."""
    if n_points < 1:
        raise ValueError("need at least one sample")
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    out = np.empty((n_points, problem.dim))
    cols = None if problem.projection is None else list(problem.projection)

    def work(a, b):
        x0, d = _draw_chunk(problem, seed, a, b)
        try:
            final = simulate_batch(problem.system, problem.integ, problem.t0, problem.t1, x0, d)
        except NonFiniteState as exc:
            raise NonFiniteState(f"sample {a + exc.index}: {exc}", index=a + exc.index) from exc
        out[a:b] = final if cols is None else final[:, cols]

    _backend.run_chunks(work, n_points, threads)
    return SampleCloud(out, seed=seed, digest=problem.digest(), names=problem.coordinate_names())


def project(cloud, indices):
    """Keep the listed (0-based) coordinates of every point."""
    idx = [int(i) for i in indices]
    if not idx or any(i < 0 or i >= cloud.dim for i in idx):
        raise IndexError(f"projection {idx} out of range for dimension {cloud.dim}")
    digest = hashlib.sha256(f"{cloud.digest}|{idx}".encode()).hexdigest()[:16]
    return replace(
        cloud,
        points=np.ascontiguousarray(cloud.points[:, idx]),
        digest=digest,
        names=tuple(cloud.names[i] for i in idx),
    )


def write_cloud(path, cloud):
    """CSV with a provenance comment line and a header row; floats round-trip."""
    lines = [
        f"# seed={cloud.seed} n_points={cloud.n_points} digest={cloud.digest}",
        ",".join(cloud.names),
    ]
    lines.extend(",".join(repr(float(v)) for v in row) for row in cloud.points)
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_cloud(path):
    with open(path) as fh:
        first = fh.readline().strip()
        names = tuple(fh.readline().strip().split(","))
        points = np.loadtxt(fh, delimiter=",", ndmin=2)
    prov = dict(item.split("=", 1) for item in first.lstrip("# ").split())
    seed = None if prov.get("seed") in (None, "None") else int(prov["seed"])
    return SampleCloud(points.reshape(-1, len(names)), seed=seed, digest=prov.get("digest", ""), names=names)


def atomic_write_text(path, text):
    """Write via a temporary file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
