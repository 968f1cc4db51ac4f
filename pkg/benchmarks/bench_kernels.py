"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat 3]

Times trajectory simulation, moment accumulation and Christoffel evaluation
on each importable backend and prints the best of ``--repeat`` runs.
"""
import argparse
import time

import numpy as np

from cfreach import _backend
from cfreach.basis import enumerate_basis
from cfreach.christoffel import factorize, moment_matrix
from cfreach.systems import IntegratorConfig, make_system, simulate_batch


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def cases(rng):
    duffing = make_system("duffing")
    x_duf = rng.uniform([0.95, -0.05], [1.05, 0.05], (2000, 2))
    traffic = make_system("traffic")
    x_tr = rng.uniform(100, 200, (2000, 6))
    d_tr = rng.uniform(4 / 3, 2.0, (2000, 1))
    quad = make_system("quadrotor")
    x_q = rng.uniform(-0.5, 0.5, (1000, 6))
    d_q = rng.uniform([14.0, -0.5], [16.0, 0.5], (1000, 2))
    basis = enumerate_basis(2, 10)
    pts = rng.uniform(-1, 1, (100_000, 2))
    L, _ = factorize(moment_matrix(pts, basis))
    probes = rng.uniform(-1, 1, (100_000, 2))
    out = np.empty(len(probes))
    kern = lambda: _backend.kernels  # noqa: E731
    return {
        "duffing 2000 x [0,100]": lambda: simulate_batch(
            duffing, IntegratorConfig(0.01), 0, 100, x_duf),
        "traffic 2000 x [0,120]": lambda: simulate_batch(
            traffic, IntegratorConfig(0.05), 0, 120, x_tr, d_tr),
        "quadrotor 1000 x [0,5]": lambda: simulate_batch(
            quad, IntegratorConfig(0.005), 0, 5, x_q, d_q),
        "moments 1e5 pts, k=10": lambda: moment_matrix(pts, basis),
        "evaluate 1e5 pts, k=10": lambda: kern().christoffel_values(
            probes, basis.pred, basis.var, L, out),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    names = _backend.available()
    results = {}
    for name in names:
        _backend.kernels = _backend.get(name)
        for label, fn in cases(np.random.default_rng(0)).items():
            results.setdefault(label, {})[name] = best_of(fn, args.repeat)
    header = f"{'case':<26}" + "".join(f"{n:>10}" for n in names)
    if len(names) > 1:
        header += f"{'speedup':>10}"
    print(header)
    for label, row in results.items():
        line = f"{label:<26}" + "".join(f"{row[n]:>9.3f}s" for n in names)
        if len(names) > 1:
            line += f"{row['python'] / row['cython']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
