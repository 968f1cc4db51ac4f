"""Kernel backend selection and deterministic chunked fan-out.

The compiled ``_core`` extension is used when importable; otherwise, or when
``CFREACH_PURE=1`` is set, the numpy kernels in ``_pykernels`` are used.
"""
import os
from concurrent.futures import ThreadPoolExecutor

from . import _pykernels

CHUNK = 4096

kernels = _pykernels
if not os.environ.get("CFREACH_PURE"):
    try:
        from . import _core as kernels  # noqa: F811
    except ImportError:
        pass


def available():
    """Names of the backends importable in this environment."""
    names = ["python"]
    try:
        from . import _core  # noqa: F401
    except ImportError:
        return names
    return ["cython"] + names


def get(name=None):
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {name!r}")


def resolve_threads(threads):
    if threads is None or threads == 0:
        return os.cpu_count() or 1
    if threads < 0:
        raise ValueError("threads must be >= 0")
    return threads


def chunk_bounds(n, chunk=CHUNK):
    """Fixed partition of range(n); independent of the thread count."""
    return [(a, min(a + chunk, n)) for a in range(0, n, chunk)]


def iter_chunks(func, n, threads=1, chunk=CHUNK):
    """Yield ``func(start, stop)`` for each fixed chunk of range(n), in order.

    At most a bounded window of chunks is in flight, so memory stays flat
    however large ``n`` is.
    """
    bounds = chunk_bounds(n, chunk)
    threads = resolve_threads(threads)
    if threads == 1 or len(bounds) <= 1:
        for a, b in bounds:
            yield func(a, b)
        return
    window = 4 * threads
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for w in range(0, len(bounds), window):
            futures = [pool.submit(func, a, b) for a, b in bounds[w : w + window]]
            for fut in futures:
                yield fut.result()


def run_chunks(func, n, threads=1, chunk=CHUNK):
    """Run ``func(start, stop)`` over all chunks for its side effects."""
    for _ in iter_chunks(func, n, threads, chunk):
        pass


def pairwise_sum(parts):
    """Sum an ordered stream of arrays with a fixed binary reduction tree.

    The tree depends only on the number of parts, never on timing, so the
    result is bitwise reproducible.
    """
    stack = []
    for part in parts:
        level = 0
        while stack and stack[-1][0] == level:
            _, left = stack.pop()
            part = left + part
            level += 1
        stack.append((level, part))
    if not stack:
        raise ValueError("nothing to sum")
    total = stack.pop()[1]
    while stack:
        total = stack.pop()[1] + total
    return total
