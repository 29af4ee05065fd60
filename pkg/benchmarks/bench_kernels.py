"""Compare the compiled and pure-Python kernel backends.

Each kernel runs on the same seeded input under every available backend;
outputs are checked for equality and the median wall-clock of several runs
is reported. Usage::

    python benchmarks/bench_kernels.py [--n 4000] [--dim 64] [--repeats 5]
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from memgc import kernels


def _inputs(n: int, dim: int, seed: int):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    # chronological stream with slowly drifting content, for the streaming kernels
    walk = np.cumsum(rng.standard_normal((n, dim)) * 0.3, axis=0) + rng.standard_normal(dim)
    walk /= np.linalg.norm(walk, axis=1, keepdims=True)
    return x, walk


def _cases(n: int, dim: int, seed: int):
    x, walk = _inputs(n, dim, seed)
    count = max(1, int(0.7 * n))
    return [
        ("minmax_greedy", lambda impl: kernels.minmax_greedy(x, 0, count, impl=impl)),
        ("adjacent_dedup", lambda impl: kernels.adjacent_dedup(walk, 0.7, impl=impl)),
        ("capacity_evict", lambda impl: kernels.capacity_evict(x, count, impl=impl)),
    ]


def _same(a, b) -> bool:
    """Integer outputs must match exactly; float outputs (radii) to 1e-12."""
    if isinstance(a, tuple):
        return all(_same(u, v) for u, v in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    if a.dtype.kind == "f":
        return a.shape == b.shape and np.allclose(a, b, rtol=0, atol=1e-12)
    return np.array_equal(a, b)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=4000, help="rows per kernel input (default: 4000)")
    p.add_argument("--dim", type=int, default=64, help="embedding dimension (default: 64)")
    p.add_argument("--repeats", type=int, default=5, help="timed runs per case (default: 5)")
    p.add_argument("--seed", type=int, default=0, help="input seed (default: 0)")
    args = p.parse_args(argv)

    backends = kernels.available_backends()
    print(f"active backend: {kernels.BACKEND}; available: {', '.join(backends)}")
    print(f"{'kernel':<16}" + "".join(f"{name + ' ms':>14}" for name in backends) + f"{'speedup':>10}  match")
    for name, run in _cases(args.n, args.dim, args.seed):
        times, outputs = {}, {}
        for label, impl in backends.items():
            outputs[label] = run(impl)  # warm-up, also the reference output
            runs = []
            for _ in range(args.repeats):
                t0 = time.perf_counter()
                run(impl)
                runs.append(time.perf_counter() - t0)
            times[label] = statistics.median(runs)
        results = list(outputs.values())
        match = all(_same(results[0], r) for r in results[1:])
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        cols = "".join(f"{times[label] * 1e3:>14.2f}" for label in backends)
        print(f"{name:<16}{cols}{speed:>9.1f}x  {'yes' if match else 'NO'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
