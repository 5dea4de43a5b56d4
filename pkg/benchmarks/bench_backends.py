"""Time the local solver and a full field estimate on both kernel backends.

    python3 benchmarks/bench_backends.py [--repeat 5]

The numba kernels are compiled (or loaded from cache) before timing.
"""

import argparse
import time

import numpy as np

from nnlogit import _backend
from nnlogit.gradient_field import estimate_field
from nnlogit.local_logistic import LocalProblem, fit_penalized, lambda_max
from nnlogit.rng import RandomStream
from nnlogit.synthetic import simulate


def local_problems(count, k, p, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        D = rng.standard_normal((k, p))
        y = (rng.random(k) < 1 / (1 + np.exp(-(0.2 + D @ rng.standard_normal(p))))).astype(float)
        if 5 <= y.sum() <= k - 5:
            pr = LocalProblem(np.zeros(p), D, y)
            out.append(pr.with_lambda(0.1 * lambda_max(pr)))
    return out


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    problems = local_problems(200, 40, 8)
    data, _ = simulate(1, 2000, 8, RandomStream(0))
    cases = {
        "200 local fits (k=40, p=8)": lambda: [fit_penalized(pr) for pr in problems],
        "field estimate (n=2000, m=500)": lambda: estimate_field(data, lam=0.5, seed=1),
    }
    names = [n for n in ("numba", "numpy") if n == "numpy" or _backend.NUMBA_AVAILABLE]
    results = {}
    for name in names:
        with _backend.use_backend(name):
            fit_penalized(problems[0])  # warm-up / JIT
            for label, fn in cases.items():
                results[label, name] = best_of(fn, args.repeat)

    print(f"{'case':34s}" + "".join(f"{n:>12s}" for n in names) + "     speedup")
    for label in cases:
        row = [results[label, n] for n in names]
        speed = f"{row[1] / row[0]:10.1f}x" if len(row) == 2 else ""
        print(f"{label:34s}" + "".join(f"{t * 1e3:10.1f}ms" for t in row) + speed)


if __name__ == "__main__":
    main()
