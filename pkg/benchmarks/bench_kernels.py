"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Each row reports the best-of-``repeat`` wall time per call and the max
absolute difference between the two backends. The compiled versions are
warmed up once before timing so JIT compilation is excluded.
"""
import argparse
import time

import numpy as np

from pspa import kernels
from pspa._accel import HAVE_NUMBA
from pspa.sim.forest import RegressionForest


def best_time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _diff(a, b):
    if isinstance(a, tuple):
        return max(_diff(x, y) for x, y in zip(a, b))
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--repeat", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    if not HAVE_NUMBA:
        raise SystemExit("numba is unavailable; nothing to compare")

    rng = np.random.default_rng(args.seed)
    cases = []
    for m, q in [(200, 10), (1000, 51), (20000, 51)]:
        a = rng.standard_normal((m, q))
        b = rng.standard_normal((m, q))
        w = rng.random(m)
        eta = 3 * rng.standard_normal(m)
        cases += [
            (f"cross_cov {m}x{q}", lambda a=a, b=b: kernels.cross_cov_numpy(a, b),
             lambda a=a, b=b: kernels.cross_cov_numba(a, b)),
            (f"weighted_gram {m}x{q}", lambda a=a, w=w: kernels.weighted_gram_numpy(a, w),
             lambda a=a, w=w: kernels.weighted_gram_numba(a, w)),
            (f"logistic_terms {m}", lambda e=eta: kernels.logistic_terms_numpy(e),
             lambda e=eta: kernels.logistic_terms_numba(e)),
        ]

    X = rng.standard_normal((1000, 51))
    y = X[:, :10].sum(axis=1) + rng.standard_normal(1000)

    def forest(backend):
        return lambda: RegressionForest(n_trees=20, rng=np.random.default_rng(1), backend=backend).fit(X, y).predict(X)

    cases.append(("forest 20 trees 1000x51", forest("numpy"), forest("numba")))

    print(f"{'kernel':28s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, f_np, f_nb in cases:
        f_nb()  # compile
        reps = args.repeat if not name.startswith("forest") else max(1, args.repeat // 10)
        t_np, o_np = best_time(f_np, reps)
        t_nb, o_nb = best_time(f_nb, reps)
        print(f"{name:28s} {1e3 * t_np:11.3f} {1e3 * t_nb:11.3f} {t_np / t_nb:8.2f} {_diff(o_np, o_nb):11.2e}")


if __name__ == "__main__":
    main()
