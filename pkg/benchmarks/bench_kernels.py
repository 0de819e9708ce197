"""Time the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import importlib
import timeit

import numpy as np

from riskattr import _kernels_py


def cases(rng):
    values = {n: rng.normal(size=1 << n) for n in (8, 14, 18)}
    theta = np.linspace(0, 2 * np.pi, 65)[:-1]
    hull = np.column_stack([np.cos(theta), np.sin(theta)])
    pts = rng.uniform(-1.2, 1.2, size=(20_000, 2))
    cloud = rng.uniform(size=(2_000, 5))
    queries = rng.uniform(size=(512, 5))
    out = [(f"shapley_from_values n={n}", "shapley_from_values", (v, n)) for n, v in values.items()]
    out.append(("points_in_convex_polygon 20k pts, 64-gon", "points_in_convex_polygon", (pts, hull, 1e-9)))
    out.append(("min_sq_distances 512 x 2000 (5-d)", "min_sq_distances", (queries, cloud)))
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    try:
        compiled = importlib.import_module("riskattr._kernels")
    except ImportError:
        compiled = None
        print("compiled extension not built; timing the python fallback only")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<44}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for label, name, fargs in cases(rng):
        t_py = min(timeit.repeat(lambda: getattr(_kernels_py, name)(*fargs), number=1, repeat=args.repeat))
        if compiled is None:
            print(f"{label:<44}{1e3 * t_py:>14.3f}{'-':>14}{'-':>10}")
            continue
        a = np.asarray(getattr(_kernels_py, name)(*fargs))
        b = np.asarray(getattr(compiled, name)(*fargs))
        if not np.allclose(a.astype(float), b.astype(float), rtol=1e-10, atol=1e-12):
            raise SystemExit(f"{name}: backends disagree")
        t_cy = min(timeit.repeat(lambda: getattr(compiled, name)(*fargs), number=1, repeat=args.repeat))
        print(f"{label:<44}{1e3 * t_py:>14.3f}{1e3 * t_cy:>14.3f}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
