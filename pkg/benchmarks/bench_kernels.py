"""Time the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from qtgrad import kernels


def cases(rng):
    for m in (8, 16, 32):
        n = m**3
        x = rng.standard_normal(n)
        X = rng.standard_normal((n, 5))
        yield f"laplacian {m}^3 vec", "laplacian_matvec", (x, m, m, m)
        yield f"laplacian {m}^3 r=5", "laplacian_matvec", (X, m, m, m)
    for n in (50, 200, 2000):
        l, u = np.zeros(n), np.ones(n)
        a = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        x = rng.standard_normal(n)
        yield f"slb_project n={n}", "slb_project", (x, l, u, a, 0.0)
        act = rng.random(n) < 0.3
        yield f"ybar n={n}", "ybar", (x, act, a)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}")
    rng = np.random.default_rng(0)
    head = f"{'case':26s}" + "".join(f"{b + ' [us]':>16s}" for b in backends)
    if len(backends) > 1:
        head += f"{'speedup':>10s}"
    print(head)
    for label, name, a in cases(rng):
        times = []
        for b in backends:
            fn = getattr(kernels.get_backend(b), name)
            t = min(timeit.repeat(lambda: fn(*a), number=args.repeat, repeat=3)) / args.repeat
            times.append(t * 1e6)
        line = f"{label:26s}" + "".join(f"{t:16.1f}" for t in times)
        if len(times) > 1:
            line += f"{times[0] / times[1]:10.1f}x"
        print(line)


if __name__ == "__main__":
    main()
