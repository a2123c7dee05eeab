#!/usr/bin/env python3
"""Compare the compiled kernels with the pure-Python fallback.

Times the pieces that dominate a corpus run on a book-length series: a
single sift, a full EMD, and the windowed score sums.

Usage::

    python benchmarks/bench_kernels.py [--repeat N] [--length N]
"""

import argparse
import timeit

import numpy as np

from ousiofluct import _kernels_py

try:
    from ousiofluct import _kernels
except ImportError:
    _kernels = None


def _emd(kern, x, max_imfs=20):
    """Plain EMD written directly against a kernel module."""
    r = x.copy()
    for _ in range(max_imfs):
        maxi, mini = kern.find_extrema(r)
        if len(maxi) < 2 or len(mini) < 2:
            break
        h = kern.sift(r, 0.2, 100)[0]
        r = r - h
    return r


def best_time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--length", type=int, default=1500,
                    help="series length in windows (default 1500, about 75k words)")
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    x = np.cumsum(rng.standard_normal(args.length)) * 0.01 + rng.standard_normal(args.length)
    n_tokens = args.length * 50
    scores = rng.uniform(-1, 1, n_tokens)
    hits = (rng.random(n_tokens) < 0.4).astype(np.float64)

    backends = [("python", _kernels_py)]
    if _kernels is not None:
        backends.insert(0, ("cython", _kernels))
    else:
        print("compiled extension not built; timing the fallback only")

    cases = {
        "sift": lambda k: k.sift(x, 0.2, 100),
        "emd": lambda k: _emd(k, x),
        "window_sums": lambda k: k.window_sums(scores, hits, 50, 50),
    }
    times = {}
    for case, fn in cases.items():
        for name, kern in backends:
            times[case, name] = best_time(lambda: fn(kern), args.repeat)

    print(f"series length {args.length}, best of {args.repeat}")
    print(f"{'kernel':<12} " + " ".join(f"{n:>12}" for n, _ in backends) + "     speedup")
    for case in cases:
        row = [times[case, n] * 1e3 for n, _ in backends]
        speed = (f"{row[1] / row[0]:10.1f}x" if len(row) == 2 and row[0] > 0 else "")
        print(f"{case:<12} " + " ".join(f"{v:10.3f}ms" for v in row) + "  " + speed)


if __name__ == "__main__":
    main()
