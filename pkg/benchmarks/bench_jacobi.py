"""Timing of the cyclic Jacobi kernel: compiled extension, numpy fallback, LAPACK.

Run ``python3 benchmarks/bench_jacobi.py [n ...]``.  Each backend solves the
same random symmetric matrix; the table lists wall time, sweeps and the
largest eigenvalue difference against ``numpy.linalg.eigvalsh``.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from delay_sl.numerics.eigen import jacobi_backend


def _time(fn, m, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(m)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("sizes", nargs="*", type=int, default=[32, 64, 128, 256])
    ap.add_argument("--repeat", type=int, default=1)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    backends = []
    for name in ("cython", "python"):
        try:
            backends.append((name, jacobi_backend(name)))
        except RuntimeError:
            print(f"# {name} backend unavailable")
    print(f"{'n':>5} {'backend':>8} {'seconds':>10} {'sweeps':>7} {'max|dw|':>10}")
    for n in args.sizes:
        x = rng.standard_normal((n, n))
        m = 0.5 * (x + x.T)
        ref = np.sort(np.linalg.eigvalsh(m))
        t_lapack, _ = _time(np.linalg.eigvalsh, m, args.repeat)
        print(f"{n:5d} {'lapack':>8} {t_lapack:10.4f} {'-':>7} {0.0:10.1e}")
        for name, fn in backends:
            t, (w, _, sweeps) = _time(fn, m, args.repeat)
            err = np.max(np.abs(np.sort(w) - ref))
            print(f"{n:5d} {name:>8} {t:10.4f} {sweeps:7d} {err:10.1e}")


if __name__ == "__main__":
    main()
