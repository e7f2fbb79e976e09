#!/usr/bin/env python3
"""Time the compiled phase-space kernels against the NumPy reference.

Each kernel runs on problem sizes matching a production run, best-of-N
wall time per call is reported for both backends, and the outputs are
compared elementwise.  Without the compiled extension the script still
times the NumPy backend and says why the comparison column is empty.

Usage: python3 benchmarks/bench_kernels.py [--nx 256] [--nv 256]
       [--species 2] [--repeats 200]
"""

import argparse
import time

import numpy as np

from vpfplab.kernels import _impl_py

try:
    from vpfplab.kernels import _impl_c
except ImportError:
    _impl_c = None


def best_of(fn, args, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def make_cases(nx, nv, ns, rng):
    f2 = rng.random((nx, nv))
    f3 = rng.random((ns, nx, nv))
    cx = rng.uniform(-0.9, 0.9, nv)
    cv = rng.uniform(-0.9, 0.9, nx)
    fa = -rng.random(nv - 1)
    fb = rng.random(nv - 1)
    lower = -rng.random(nv - 1)
    upper = -rng.random(nv - 1)
    diag = 1.0 - np.concatenate([[0.0], lower]) - np.concatenate([upper, [0.0]])
    rhs = rng.random((nx, nv))
    return [
        ("advect_x", lambda m: m.advect_x, (f2, cx)),
        ("advect_v", lambda m: m.advect_v, (f2, cv)),
        ("fp_apply (2d)", lambda m: m.fp_apply, (f2, fa, fb, 0.25)),
        ("fp_apply (3d)", lambda m: m.fp_apply, (f3, fa, fb, 0.25)),
        ("thomas_shared", lambda m: m.thomas_shared, (lower, diag, upper, rhs)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nx", type=int, default=256)
    ap.add_argument("--nv", type=int, default=256)
    ap.add_argument("--species", type=int, default=2)
    ap.add_argument("--repeats", type=int, default=200)
    args = ap.parse_args()

    rng = np.random.default_rng(7)
    cases = make_cases(args.nx, args.nv, args.species, rng)

    print(f"grid {args.nx} x {args.nv}, {args.species} species, "
          f"best of {args.repeats} calls")
    if _impl_c is None:
        print("compiled extension not built; timing the NumPy backend only")
    header = f"{'kernel':<16s} {'numpy':>10s} {'compiled':>10s} " \
             f"{'speedup':>8s} {'max |diff|':>11s}"
    print(header)
    print("-" * len(header))
    for name, pick, call_args in cases:
        t_py = best_of(pick(_impl_py), call_args, args.repeats)
        if _impl_c is None:
            print(f"{name:<16s} {t_py * 1e6:>8.1f} us {'-':>10s} "
                  f"{'-':>8s} {'-':>11s}")
            continue
        t_c = best_of(pick(_impl_c), call_args, args.repeats)
        dev = float(np.abs(np.asarray(pick(_impl_py)(*call_args))
                           - np.asarray(pick(_impl_c)(*call_args))).max())
        print(f"{name:<16s} {t_py * 1e6:>8.1f} us {t_c * 1e6:>8.1f} us "
              f"{t_py / t_c:>7.1f}x {dev:>11.3e}")


if __name__ == "__main__":
    main()
