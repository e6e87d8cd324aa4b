"""Compare the compiled and numpy kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5] [--n 256]
Prints best-of-``repeat`` wall times and the maximum relative difference
between backends for each kernel.
"""
import argparse
import timeit

import numpy as np
from scipy.special import gamma

from mmfnoise import _backend


def cases(n, n_paths):
    rng = np.random.default_rng(0)
    t = np.linspace(0.0, 10.0, n)
    h = 0.65 + 0.1 * np.sin(2 * np.pi * t / 20.0)
    ta = t[1:]
    gam = h - 0.5
    norm = 1.0 / gamma(gam + 1.0)
    dt = np.diff(t)
    dw = rng.standard_normal((n_paths, n - 1)) * np.sqrt(dt)
    sig = np.full(n, 0.1)
    inc = np.hstack([np.zeros((n_paths, 1)), np.cumsum(dw, axis=1)])
    return {
        "rl_covariance_matrix": lambda k: k.rl_covariance_matrix(ta, h[1:]),
        "volterra_increments": lambda k: k.volterra_increments(t, gam, norm, dw),
        "euler_linear": lambda k: k.euler_linear(inc, dt, 0.05, sig, 1.0),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--paths", type=int, default=64)
    a = ap.parse_args()
    names = _backend.available()
    print(f"backends: {', '.join(names)}; n = {a.n}, paths = {a.paths}")
    if "cython" not in names:
        print("compiled extension not built; only the python backend is timed")
    for kname, fn in cases(a.n, a.paths).items():
        times, outs = {}, {}
        for b in names:
            k = _backend.kernels(b)
            outs[b] = np.asarray(fn(k))
            times[b] = min(timeit.repeat(lambda: fn(k), number=1, repeat=a.repeat))
        line = "  ".join(f"{b} {times[b] * 1e3:9.3f} ms" for b in names)
        if len(names) == 2:
            ref = outs["python"]
            diff = float(np.max(np.abs(outs["cython"] - ref)) / max(np.max(np.abs(ref)), 1e-300))
            line += f"  speedup {times['python'] / times['cython']:6.1f}x  max rel diff {diff:.2e}"
        print(f"{kname:22s} {line}")


if __name__ == "__main__":
    main()
