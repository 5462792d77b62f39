"""Compare the compiled and pure-Python Jacobi kernels.

Usage: ``python3 benchmarks/bench_kernels.py [--sizes 4,8,16] [--repeat 5]``
"""
import argparse
import time

import numpy as np

from bipartite._kernels import available_backends


def _hermitian(n, rng):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return g + g.conj().T


def _time_eig(mod, h, repeat):
    best = np.inf
    for _ in range(repeat):
        a = np.ascontiguousarray(h.copy())
        v = np.ascontiguousarray(np.eye(h.shape[0], dtype=np.complex128))
        t0 = time.perf_counter()
        mod.jacobi_hermitian(a, v, 1e-13 * np.linalg.norm(h), 100, True)
        best = min(best, time.perf_counter() - t0)
    return best, np.sort(np.diagonal(a).real)


def _time_batch(mod, stack, repeat):
    best = np.inf
    for _ in range(repeat):
        a = np.ascontiguousarray(stack.copy())
        out = np.zeros(stack.shape[:2])
        t0 = time.perf_counter()
        mod.jacobi_eigvals_batch(a, out, 1e-13, 100)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="4,8,16,32")
    ap.add_argument("--batch", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    print(f"{'n':>4} {'backend':>9} {'eig [ms]':>10} {'batch [ms]':>11} {'max |dlambda|':>14}")
    for n in (int(x) for x in args.sizes.split(",")):
        h = _hermitian(n, rng)
        ref = np.linalg.eigvalsh(h)
        stack = np.stack([_hermitian(min(n, 4), rng) for _ in range(args.batch)])
        for name, mod in backends.items():
            t_eig, lam = _time_eig(mod, h, args.repeat)
            t_batch = _time_batch(mod, stack, max(1, args.repeat // 2)) if n <= 8 else float("nan")
            print(f"{n:>4} {name:>9} {1e3 * t_eig:>10.3f} {1e3 * t_batch:>11.3f} {np.max(np.abs(lam - ref)):>14.2e}")


if __name__ == "__main__":
    main()
