"""Compiled versus numpy kernels on the two hot loops.

Usage: python benchmarks/bench_kernels.py [--targets N] [--nodes N] [--repeat N]
"""

import argparse
import timeit

import numpy as np

from rimtrace import _backend, _pykernels
from rimtrace.kernel import kernel_coefficients


def _inputs(targets: int, nodes: int, degree: int):
    rng = np.random.default_rng(0)
    r = np.ascontiguousarray(rng.uniform(0.0, 0.99, targets))
    theta = np.ascontiguousarray(rng.uniform(0.0, 2 * np.pi, targets))
    t = np.ascontiguousarray(np.linspace(0.0, 2 * np.pi, nodes, endpoint=False))
    w = np.ascontiguousarray(np.exp(1j * t) / nodes)
    coeffs = np.ascontiguousarray(rng.normal(size=degree + 1) + 0j)
    z = np.ascontiguousarray(r * np.exp(1j * theta))
    return r, theta, t, w, coeffs, z


def _best(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--targets", type=int, default=2000)
    ap.add_argument("--nodes", type=int, default=4096)
    ap.add_argument("--degree", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    r, theta, t, w, coeffs, z = _inputs(args.targets, args.nodes, args.degree)
    impls = {"python": _pykernels}
    if _backend.compiled is not None:
        impls["compiled"] = _backend.compiled
    else:
        print("compiled kernels not built; timing the fallback only")
    print(f"{'kernel':<16}{'backend':<10}{'seconds':>10}")
    for l in (0, 1, 3):
        coef = kernel_coefficients(l)
        times = {}
        for name, impl in impls.items():
            times[name] = _best(lambda impl=impl: impl.kernel_sum(l, coef, r, theta, t, w), args.repeat)
            print(f"{'kernel_sum l=' + str(l):<16}{name:<10}{times[name]:>10.4f}")
        if len(times) == 2:
            print(f"{'':<16}{'speedup':<10}{times['python'] / times['compiled']:>9.1f}x")
    times = {}
    for name, impl in impls.items():
        times[name] = _best(lambda impl=impl: impl.horner(coeffs, z), args.repeat)
        print(f"{'horner':<16}{name:<10}{times[name]:>10.4f}")
    if len(times) == 2:
        print(f"{'':<16}{'speedup':<10}{times['python'] / times['compiled']:>9.1f}x")


if __name__ == "__main__":
    main()
