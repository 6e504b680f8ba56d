"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from upcint import _pykernels

try:
    from upcint import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def cases(rng):
    x = rng.uniform(1e-3, 30.0, 200_000)
    k = rng.uniform(10.0, 5000.0, 200_000)
    b = rng.uniform(14.0, 2000.0, 200_000)
    pt = np.linspace(0.0, 200.0, 200)
    nodes = np.geomspace(14.0, 600.0, 4000)
    w = np.exp(-nodes / 100.0)
    phi = rng.uniform(0, 2 * np.pi, 200_000)
    return {
        "bessel_k0 (2e5)": lambda m: m.bessel_k0(x),
        "bessel_k1 (2e5)": lambda m: m.bessel_k1(x),
        "flux_shape (2e5)": lambda m: m.flux_shape(k, b, 107.4),
        "eta_values (2e5)": lambda m: m.eta_values(1, 0.0, b, k, 775.26, 1.0, 1.2),
        "point_rate (2e5)": lambda m: m.point_rate(k, b, phi, 1.0, 0.0, 0.0, 1.0),
        "coherent_b_sums (200x4000)": lambda m: m.coherent_b_sums(pt, nodes, w, 2, 0.0, 3096.9, 1.0, 2248.0),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    print(f"{'kernel':30s}" + "".join(f"{name:>12s}" for name, _ in backends) + ("     speedup" if _ckernels else ""))
    for label, fn in cases(np.random.default_rng(0)).items():
        times = [min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) for _, mod in backends]
        row = f"{label:30s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
