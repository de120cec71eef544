"""Compare the compiled and numpy normalization kernels.

Usage: python3 benchmarks/bench_kernels.py [--atoms 10000] [--repeat 20]
"""

import argparse
import time

import numpy as np

from ermfdr import _kernels_py
from ermfdr.divergences import make_divergence
from ermfdr.model_space import DiscreteModelSpace
from ermfdr.solver import solve_normalization

try:
    from ermfdr import _kernels as compiled
except ImportError:
    compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--atoms", type=int, default=10000)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--lam", type=float, default=0.5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    risks = rng.uniform(0.0, 10.0, args.atoms)
    w = rng.random(args.atoms) + 1e-3
    weights = w / w.sum()
    space = DiscreteModelSpace.from_risks(risks, weights)

    backends = [("python", _kernels_py)]
    if compiled is not None:
        backends.append(("compiled", compiled))
    else:
        print("compiled extension not built; timing the numpy kernels only")

    print(f"{'divergence':<16}{'backend':<10}{'bisect ms':>12}{'beta':>24}")
    for name in ("kl", "reverse_kl", "jeffreys", "jensen_shannon", "hellinger", "chi_squared"):
        spec = make_divergence(name)
        lam = args.lam if name != "chi_squared" else 20.0
        res = solve_normalization(space, spec, lam)
        lo, hi = res.bracket
        for label, mod in backends:
            def run():
                return mod.bisect(spec.kind, spec.shift, lam, lo, hi, risks, weights, 1e-10, 200)

            t = best_of(run, args.repeat)
            b = run()[0]
            print(f"{name:<16}{label:<10}{1e3 * t:>12.3f}{b:>24.16g}")


if __name__ == "__main__":
    main()
