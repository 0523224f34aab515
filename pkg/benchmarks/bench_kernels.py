"""Time the numba kernels against their pure-numpy fallbacks.

    python3 benchmarks/bench_kernels.py --n 100000 --repeat 5

Both variants are called directly, so the SCALSUB_BACKEND setting does
not matter here.  The first numba call is made before timing to keep JIT
compilation out of the numbers.
"""

import argparse
import math
import time

import numpy as np

from scalable_subsampling import kernels


def _cases(x, b, h, q):
    return {
        "block_means": (x, b, h, q),
        "block_quantiles": (x, b, h, q, (b + 1) // 2),
        "block_huber": (x, b, h, q, 1.345, 1e-10, 100),
        "block_kde": (x, b, h, q, 0.0, 0.0),
        "ar1_filter": (x, 0.5),
    }


def best_of(func, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        func(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=100_000)
    parser.add_argument("--beta", type=float, default=0.5, help="block length b = round(n**beta)")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    x = np.random.default_rng(args.seed).standard_normal(args.n)
    b = max(2, round(args.n**args.beta))
    h = b
    q = (args.n - b) // h + 1
    print(f"n={args.n} b={b} h={h} q={q} parallel={kernels.PARALLEL if hasattr(kernels, 'PARALLEL') else 'n/a'}")
    print(f"{'kernel':<16} {'numpy [s]':>12} {'numba [s]':>12} {'speedup':>8}")
    for name, call_args in _cases(x, b, h, q).items():
        fast = kernels.implementation(name, "numba")
        slow = kernels.implementation(name, "numpy")
        fast(*call_args)  # compile
        t_np = best_of(slow, call_args, args.repeat)
        t_nb = best_of(fast, call_args, args.repeat)
        ratio = t_np / t_nb if t_nb > 0 else math.inf
        print(f"{name:<16} {t_np:>12.3e} {t_nb:>12.3e} {ratio:>7.1f}x")


if __name__ == "__main__":
    main()
