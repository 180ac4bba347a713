"""Compare the compiled kernels against the pure numpy/scipy fallback.

Times the two hot paths: a single matrix exponential and the full
product-integral accumulation loop, at a few dimensions.  Run as

    python benchmarks/bench_kernels.py [--steps N] [--repeats R]
"""

import argparse
import math
import time

import numpy as np

from transportq._kernels import _pure

try:
    from transportq._kernels import _core
except ImportError:
    _core = None


def skew_samples(rng, steps, m, n):
    h = rng.standard_normal((steps, m, n, n)) + 1j * rng.standard_normal(
        (steps, m, n, n)
    )
    h = 0.5 * (h + h.conj().transpose(0, 1, 3, 2))
    return 1j * h / math.sqrt(n)


def best_of(repeats, fn, *args):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=20_000,
                        help="accumulation steps per timing (default 20000)")
    parser.add_argument("--repeats", type=int, default=3,
                        help="repeats, best-of (default 3)")
    args = parser.parse_args()

    if _core is None:
        print("compiled kernel not built; nothing to compare")
        return

    rng = np.random.default_rng(42)
    print(f"accumulation: {args.steps} magnus4 steps, best of {args.repeats}")
    print(f"{'dim':>4} {'pure [s]':>10} {'compiled [s]':>13} {'speedup':>8}")
    for n in (2, 4, 8, 16):
        samples = skew_samples(rng, args.steps, 2, n)
        dt = 1.0 / args.steps
        t_pure = best_of(args.repeats, _pure.transport_accumulate, samples, dt)
        t_comp = best_of(args.repeats, _core.transport_accumulate, samples, dt)
        a = _pure.transport_accumulate(samples, dt)
        b = _core.transport_accumulate(samples, dt)
        drift = np.abs(a[-1] - b[-1]).max()
        assert drift < 1e-8, f"backends disagree by {drift:.3e}"
        print(f"{n:>4} {t_pure:>10.3f} {t_comp:>13.3f} {t_pure / t_comp:>8.1f}x")

    print()
    print(f"single expm, best of {max(args.repeats, 10)}")
    print(f"{'dim':>4} {'pure [us]':>10} {'compiled [us]':>14} {'speedup':>8}")
    for n in (2, 8, 32, 64):
        h = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        a = 1j * 0.5 * (h + h.conj().T) / math.sqrt(n)
        reps = max(args.repeats, 10)
        t_pure = best_of(reps, _pure.expm, a)
        t_comp = best_of(reps, _core.expm, a)
        print(f"{n:>4} {t_pure * 1e6:>10.1f} {t_comp * 1e6:>14.1f} "
              f"{t_pure / t_comp:>8.1f}x")


if __name__ == "__main__":
    main()
