"""Time the compiled stencil kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--cells 4096] [--steps 2000] [--repeat 5]

Also checks that both produce identical bits before timing.
"""
import argparse
import timeit

import numpy as np

from mesoheat import _kernels_py

try:
    from mesoheat import _kernels as compiled
except ImportError:
    compiled = None


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", type=int, default=4096)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if compiled is None:
        raise SystemExit("compiled kernels not built; run `pip install -e . --no-build-isolation`")

    u = np.random.default_rng(0).random(args.cells)
    p = 1.0 / 3.0
    print(f"{'kernel':<6} {'backend':<8} {'best (s)':>10} {'cell-steps/s':>14}")
    for name in ("ring", "line"):
        fast = getattr(compiled, f"{name}_evolve")
        slow = getattr(_kernels_py, f"{name}_evolve")
        assert np.array_equal(fast(u, p, 50), slow(u, p, 50)), f"{name}: backends disagree"
        results = {}
        for label, fn in (("cython", fast), ("numpy", slow)):
            best = min(timeit.repeat(lambda: fn(u, p, args.steps), number=1, repeat=args.repeat))
            results[label] = best
            work = args.cells * args.steps
            print(f"{name:<6} {label:<8} {best:>10.4f} {work / best:>14.3e}")
        print(f"{name:<6} speedup  {results['numpy'] / results['cython']:>10.1f}x")


if __name__ == "__main__":
    main()
