"""Benchmark the compiled kernels against the pure-NumPy fallback.

    python -m fracimp.benchmark [--sizes 512 2048 8192] [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None


def _time(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[512, 2048, 8192])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args(argv)

    if _compiled is None:
        print("compiled extension not built (python setup.py build_ext --inplace); "
              "timing the NumPy fallback only")
    header = f"{'kernel':<14} {'n':>6} {'numpy_s':>12}"
    if _compiled is not None:
        header += f" {'compiled_s':>12} {'speedup':>8}"
    print(header)
    rng = np.random.default_rng(0)
    for n in args.sizes:
        g = rng.standard_normal(n + 1)
        h = 1.0 / n
        for name, alpha in (("rl_all_nodes", 0.75), ("l1_all_nodes", 0.5)):
            py_fn = getattr(_kernels_py, name)
            t_py = _time(py_fn, g, alpha, h, repeats=args.repeats)
            row = f"{name:<14} {n:>6} {t_py:>12.6f}"
            if _compiled is not None:
                c_fn = getattr(_compiled, name)
                out_py = py_fn(g, alpha, h)
                out_c = c_fn(g, alpha, h)
                # summation order differs between the backends; agreement is
                # to rounding amplified by cancellation, not bit-exact
                assert np.allclose(out_py, out_c, rtol=1e-8, atol=1e-10), "backends disagree"
                t_c = _time(c_fn, g, alpha, h, repeats=args.repeats)
                row += f" {t_c:>12.6f} {t_py / t_c:>8.2f}"
            print(row)


if __name__ == "__main__":
    main()
