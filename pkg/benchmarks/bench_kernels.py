"""numba vs numpy timings for the hot kernels.

Run with ``python3 benchmarks/bench_kernels.py``. Each kernel is checked for
equal output between the two backends before it is timed. Numba compile time
is excluded by a warm-up call.
"""
import argparse
import statistics
import sys
import time

import numpy as np

from mvgegenbauer import _kernels as K
from mvgegenbauer._accel import USE_NUMBA


def median_time(func, args, repeats):
    func(*args)
    ts = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        func(*args)
        ts.append(time.perf_counter() - t0)
    return statistics.median(ts)


def cases(rng, d, n):
    a = rng.standard_normal((n, d, d))
    b = rng.standard_normal((n, d, d))
    xs = np.linspace(-1, 1, 257)
    pn = rng.standard_normal((n, d, d))
    pm = rng.standard_normal((n - 1, d, d))
    A = rng.standard_normal((d, d))
    B = rng.standard_normal((d, d))
    return {
        "cauchy_matmul": ((a, b), K.cauchy_matmul_jit, K.cauchy_matmul_numpy),
        "horner_batch": ((a, xs), K.horner_batch_jit, K.horner_batch_numpy),
        "recurrence_step": ((pn, pm, A, B), K.recurrence_step_jit, K.recurrence_step_numpy),
        "gegenbauer_grid": ((n, 1.3, xs), K.gegenbauer_grid_jit, K.gegenbauer_grid_numpy),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not USE_NUMBA:
        print("numba disabled (MVGEG_NUMBA=0 or not installed); nothing to compare", file=sys.stderr)
        return 1
    rng = np.random.default_rng(args.seed)
    print("kernel,d,n,numba_s,numpy_s,speedup")
    for d in (2, 4, 7):
        for n in (8, 32, 128):
            for name, (inputs, fast, slow) in cases(rng, d, n).items():
                np.testing.assert_allclose(fast(*inputs), slow(*inputs), rtol=1e-12, atol=1e-12)
                tf = median_time(fast, inputs, args.repeats)
                ts = median_time(slow, inputs, args.repeats)
                print(f"{name},{d},{n},{tf:.3e},{ts:.3e},{ts / tf:.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
