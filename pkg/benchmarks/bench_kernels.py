"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat 20] [--n 200] [--m 4096]

Prints one line per kernel with the mean time of each backend and the ratio.
The first numba call (compilation or cache load) is excluded.
"""

import argparse
import time

import numpy as np

from psisolve import _kernels
from psisolve.estimators import estimate
from psisolve.psifamilies import make_family
from psisolve.core import validate_weighted_sample


def _time(fn, repeat):
    fn()  # warm up
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--n", type=int, default=200, help="sample size")
    ap.add_argument("--m", type=int, default=4096, help="grid points")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    values = rng.normal(size=(args.n, args.m))
    weights = rng.uniform(0.1, 5.0, args.n)
    curve = np.cumsum(rng.uniform(0.0, 1.0, 50 * args.m))
    signs = np.sign(rng.normal(size=50 * args.m)).astype(np.int8)
    sample = validate_weighted_sample(rng.uniform(-10, 10, args.n), weights)
    catoni = make_family("mathieu:catoni:b=1")

    cases = {
        "weighted_colsum": lambda: _kernels.weighted_colsum(values, weights),
        "increase_scan": lambda: _kernels.increase_scan(curve, 0.0, True),
        "level_scan": lambda: _kernels.level_scan(curve, curve[-1] + 1.0),
        "sign_scan": lambda: _kernels.sign_scan(signs),
        "estimate(catoni)": lambda: estimate(catoni, sample),
    }
    if not _kernels.HAVE_NUMBA:
        print("numba not importable; only the numpy backend can be timed")
    print(f"{'kernel':<18}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    previous = _kernels.backend()
    try:
        for name, fn in cases.items():
            _kernels.set_backend("numpy")
            t_np = _time(fn, args.repeat)
            if _kernels.HAVE_NUMBA:
                _kernels.set_backend("numba")
                t_nb = _time(fn, args.repeat)
                print(f"{name:<18}{t_np * 1e3:12.3f}{t_nb * 1e3:12.3f}{t_np / t_nb:10.1f}x")
            else:
                print(f"{name:<18}{t_np * 1e3:12.3f}{'-':>12}{'-':>10}")
    finally:
        _kernels.set_backend(previous)


if __name__ == "__main__":
    main()
