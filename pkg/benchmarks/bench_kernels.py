"""Compare the Cython and numpy nearest-point kernels.

    python3 benchmarks/bench_kernels.py [--points N] [--repeat R]

Prints one line per (lattice, backend) with the best time over R runs and
checks that both backends return identical points.
"""

import argparse
import time

import numpy as np

from latticode import _kernels_py, cvp

try:
    from latticode import _ckernels
except ImportError:
    _ckernels = None



def _quantizers():
    yield "D8", cvp.D_N, 8
    yield "E8", cvp.E8, 8
    yield "BW16", cvp.BW16, 16
    yield "E8^8", cvp.ProductQuantizer(cvp.E8, 8), 64


def _time(quantizer, a, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = quantizer.grid(a, cvp.FRAC_BITS)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = [("python", _kernels_py)]
    if _ckernels is not None:
        backends.insert(0, ("cython", _ckernels))
    else:
        print("Cython extension not built; timing the numpy kernels only")

    rng = np.random.default_rng(args.seed)
    saved = cvp.kernels
    try:
        for name, quantizer, dim in _quantizers():
            a = np.rint(rng.normal(0, 4, (args.points, dim)) * (1 << cvp.FRAC_BITS)).astype(np.int64)
            results = {}
            for label, module in backends:
                cvp.kernels = module
                results[label] = _time(quantizer, a, args.repeat)
            outs = [r[1] for r in results.values()]
            same = all(np.array_equal(outs[0], o) for o in outs[1:])
            times = "  ".join(f"{k}={v[0]:.3f}s" for k, v in results.items())
            speedup = ""
            if len(results) == 2:
                speedup = f"  speedup={results['python'][0] / results['cython'][0]:.1f}x"
            print(f"{name:6} n={args.points:<7} {times}{speedup}  identical={same}")
    finally:
        cvp.kernels = saved


if __name__ == "__main__":
    main()
