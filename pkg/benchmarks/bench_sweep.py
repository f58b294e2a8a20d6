"""Time one Gauss-Seidel sweep with the compiled and pure-Python backends.

    python3 benchmarks/bench_sweep.py --sizes 16 32 64 --repeat 3
"""
import argparse
import timeit

import numpy as np

from mfunwrap import kernels
from mfunwrap.grid import WrappedImage
from mfunwrap.model import BeliefField, ModelParams
from mfunwrap.solver import _edge_order


def time_sweep(img, params, backend, repeat):
    beliefs = BeliefField.uniform(*img.shape)
    order = _edge_order(*img.shape)
    dx, dy = img.dx(), img.dy()

    def run():
        kernels.sweep_inplace(dx, dy, beliefs.alpha, beliefs.beta, 1.0 / params.temperature,
                              params.data_weight, order, backend)

    number = 1 if backend == "python" else 20
    return min(timeit.repeat(run, number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[16, 32, 64, 128])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--temperature", type=float, default=1.0)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    params = ModelParams(args.temperature)
    rng = np.random.default_rng(0)
    print(f"{'size':>6} {'edges':>8} " + " ".join(f"{b + ' [ms]':>14}" for b in backends)
          + ("    speedup" if "cython" in backends else ""))
    for n in args.sizes:
        img = WrappedImage(rng.random((n, n)))
        times = {b: time_sweep(img, params, b, args.repeat) for b in backends}
        row = f"{n:>6} {2 * n * (n - 1):>8} " + " ".join(f"{times[b] * 1e3:>14.3f}" for b in backends)
        if "cython" in times:
            row += f" {times['python'] / times['cython']:>10.0f}x"
        print(row)


if __name__ == "__main__":
    main()
