"""Time the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--n 64] [--d 2] [--repeat 20]
"""
import argparse
import timeit

import numpy as np

from nsmhall import kernels
from nsmhall.dynamics import Integrator, StepperConfig, make_initial, maxwell_propagator
from nsmhall.params import PhysicalParams, Variant
from nsmhall.spectral import BoxSpec


def cases(box):
    rng = np.random.default_rng(0)
    shape = (3,) + box.shape
    a, b, c = (rng.standard_normal(shape) for _ in range(3))
    E = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    B = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    blk = maxwell_propagator(box, 1.0, 1.0, 1e-3)
    xhat = box.grid().xhat
    return {
        "cross3": lambda: kernels.cross3(a, b),
        "hall_apply": lambda: kernels.hall_apply(a, 0.3, b),
        "hall_solve": lambda: kernels.hall_solve(a, 0.3, c),
        "maxwell_apply": lambda: kernels.maxwell_apply(E, B, xhat, *blk),
    }


def time_step(box, repeat):
    p = PhysicalParams(Variant.NSM_GO, kappa=0.1)
    state = make_initial("random", box, Variant.NSM_GO, amplitude=1.0)
    integ = Integrator(box, p, StepperConfig(dt=1e-3))
    U = integ.state_arrays(state)
    k1 = integ.nonlinear(U)
    return min(timeit.repeat(lambda: integ.step_arrays(U, k1), number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    box = BoxSpec(args.d, args.n)
    results = {}
    for backend in ("python", "cython"):
        try:
            kernels.use_backend(backend)
        except ImportError:
            print(f"{backend}: not available")
            continue
        for name, fn in cases(box).items():
            results[(backend, name)] = min(timeit.repeat(fn, number=5, repeat=args.repeat)) / 5
        results[(backend, "full RK4 step")] = time_step(box, max(3, args.repeat // 5))
    kernels.use_backend("python")
    names = sorted({n for _, n in results})
    print(f"grid {args.n}^{args.d}")
    print(f"{'kernel':<16}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name in names:
        py, cy = results.get(("python", name)), results.get(("cython", name))
        sp = f"{py / cy:>10.2f}" if py and cy else f"{'-':>10}"
        fmt = lambda x: f"{1e3 * x:>14.3f}" if x else f"{'-':>14}"  # noqa: E731
        print(f"{name:<16}{fmt(py)}{fmt(cy)}{sp}")


if __name__ == "__main__":
    main()
