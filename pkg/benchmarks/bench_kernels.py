"""Compiled vs NumPy kernels for l^p ray lengths and section sums.

Run with ``python3 benchmarks/bench_kernels.py``.  Prints timings and the
largest disagreement between the two implementations.
"""

import argparse
import timeit

import numpy as np

from polyint import _backend
from polyint.sections import default_rule
from polyint.spheres import sphere_points


def _cases(dim, rays, slices):
    rng = np.random.default_rng(0)
    base = 0.3 * rng.uniform(-1, 1, (rays, dim)) / dim
    dirs = sphere_points(dim, rays, seed=1)
    rule = default_rule(dim)
    frame = np.linalg.qr(rng.standard_normal((dim, dim)))[0][:, 1:]
    thetas = rule.points @ frame.T
    centres = np.outer(np.linspace(-0.9, 0.9, slices), np.ones(dim) / dim)
    return base, dirs, thetas, rule.weights, centres


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--dim", type=int, default=3)
    ap.add_argument("--p", type=int, default=4)
    ap.add_argument("--rays", type=int, default=20000)
    ap.add_argument("--slices", type=int, default=33)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    if _backend.compiled is None:
        print("compiled kernels unavailable; only the fallback can be timed")
    base, dirs, thetas, weights, centres = _cases(args.dim, args.rays, args.slices)
    impls = {"numpy": _backend.fallback}
    if _backend.compiled is not None:
        impls["cython"] = _backend.compiled

    results = {}
    for name, mod in impls.items():
        t_ray = min(timeit.repeat(lambda: mod.lp_ray_lengths(base, dirs, args.p),
                                  number=1, repeat=args.repeat))
        t_sec = min(timeit.repeat(
            lambda: mod.lp_section_sums(centres, thetas, weights, args.p, args.dim - 1),
            number=1, repeat=args.repeat))
        results[name] = (t_ray, t_sec, mod.lp_ray_lengths(base, dirs, args.p),
                         mod.lp_section_sums(centres, thetas, weights, args.p, args.dim - 1))
        print(f"{name:>7}: ray lengths {t_ray * 1e3:9.2f} ms   section sums {t_sec * 1e3:9.2f} ms")

    if len(results) == 2:
        a, b = results["numpy"], results["cython"]
        print(f"speed-up: rays x{a[0] / b[0]:.1f}, sections x{a[1] / b[1]:.1f}")
        print(f"max |diff|: rays {np.max(np.abs(a[2] - b[2])):.2e}, "
              f"sections {np.max(np.abs(a[3] - b[3]) / np.abs(a[3])):.2e} (relative)")


if __name__ == "__main__":
    main()
