"""Compiled vs numpy integrand kernels, per call and inside a full pressure evaluation.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.
"""
import argparse
import time

import numpy as np

from slabcavity import kernels
from slabcavity.dispersion import builtin_material
from slabcavity.force import force_delta_form
from slabcavity.fresnel import Stack, interface_data


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    al = builtin_material("al_drude")
    stack = Stack(al, al, builtin_material("vacuum"))
    h, b, delta = 2.5e-6, 0.5e-6, 0.3e-6
    a_plus, a_minus = h / 2 + delta, h / 2 - delta
    data = interface_data(stack, 2.5e14)
    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    print(f"import-time backend: {kernels.BACKEND}")

    print(f"{'nodes':>8} {'mode':>6} " + " ".join(f"{b_:>12}" for b_ in backends) + "   speedup")
    for n in (600, 20_000, 200_000):
        kg = np.geomspace(1e-3, 60, n) / a_minus
        for mode in (kernels.MODE_DELTA, kernels.MODE_RESIDUAL):
            t = {be: best_of(lambda: kernels.integrand(mode, kg, data, a_plus, a_minus, b, backend=be),
                             args.repeat) for be in backends}
            ref = kernels.integrand(mode, kg, data, a_plus, a_minus, b, backend="python")
            line = f"{n:>8} {mode:>6} " + " ".join(f"{t[be] * 1e3:>10.3f}ms" for be in backends)
            if "cython" in t:
                got = kernels.integrand(mode, kg, data, a_plus, a_minus, b, backend="cython")
                diff = np.max(np.abs(got - ref)) / np.max(np.abs(ref))
                line += f"   {t['python'] / t['cython']:6.2f}x  (max rel diff {diff:.1e})"
            print(line)

    print("\nfull pressure, Al cavity at 300 K:")
    selected = kernels.BACKEND
    try:
        for be in backends:
            kernels.BACKEND = be
            dt = best_of(lambda: force_delta_form(h, b, delta, stack, 300.0), max(1, args.repeat // 2))
            print(f"  {be:>7}: {dt * 1e3:8.2f} ms  F = {force_delta_form(h, b, delta, stack, 300.0).pressure!r}")
    finally:
        kernels.BACKEND = selected


if __name__ == "__main__":
    main()
