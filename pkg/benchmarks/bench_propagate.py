"""Benchmark: compiled vs pure-Python propagation kernel.

Runs the three shipped gate schedules through both backends and reports
wall-clock times and the speedup.  Usage:

    python benchmarks/bench_propagate.py [repeats]
"""

import math
import sys
import time

import numpy as np

from rydgate import kernel
from rydgate.dynamics import InternalModel, TwoAtomState, _kernel_arrays, sample_times
from rydgate.protocols import adiabatic_schedule, model_a_schedule, model_b_schedule


def cases():
    yield "model_a", model_a_schedule(1.8e11, -1.8e9, math.pi), InternalModel(-1.8e9, 1e5)
    yield "model_b", model_b_schedule(1e8, 1e8, -1.8e9), InternalModel(-1.8e9, 1e5)
    yield (
        "adiabatic",
        adiabatic_schedule(1e8, 1.7e9, 1.974e-6, delta_min=3e7),
        InternalModel(1.8e9, 1e5),
    )


def run_case(impl, schedule, model, tol=1e-9):
    a, b, durations, kinds, params = _kernel_arrays(schedule, model)
    psi0 = TwoAtomState.from_label("gg").amplitudes
    t_eval = sample_times(schedule, 64)
    out, status, _ = impl.propagate_schedule(
        a, b, durations, kinds, params, psi0, t_eval, tol, tol * 1e-6
    )
    assert status == 0
    return out


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 5
    backends = kernel.available_backends()
    if "cython" not in backends:
        print("compiled backend not available; benchmarking python only")

    print(f"{'case':<12} " + " ".join(f"{name:>12}" for name in backends) + f" {'speedup':>9}")
    for name, schedule, model in cases():
        times = {}
        final = {}
        for bname, impl in backends.items():
            best = math.inf
            for _ in range(repeats):
                t0 = time.perf_counter()
                out = run_case(impl, schedule, model)
                best = min(best, time.perf_counter() - t0)
            times[bname] = best
            final[bname] = out[-1]
        row = f"{name:<12} " + " ".join(f"{times[b] * 1e3:>10.2f}ms" for b in backends)
        if "cython" in times and "python" in times:
            row += f" {times['python'] / times['cython']:>8.1f}x"
            drift = np.max(np.abs(final["python"] - final["cython"]))
            assert drift < 1e-12, f"backend mismatch: {drift:.3e}"
        print(row)


if __name__ == "__main__":
    main()
