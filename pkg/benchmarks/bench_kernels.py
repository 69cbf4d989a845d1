"""Benchmark the outcome-enumeration kernel: numba vs pure numpy.

Times the expected-information accumulation on scenarios of growing
enumeration size and checks both backends produce the same matrix.

    python benchmarks/bench_kernels.py [--repeats 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from swdpwr import kernels
from swdpwr.design import Design
from swdpwr.glmm import expected_information
from swdpwr.links import gauss_hermite_rule, get_link, identify_conditional_params

CASES = [
    # (label, J, K, time_effects)
    ("J=3 K=30 with time effects", 3, 30, True),
    ("J=3 K=50 with time effects", 3, 50, True),
    ("J=3 K=100 with time effects", 3, 100, True),
    ("J=4 K=120 collapsed (no time effects)", 4, 120, False),
]


def build_case(J: int, K: int, time_effects: bool):
    rows = [(6, tuple([0] * s + [1] * (J - s))) for s in range(1, J)]
    design = Design.from_rows(rows)
    rule = gauss_hermite_rule(30)
    link = get_link("logit")
    end0 = 0.25 if time_effects else 0.2
    params = identify_conditional_params(0.2, end0, 0.35, None, 0.05, link, rule)
    return design, params, rule, link


def run_case(label: str, J: int, K: int, time_effects: bool, repeats: int):
    design, params, rule, link = build_case(J, K, time_effects)
    results = {}
    for backend in ("numba", "numpy"):
        if backend == "numba" and not kernels.HAVE_NUMBA:
            continue
        kernels.USE_NUMBA = backend == "numba"
        # warm-up exercises the JIT compile so timings measure steady state
        expected_information(design, params, K, link, rule, time_effects, budget=1e10)
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            info = expected_information(design, params, K, link, rule, time_effects, budget=1e10)
            times.append(time.perf_counter() - t0)
        results[backend] = (min(times), info)
    return results


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    print(f"numba available: {kernels.HAVE_NUMBA}")
    header = f"{'case':<42} {'numba':>10} {'numpy':>10} {'speedup':>9} {'max rel diff':>13}"
    print(header)
    print("-" * len(header))
    for label, J, K, te in CASES:
        results = run_case(label, J, K, te, args.repeats)
        t_np = results["numpy"][0]
        if "numba" in results:
            t_nb = results["numba"][0]
            a, b = results["numba"][1], results["numpy"][1]
            rel = float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
            print(f"{label:<42} {t_nb:>9.3f}s {t_np:>9.3f}s {t_np / t_nb:>8.1f}x {rel:>13.2e}")
        else:
            print(f"{label:<42} {'-':>10} {t_np:>9.3f}s {'-':>9} {'-':>13}")


if __name__ == "__main__":
    main()
