"""Compare the compiled kernel backend against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]

Times the two hot kernels (lexicase survivor filtering and batched
register-machine execution) on paper-scale workloads and prints the
per-call cost and speedup. Both backends receive identical inputs, so
this doubles as a smoke check that they agree.
"""

import argparse
import time

import numpy as np

from phylex import _kernels_py

try:
    from phylex import _kernels_c
except ImportError:
    _kernels_c = None

from phylex.gp import build_problem, random_program
from phylex.core import RngStream


def time_call(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_lexicase(backend, repeats):
    rng = np.random.default_rng(0)
    scores = rng.integers(0, 2, size=(1000, 100)).astype(np.float64)
    unknown = np.zeros((1000, 100), dtype=np.uint8)
    candidates = np.arange(1000, dtype=np.int64)
    orders = [rng.permutation(100).astype(np.int64) for _ in range(200)]

    def run():
        for order in orders:
            backend.lexicase_filter(scores, unknown, candidates, order)

    return time_call(lambda: run(), (), repeats) / len(orders)


def bench_interpreter(backend, repeats):
    spec = build_problem("median", RngStream(0))
    inputs = np.array([c.inputs for c in spec.training], dtype=np.int64)
    expected = np.array([c.expected_output for c in spec.training], dtype=np.int64)
    gen = np.random.default_rng(1)
    programs = [random_program(gen, spec.max_len) for _ in range(100)]

    def run():
        for program in programs:
            backend.run_program_cases(program, inputs, expected, spec.max_steps)

    return time_call(lambda: run(), (), repeats) / len(programs)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3,
                        help="timing repetitions (best-of)")
    args = parser.parse_args()

    backends = [("python", _kernels_py)]
    if _kernels_c is not None:
        backends.append(("cython", _kernels_c))
    else:
        print("compiled backend not built; timing pure Python only")

    results = {}
    for name, backend in backends:
        lex = bench_lexicase(backend, args.repeats)
        interp = bench_interpreter(backend, args.repeats)
        results[name] = (lex, interp)
        print(f"{name:>8}: lexicase_filter (1000x100, 200 orders) "
              f"{lex * 1e6:8.1f} us/call | run_program_cases (100 cases) "
              f"{interp * 1e6:8.1f} us/program")

    if len(results) == 2:
        py, cy = results["python"], results["cython"]
        print(f"speedup: lexicase_filter {py[0] / cy[0]:.1f}x, "
              f"run_program_cases {py[1] / cy[1]:.1f}x")


if __name__ == "__main__":
    main()
