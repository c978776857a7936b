"""Compare the compiled and pure-Python step-curve kernels.

Builds a pressure curve the way the planner does (thousands of interval
adds followed by window-overflow queries) and times both backends on the
same workload. Run from the repo root:

    python3 benchmarks/bench_curve.py
"""

from __future__ import annotations

import random
import time

from tensortier import curve as curve_mod
from tensortier import _curve_py


HORIZON = 200_000


def _workload(seed: int, n_adds: int, n_queries: int):
    rng = random.Random(seed)
    horizon = HORIZON
    adds = []
    t = 0
    for _ in range(n_adds):
        start = rng.randrange(0, horizon - 1)
        end = rng.randrange(start + 1, horizon + 1)
        adds.append((start, end, rng.randrange(-(1 << 20), 1 << 20)))
    queries = []
    for _ in range(n_queries):
        t0 = rng.randrange(0, horizon - 1)
        t1 = rng.randrange(t0 + 1, horizon + 1)
        queries.append((rng.randrange(1 << 24), rng.randrange(1, 1 << 22),
                        t0, t1))
    return adds, queries


def _run(curve_cls, adds, queries) -> tuple[float, int]:
    t0 = time.perf_counter()
    curve = curve_cls(HORIZON)
    for start, end, delta in adds:
        curve.add(start, end, delta)
    acc = 0
    for cap, clamp, q0, q1 in queries:
        acc += curve.window_overflow_area(cap, clamp, q0, q1)
        acc += curve.max_over(q0, q1)
    elapsed = time.perf_counter() - t0
    return elapsed, acc


def main() -> None:
    backends = [("python", _curve_py.StepCurve)]
    if curve_mod.BACKEND == "cy":
        from tensortier import _curvecore
        backends.append(("cython", _curvecore.StepCurve))
    else:
        print("compiled backend unavailable; timing pure python only")

    adds, queries = _workload(seed=0, n_adds=4_000, n_queries=2_000)
    results = {}
    for name, cls in backends:
        best = None
        checksum = None
        for _ in range(3):
            elapsed, acc = _run(cls, adds, queries)
            best = elapsed if best is None else min(best, elapsed)
            checksum = acc
        results[name] = (best, checksum)
        print(f"{name:>7}: {best * 1000:8.2f} ms  (checksum {checksum})")

    if len(results) == 2:
        py, cy = results["python"][0], results["cython"][0]
        if results["python"][1] != results["cython"][1]:
            raise SystemExit("backend results disagree")
        print(f"speedup: {py / cy:.2f}x")


if __name__ == "__main__":
    main()
