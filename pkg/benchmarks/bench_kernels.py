"""Time the compiled and pure-Python kernel backends on realistic inputs.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from dstls import kernels
from dstls.battery import EcmParamMap, simulate_cell
from dstls.config import Config
from dstls.estimators import svd
from dstls.evaluation import make_trip, selector_for
from dstls.pipeline import detect_segments, rls_run


def workloads():
    cfg = Config()
    trip = make_trip(cfg, 0)
    truth = trip.truth
    pmap = EcmParamMap.default()
    sel = selector_for(cfg, 30.0)
    rng = np.random.default_rng(0)
    blocks = [rng.normal(size=(120, 4)) for _ in range(200)]
    n = len(truth)
    return {
        f"segment detection ({n} samples, d=30)": lambda: detect_segments(trip.speed, sel),
        f"cell simulation ({n} samples)": lambda: simulate_cell(pmap, truth.current, 0.95, 50.0),
        f"RLS run ({n} samples)": lambda: rls_run(truth.current, truth.terminal_voltage, truth.soc, pmap),
        "SVD (200 blocks of 120x4)": lambda: [svd(b) for b in blocks],
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.available_backends()
    jobs = workloads()
    prev = kernels.backend_name()
    results = {}
    for name in backends:
        kernels.set_backend(name)
        for label, fn in jobs.items():
            fn()  # warm up
            results[label, name] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
    kernels.set_backend(prev)
    width = max(map(len, jobs))
    print(f"{'workload':<{width}}  " + "  ".join(f"{b:>10}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for label in jobs:
        times = [results[label, b] for b in backends]
        line = f"{label:<{width}}  " + "  ".join(f"{1e3 * t:8.2f}ms" for t in times)
        if len(backends) > 1:
            line += f"  {results[label, 'python'] / results[label, 'cython']:9.1f}x"
        print(line)
    if len(backends) == 1:
        print("compiled extension not built; only the Python backend was timed")


if __name__ == "__main__":
    main()
