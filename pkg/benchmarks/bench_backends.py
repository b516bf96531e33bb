"""Time the compiled and pure-Python kernels on the same workloads.

    python3 benchmarks/bench_backends.py [--repeat 3]

Both backends must produce identical results; the script checks that
before reporting timings.
"""

import argparse
import functools
import statistics
import time

from logrec import kernels
from logrec.cp import CpConfig, branch_and_bound
from logrec.gen import GenSpec
from logrec.gen import generate as _generate
from logrec.ls import DESCENT, LsParams, descent, tabu_search


@functools.lru_cache(maxsize=None)
def generate(spec):
    return _generate(spec)


WORKLOADS = [
    ("cp prove r100 x10", lambda b: [branch_and_bound(generate(GenSpec(100, 1.5, 1.5, s)), backend=b)
                                     for s in range(10)]),
    ("cp prove t50 x10", lambda b: [branch_and_bound(generate(GenSpec(50, 0.0, 1.5, s)), backend=b)
                                    for s in range(10)]),
    ("cp first r1000", lambda b: [branch_and_bound(generate(GenSpec(1000, 1.5, 1.5, 0)),
                                                   CpConfig(prove_optimality=False), backend=b)]),
    ("descent t50 x10", lambda b: [descent(generate(GenSpec(50, 0.0, 1.5, s)), LsParams(mode=DESCENT), backend=b)
                                   for s in range(10)]),
    ("tabu t40 x3", lambda b: [tabu_search(generate(GenSpec(40, 0.0, 1.5, s)), LsParams(rng_seed=s), backend=b)[:2]
                               for s in range(3)]),
]


def fingerprint(results):
    return [(sched, st.best_value, st.nodes_or_iterations) for sched, st in results]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=1)
    args = ap.parse_args()
    if "native" not in kernels.BACKENDS:
        raise SystemExit("compiled extension not available; build with pip install -e . --no-build-isolation")
    print(f"{'workload':<22}{'native ms':>12}{'python ms':>12}{'speedup':>10}")
    for label, fn in WORKLOADS:
        times = {}
        outputs = {}
        for b in ("native", "python"):
            fn(b)  # warm the instance cache
            samples = []
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                outputs[b] = fn(b)
                samples.append((time.perf_counter() - t0) * 1e3)
            times[b] = statistics.median(samples)
        if fingerprint(outputs["native"]) != fingerprint(outputs["python"]):
            raise SystemExit(f"{label}: backends disagree")
        print(f"{label:<22}{times['native']:>12.1f}{times['python']:>12.1f}{times['python'] / times['native']:>9.1f}x")


if __name__ == "__main__":
    main()
