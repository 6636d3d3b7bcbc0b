"""Compare the compiled and pure-Python kernel backends on the same instances.

Usage: python3 benchmarks/bench_backends.py [--n 120] [--k 5 10] [--repeats 3]

Both backends run identical work (the script checks that traces and counters
agree), so the timing ratio is a direct measure of the compiled speedup.
"""

import argparse
import time

from fastpam import kernels
from fastpam.datasets import MixtureSpec, gaussian_mixture
from fastpam.dissimilarity import build_matrix
from fastpam.initializers import build_init
from fastpam.swap import SwapConfig, refine


def _time(fn):
    t0 = time.perf_counter()
    out = fn()
    return time.perf_counter() - t0, out


def run(n, ks, engines, repeats):
    names = kernels.available_backends()
    if "cython" not in names:
        print("compiled backend not built; only the Python fallback is available")
    data, _ = gaussian_mixture(MixtureSpec(n=n, clusters=max(ks), seed=0))
    matrix = build_matrix(data, "euclidean")
    saved = kernels.backend
    print(f"{'engine':>9} {'k':>3} " + " ".join(f"{b + ' ms':>12}" for b in names) + "   ratio")
    try:
        for k in ks:
            for engine in engines:
                times, results = {}, {}
                for name in names:
                    kernels.backend = kernels.get_backend(name)
                    start = build_init(matrix, k)
                    best = float("inf")
                    for _ in range(repeats):
                        dt, out = _time(lambda: refine(matrix, start, SwapConfig(engine, trace=True)))
                        best = min(best, dt)
                    times[name] = best * 1e3
                    state, _, stats = out
                    results[name] = ([r.key() for r in stats.trace], stats.inner_updates,
                                     list(state.medoids))
                if len(set(map(repr, results.values()))) != 1:
                    raise SystemExit(f"backend mismatch for {engine} k={k}")
                ratio = times["python"] / times["cython"] if "cython" in times else 1.0
                cols = " ".join(f"{times[b]:12.2f}" for b in names)
                print(f"{engine:>9} {k:>3} {cols}  {ratio:6.1f}x")
    finally:
        kernels.backend = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=120)
    ap.add_argument("--k", type=int, nargs="+", default=[5, 10])
    ap.add_argument("--engines", nargs="+", default=["pam", "fastpam1", "fastpam2"])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    run(args.n, args.k, args.engines, args.repeats)


if __name__ == "__main__":
    main()
