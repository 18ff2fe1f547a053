"""Compare the compiled and pure-Python kernel backends.

Times pairwise distances (both kernels) and all-sources Dijkstra on a k-NN
graph, reports the best of several repeats and the largest disagreement
between backends.

    python benchmarks/bench_kernels.py --n 1000 --m 512 --threads 1
"""

import argparse
import time

import numpy as np

from chartkit import _kernels
from chartkit.isomap import knn_graph


def best_time(fn, repeats):
    best, out = np.inf, None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=1000, help="number of channels")
    parser.add_argument("--m", type=int, default=256, help="channel dimension")
    parser.add_argument("--k", type=int, default=30, help="neighbors for the Dijkstra graph")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    H = rng.standard_normal((args.n, args.m)) + 1j * rng.standard_normal((args.n, args.m))
    impls = _kernels.backends()
    print(f"selected backend: {_kernels.BACKEND}; available: {', '.join(sorted(impls))}")
    print(f"N={args.n} M={args.m} k={args.k} threads={args.threads} repeats={args.repeats}")
    print(f"{'kernel':<24}{'backend':<10}{'seconds':>10}")

    results = {}
    for kind, label in ((_kernels.KIND_EUCLIDEAN, "distances/euclidean"),
                        (_kernels.KIND_PHASE_INSENSITIVE, "distances/phase-insens.")):
        for name, impl in sorted(impls.items()):
            t, D = best_time(lambda: _kernels.pair_distances(H, kind, args.threads, impl), args.repeats)
            results[(label, name)] = D
            print(f"{label:<24}{name:<10}{t:>10.4f}")

    D = results[("distances/phase-insens.", sorted(impls)[0])]
    graph = knn_graph(D, args.k)
    for name, impl in sorted(impls.items()):
        t, G = best_time(lambda: _kernels.all_sources_dijkstra(
            graph.indptr, graph.indices, graph.weights, args.threads, impl), args.repeats)
        results[("dijkstra", name)] = G
        print(f"{'dijkstra':<24}{name:<10}{t:>10.4f}")

    if len(impls) == 2:
        for label in ("distances/euclidean", "distances/phase-insens.", "dijkstra"):
            gap = np.max(np.abs(results[(label, "compiled")] - results[(label, "python")]))
            print(f"max |compiled - python| {label}: {gap:.2e}")


if __name__ == "__main__":
    main()
