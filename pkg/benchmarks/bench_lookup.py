"""Time batched greedy lookups on each available backend.

    python3 benchmarks/bench_lookup.py --n 4096 --k 4 --lookups 50000
"""

import argparse
import time

import numpy as np

from recursive_dht.kernels import BACKENDS
from recursive_dht.routing import RoutingSnapshot
from recursive_dht.simulator import run_static


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--lookups", type=int, default=50_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    net, _ = run_static(args.n, args.k, args.seed, lookups=0)
    snap = RoutingSnapshot(net)
    rng = np.random.default_rng(args.seed)
    starts = rng.integers(0, len(net), size=args.lookups)
    keys = rng.random(args.lookups)

    results = {}
    print(f"n={len(net)} k={args.k} lookups={args.lookups}")
    for name in sorted(BACKENDS):
        best = float("inf")
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            out = snap.lookup_many(starts, keys, backend=name)
            best = min(best, time.perf_counter() - t0)
        results[name] = out
        print(f"{name:>9}: {best:8.4f} s  {args.lookups / best:12.0f} lookups/s  mean hops {out[1].mean():.3f}")

    if len(results) == 2:
        a, b = results.values()
        same = all(np.array_equal(x, y) for x, y in zip(a, b))
        print(f"backends agree: {same}")


if __name__ == "__main__":
    main()
