#!/usr/bin/env python3
"""Benchmark the compiled local-move kernel against the pure-Python fallback.

Runs the community optimizer over seeded planted-partition graphs and the
proximity graph of a synthetic city, once per backend, and checks that both
produce identical partitions.

    python benchmarks/bench_louvain.py --sizes 500,2000 --repeats 3
"""

from __future__ import annotations

import argparse
import itertools
import random
import time

from siot_discovery.community import LouvainConfig, available_kernels
from siot_discovery.community.louvain import louvain_trace
from siot_discovery.ingest import ClusterSpec, SyntheticCityParams, generate_synthetic_city
from siot_discovery.model import RelationKind, SocialGraph
from siot_discovery.relations import build_clor


def planted_partition(n: int, blocks: int, p_in: float, p_out: float, seed: int) -> SocialGraph:
    rng = random.Random(seed)
    size = n // blocks
    block_of = {node: min(node // size, blocks - 1) for node in range(n)}
    edges = []
    for i, j in itertools.combinations(range(n), 2):
        p = p_in if block_of[i] == block_of[j] else p_out
        if rng.random() < p:
            edges.append((i, j, round(rng.uniform(0.3, 1.0), 6)))
    return SocialGraph.build(RelationKind.CLOR, range(n), edges)


def city_proximity_graph(n: int, seed: int) -> SocialGraph:
    params = SyntheticCityParams(
        n_devices=n,
        n_owners=max(10, n // 5),
        clusters=(
            ClusterSpec((0.2, 0.2), 0.15, 0.34),
            ClusterSpec((0.8, 0.3), 0.15, 0.33),
            ClusterSpec((0.5, 0.8), 0.15, 0.33),
        ),
        ws_k=4,
        seed=seed,
    )
    devices, _, _ = generate_synthetic_city(params)
    return build_clor(devices, threshold=0.8)


def run(graph: SocialGraph, kernel, repeats: int) -> tuple[float, dict]:
    best = float("inf")
    partition = None
    for _ in range(repeats):
        started = time.perf_counter()
        partition, _ = louvain_trace(graph, LouvainConfig(seed=0), kernel=kernel)
        best = min(best, time.perf_counter() - started)
    return best, dict(partition.assignment)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="500,2000", help="comma-separated node counts")
    parser.add_argument("--repeats", type=int, default=3, help="timing repeats (best-of)")
    args = parser.parse_args()

    kernels = available_kernels()
    if "compiled" not in kernels:
        print("compiled extension not built; benchmarking the fallback only")

    sizes = [int(s) for s in args.sizes.split(",")]
    cases = []
    for n in sizes:
        cases.append((f"planted n={n}", planted_partition(n, 4, 0.2, 0.01, seed=1)))
        cases.append((f"city    n={n}", city_proximity_graph(n, seed=2)))

    header = f"{'case':>16} {'edges':>8}" + "".join(f" {name:>13}" for name in kernels)
    print(header)
    for label, graph in cases:
        timings = {}
        partitions = {}
        for name, kernel in kernels.items():
            timings[name], partitions[name] = run(graph, kernel, args.repeats)
        row = f"{label:>16} {graph.edge_count:>8}"
        for name in kernels:
            row += f" {timings[name] * 1000:>11.1f}ms"
        if len(partitions) == 2:
            a, b = partitions.values()
            assert a == b, f"backends disagree on {label}"
            speedup = timings["pure-python"] / timings["compiled"]
            row += f"  ({speedup:.1f}x, identical partitions)"
        print(row)


if __name__ == "__main__":
    main()
