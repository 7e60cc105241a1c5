"""Greedy two-phase modularity maximization over weighted graphs.

Phase one sweeps single-node moves (the hot loop, dispatched to the compiled
or pure-Python kernel); phase two collapses communities into super-nodes and
repeats. Deterministic for a fixed seed: nodes are visited in ascending id
unless shuffling is enabled, and equal-gain ties go to the lowest community
id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EdgelessGraphError, ParameterError
from ..model import Partition, SocialGraph
from . import backend
from .graphops import CsrGraph, csr_from_pairs, to_csr


@dataclass(frozen=True)
class LouvainConfig:
    seed: int = 0
    min_modularity_gain: float = 1e-7
    max_passes: int = 100
    shuffle: bool = False

    def __post_init__(self) -> None:
        if not self.min_modularity_gain > 0:
            raise ParameterError("min_modularity_gain must be positive")
        if self.max_passes < 1:
            raise ParameterError("max_passes must be at least 1")


def louvain(graph: SocialGraph, config: LouvainConfig | None = None) -> Partition:
    partition, _ = louvain_trace(graph, config)
    return partition


def louvain_trace(
    graph: SocialGraph,
    config: LouvainConfig | None = None,
    kernel=None,
) -> tuple[Partition, tuple[float, ...]]:
    """Run the optimizer and also return modularity after every sweep.

    The trace is non-decreasing: each sweep only applies moves whose gain
    meets the configured minimum.
    """
    config = config or LouvainConfig()
    if not graph.edges:
        raise EdgelessGraphError("community detection needs at least one edge")
    kernel = kernel or backend.active_kernel()

    csr = to_csr(graph)
    n0 = csr.n_nodes
    # node_map[i] = community of original node i, refined level by level
    node_map = np.arange(n0, dtype=np.int64)
    rng = np.random.default_rng(config.seed)
    trace: list[float] = []
    sweeps_left = config.max_passes

    level_csr = csr
    while True:
        n = level_csr.n_nodes
        node_comm = np.arange(n, dtype=np.int64)
        comm_tot = level_csr.degrees.copy()
        comm_in = 2.0 * level_csr.loops
        level_moves = 0

        while sweeps_left > 0:
            order = (
                rng.permutation(n).astype(np.int64)
                if config.shuffle
                else np.arange(n, dtype=np.int64)
            )
            moved = kernel.louvain_pass(
                level_csr.indptr, level_csr.indices, level_csr.weights,
                level_csr.loops, level_csr.degrees, node_comm,
                comm_tot, comm_in, level_csr.two_m, order,
                config.min_modularity_gain,
            )
            sweeps_left -= 1
            trace.append(_q_from_state(comm_in, comm_tot, level_csr.two_m))
            level_moves += moved
            if moved == 0:
                break

        if level_moves == 0:
            break

        # fold this level's result into the original-node mapping, then
        # aggregate communities into super-nodes
        labels, node_comm = np.unique(node_comm, return_inverse=True)
        node_comm = node_comm.astype(np.int64)
        k = len(labels)
        node_map = node_comm[node_map]
        if sweeps_left <= 0 or k == n:
            break
        level_csr = _aggregate(level_csr, node_comm, k)

    assignment = _canonical_assignment(csr.ids, node_map)
    return Partition(relation_kind=graph.relation_kind, assignment=assignment), tuple(trace)


def _q_from_state(comm_in: np.ndarray, comm_tot: np.ndarray, two_m: float) -> float:
    return float(comm_in.sum() / two_m - np.square(comm_tot / two_m).sum())


def _aggregate(csr: CsrGraph, node_comm: np.ndarray, k: int) -> CsrGraph:
    # each undirected edge appears twice in CSR; keep the src < dst copy
    n = csr.n_nodes
    src = np.repeat(np.arange(n, dtype=np.int64), np.diff(csr.indptr))
    keep = src < csr.indices
    cs = node_comm[src[keep]]
    cd = node_comm[csr.indices[keep]]
    w = csr.weights[keep]

    loops = np.zeros(k, dtype=np.float64)
    np.add.at(loops, node_comm, csr.loops)
    internal = cs == cd
    np.add.at(loops, cs[internal], w[internal])

    a = np.minimum(cs[~internal], cd[~internal])
    b = np.maximum(cs[~internal], cd[~internal])
    if len(a):
        key = a * np.int64(k) + b
        uniq, inverse = np.unique(key, return_inverse=True)
        sums = np.bincount(inverse, weights=w[~internal])
        return csr_from_pairs(k, uniq // k, uniq % k, sums, loops)
    return csr_from_pairs(
        k, np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0, np.float64), loops
    )


def _canonical_assignment(ids: np.ndarray, node_map: np.ndarray) -> dict[int, int]:
    """Renumber communities contiguously from 0 in order of smallest member id."""
    renumber: dict[int, int] = {}
    assignment: dict[int, int] = {}
    for pos in range(len(ids)):
        comm = int(node_map[pos])
        if comm not in renumber:
            renumber[comm] = len(renumber)
        assignment[int(ids[pos])] = renumber[comm]
    return assignment
