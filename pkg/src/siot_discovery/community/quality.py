"""Partition quality: weighted modularity."""

from __future__ import annotations

import math

from ..errors import EdgelessGraphError
from ..model import Partition, SocialGraph, check_partition


def modularity(graph: SocialGraph, partition: Partition) -> float:
    """Q = (1/2m) sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j).

    Weighted adjacency, weighted degrees; the null term includes i = j.
    Result lies in [-1/2, 1]. Raises EdgelessGraphError when the graph has
    no edges (m = 0 leaves Q undefined).
    """
    if not graph.edges:
        raise EdgelessGraphError("modularity is undefined on an edgeless graph")
    check_partition(partition, graph.nodes)

    two_m = 2.0 * graph.total_weight
    internal: dict[int, float] = {}
    totals: dict[int, float] = {}
    assignment = partition.assignment
    for i, j, w in graph.edges:
        if assignment[i] == assignment[j]:
            internal[assignment[i]] = internal.get(assignment[i], 0.0) + w
    for node, degree in graph.weighted_degrees.items():
        c = assignment[node]
        totals[c] = totals.get(c, 0.0) + degree

    q = math.fsum(2.0 * w_in / two_m for w_in in internal.values())
    q -= math.fsum((tot / two_m) ** 2 for tot in totals.values())
    return q
