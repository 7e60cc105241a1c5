"""Graph and community statistics: size histograms, degree distributions,
clustering coefficients."""

from __future__ import annotations

from dataclasses import dataclass

from ..model import Cover, Partition, SocialGraph

OTHERS_LABEL = "Others"


@dataclass(frozen=True)
class Histogram:
    """Ordered (label, count) rows; community histograms may end with an
    aggregate "Others" bucket."""

    entries: tuple[tuple[str, int], ...]

    @property
    def total(self) -> int:
        return sum(count for _, count in self.entries)

    def as_rows(self) -> list[tuple[str, int]]:
        return list(self.entries)


def community_histogram(communities: Partition | Cover, others_threshold: int = 4) -> Histogram:
    """Per-community device counts, largest first; communities smaller than
    ``others_threshold`` are pooled into one trailing "Others" bucket."""
    sizes = [(idx, len(members)) for idx, members in enumerate(communities.communities)]
    big = [(f"c{idx}", size) for idx, size in sizes if size >= others_threshold]
    small_total = sum(size for _, size in sizes if size < others_threshold)
    big.sort(key=lambda row: (-row[1], row[0]))
    entries = list(big)
    if small_total:
        entries.append((OTHERS_LABEL, small_total))
    return Histogram(entries=tuple(entries))


def degree_distribution(graph: SocialGraph) -> Histogram:
    """Node counts per (unweighted) degree, ascending by degree."""
    counts: dict[int, int] = {}
    for node in graph.nodes:
        d = len(graph.adjacency[node])
        counts[d] = counts.get(d, 0) + 1
    return Histogram(entries=tuple((str(d), counts[d]) for d in sorted(counts)))


def avg_clustering_coefficient(graph: SocialGraph) -> float:
    """Mean local clustering coefficient; nodes of degree < 2 count as 0."""
    if not graph.nodes:
        return 0.0
    adjacency = {n: set(nbrs) for n, nbrs in graph.adjacency.items()}
    total = 0.0
    for node, nbrs in adjacency.items():
        d = len(nbrs)
        if d < 2:
            continue
        links = 0
        nbr_list = sorted(nbrs)
        for a_i, a in enumerate(nbr_list):
            adj_a = adjacency[a]
            for b in nbr_list[a_i + 1:]:
                if b in adj_a:
                    links += 1
        total += 2.0 * links / (d * (d - 1))
    return total / len(graph.nodes)


def heavy_tail_share(graph: SocialGraph, top_fraction: float = 0.05) -> float:
    """Share of total degree held by the top `top_fraction` of nodes."""
    degrees = sorted((len(graph.adjacency[n]) for n in graph.nodes), reverse=True)
    if not degrees:
        return 0.0
    total = sum(degrees)
    if total == 0:
        return 0.0
    top_n = max(1, int(round(top_fraction * len(degrees))))
    return sum(degrees[:top_n]) / total
