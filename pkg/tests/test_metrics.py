import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import clustering_bruteforce, uniform_random_graph
from siot_discovery.community import (
    avg_clustering_coefficient,
    community_histogram,
    degree_distribution,
    heavy_tail_share,
)
from siot_discovery.ingest import generate_watts_strogatz
from siot_discovery.model import Cover, Partition, RelationKind, SocialGraph

from conftest import clique_edges, make_graph


def partition_with_sizes(sizes):
    assignment = {}
    node = 0
    for comm, size in enumerate(sizes):
        for _ in range(size):
            assignment[node] = comm
            node += 1
    return Partition(RelationKind.CLOR, assignment)


class TestCommunityHistogram:
    def test_small_communities_pool_into_others(self):
        h = community_histogram(partition_with_sizes([10, 5, 2, 1]))
        assert h.entries == (("c0", 10), ("c1", 5), ("Others", 3))

    def test_empty_cover(self):
        h = community_histogram(Cover(RelationKind.SFOR, ()))
        assert h.entries == ()

    def test_descending_order_with_id_ties(self):
        h = community_histogram(partition_with_sizes([4, 6, 6]))
        assert h.entries == (("c1", 6), ("c2", 6), ("c0", 4))

    def test_cover_counts_multiplicity(self):
        cover = Cover(
            RelationKind.SFOR,
            communities=(frozenset(range(5)), frozenset(range(3, 9))),
        )
        h = community_histogram(cover)
        assert h.total == cover.total_membership == 11

    @given(st.lists(st.integers(1, 20), min_size=0, max_size=12))
    @settings(max_examples=60, deadline=None)
    def test_counts_sum_invariant(self, sizes):
        partition = partition_with_sizes(sizes)
        h = community_histogram(partition)
        assert h.total == sum(sizes)


class TestDegreeDistribution:
    def test_ring(self):
        g = make_graph(10, [(i, (i + 1) % 10, 1.0) for i in range(10)])
        assert degree_distribution(g).entries == (("2", 10),)
        assert avg_clustering_coefficient(g) == 0.0

    def test_complete_graph(self):
        g = make_graph(5, clique_edges(range(5)))
        assert degree_distribution(g).entries == (("4", 5),)
        assert avg_clustering_coefficient(g) == 1.0

    def test_isolated_nodes_counted(self):
        g = make_graph(4, [(0, 1, 1.0)])
        assert degree_distribution(g).entries == (("0", 2), ("1", 2))


class TestClustering:
    def test_matches_bruteforce_on_ws(self):
        g = generate_watts_strogatz(60, 4, 0.2, seed=2)
        mine = avg_clustering_coefficient(
            SocialGraph.build(RelationKind.SFOR, g.nodes, [(i, j, 1.0) for i, j in g.edges])
        )
        oracle = clustering_bruteforce(g.nodes, [(i, j, 1.0) for i, j in g.edges])
        assert mine == pytest.approx(oracle, abs=1e-12)

    def test_small_world_band_and_ratio(self):
        ws = generate_watts_strogatz(200, 6, 0.1, seed=4)
        g = SocialGraph.build(
            RelationKind.SFOR, ws.nodes, [(i, j, 1.0) for i, j in ws.edges]
        )
        c_ws = avg_clustering_coefficient(g)
        assert 0.3 <= c_ws <= 0.75
        base_edges = uniform_random_graph(200, ws.edge_count, seed=4)
        baseline = SocialGraph.build(
            RelationKind.SFOR, range(200), [(i, j, 1.0) for i, j in base_edges]
        )
        assert c_ws >= 3.0 * avg_clustering_coefficient(baseline)


class TestHeavyTail:
    def test_star_is_heavy_tailed(self):
        g = make_graph(21, [(0, i, 1.0) for i in range(1, 21)])
        assert heavy_tail_share(g, 0.05) >= 0.3

    def test_ring_is_not(self):
        g = make_graph(40, [(i, (i + 1) % 40, 1.0) for i in range(40)])
        assert heavy_tail_share(g, 0.05) < 0.3
