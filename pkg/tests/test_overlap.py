import itertools
import random

import pytest

from siot_discovery.community import (
    OverlapConfig,
    cleanup_cover,
    community_significance,
    corrected_score,
    detect_overlapping,
    membership_score,
)
from siot_discovery.errors import EdgelessGraphError, ParameterError
from siot_discovery.model import RelationKind, SocialGraph, check_cover

from conftest import clique_edges, make_graph


class TestMembershipScore:
    def test_bridge_node_against_clique(self, bridged_six_cliques):
        # clique {6..10}: member degrees 5 each, internal weight 10
        r = membership_score(
            k_i=10.0, w_in=5.0, community_degree=25.0,
            community_internal_weight=10.0, two_m=60.0,
        )
        assert r == pytest.approx((10 / 35) ** 5, rel=1e-9)
        assert r < 0.1

    def test_no_internal_weight_scores_one(self):
        assert membership_score(4.0, 0.0, 10.0, 3.0, 40.0) == 1.0

    def test_degenerate_no_competitors_scores_zero(self):
        # whole-graph community: the node is the only external mass
        assert membership_score(7.0, 7.0, 49.0, 21.0, 56.0) == 0.0

    def test_more_internal_weight_is_more_significant(self):
        scores = [
            membership_score(6.0, w, 20.0, 5.0, 200.0) for w in (1.0, 2.0, 4.0, 6.0)
        ]
        assert scores == sorted(scores, reverse=True)

    def test_corrected_score_monotone_in_trials(self):
        r = 0.01
        assert corrected_score(r, 1) == pytest.approx(r)
        assert corrected_score(r, 5) > corrected_score(r, 2)
        assert corrected_score(1.0, 50) == 1.0


class TestDetectOverlapping:
    def test_bridge_node_in_both_cliques(self, bridged_six_cliques):
        cover = detect_overlapping(bridged_six_cliques, OverlapConfig(seed=0))
        communities = set(map(frozenset, cover.communities))
        assert communities == {frozenset(range(0, 6)), frozenset(range(5, 11))}
        assert cover.membership(5) == (0, 1)
        check_cover(cover)

    def test_single_clique_is_one_community(self):
        g = make_graph(6, clique_edges(range(6)), RelationKind.SFOR)
        cover = detect_overlapping(g, OverlapConfig(seed=0))
        assert len(cover.communities) == 1
        assert cover.communities[0] == frozenset(range(6))

    def test_sparse_random_graph_communities_all_significant(self, sparse_random_graph):
        config = OverlapConfig(seed=0)
        cover = detect_overlapping(sparse_random_graph, config)
        for community in cover.communities:
            score = community_significance(sparse_random_graph, community, config)
            assert score < config.significance_threshold
        # homeless nodes are allowed
        assert cover.homeless(sparse_random_graph.nodes) | cover.covered_nodes == frozenset(
            sparse_random_graph.nodes
        )

    def test_cleanup_is_fixed_point(self, bridged_six_cliques, sparse_random_graph):
        config = OverlapConfig(seed=0)
        for graph in (bridged_six_cliques, sparse_random_graph):
            cover = detect_overlapping(graph, config)
            again = cleanup_cover(graph, cover, config)
            assert again.communities == cover.communities

    def test_deterministic_under_seed(self, sparse_random_graph):
        a = detect_overlapping(sparse_random_graph, OverlapConfig(seed=3))
        b = detect_overlapping(sparse_random_graph, OverlapConfig(seed=3))
        assert a.communities == b.communities
        assert a.scores == b.scores

    def test_edgeless_rejected(self):
        g = SocialGraph.build(RelationKind.SFOR, range(3), ())
        with pytest.raises(EdgelessGraphError):
            detect_overlapping(g)

    def test_recorded_threshold_and_scores(self, bridged_six_cliques):
        config = OverlapConfig(seed=0, significance_threshold=0.2)
        cover = detect_overlapping(bridged_six_cliques, config)
        assert cover.threshold == 0.2
        assert all(s < 0.2 for s in cover.scores)

    def test_config_domain(self):
        with pytest.raises(ParameterError):
            OverlapConfig(significance_threshold=0.0)
        with pytest.raises(ParameterError):
            OverlapConfig(n_trials=0)
        with pytest.raises(ParameterError):
            OverlapConfig(max_iterations=0)


def embedded_clique_graph(seed=17, n=100, clique=range(8), p=0.03):
    rng = random.Random(seed)
    edges = {}
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < p:
            edges[(i, j)] = 1.0
    for i, j in itertools.combinations(sorted(clique), 2):
        edges[(i, j)] = 1.0
    return make_graph(n, [(i, j, w) for (i, j), w in edges.items()])


class TestCommunitySignificance:
    def test_embedded_clique_is_significant(self):
        g = embedded_clique_graph()
        score = community_significance(g, range(8), OverlapConfig(seed=0))
        assert score < 0.1

    def test_random_subsets_mostly_insignificant(self):
        g = embedded_clique_graph()
        config = OverlapConfig(seed=0)
        hits = 0
        draws = 100
        others = [n for n in g.nodes if n >= 8]
        for trial in range(draws):
            rng = random.Random(1000 + trial)
            subset = rng.sample(others, 8)
            if community_significance(g, subset, config) >= 0.1:
                hits += 1
        assert hits >= 90

    def test_single_node_community_scores_one(self, sparse_random_graph):
        assert community_significance(sparse_random_graph, [0], OverlapConfig()) == 1.0

    def test_empty_community_rejected(self, sparse_random_graph):
        with pytest.raises(ParameterError):
            community_significance(sparse_random_graph, [], OverlapConfig())

    def test_non_subset_rejected(self, sparse_random_graph):
        with pytest.raises(ParameterError):
            community_significance(sparse_random_graph, [0, 999], OverlapConfig())

    def test_matches_engine_audit(self, bridged_six_cliques):
        config = OverlapConfig(seed=0)
        cover = detect_overlapping(bridged_six_cliques, config)
        for community, score in zip(cover.communities, cover.scores):
            assert community_significance(
                bridged_six_cliques, community, config
            ) == pytest.approx(score)

    def test_vectorized_scores_match_scalar(self, sparse_random_graph, bridged_six_cliques):
        # the engine's batched scorer must agree with the public one-node form
        from siot_discovery.community.graphops import to_csr
        from siot_discovery.community.overlap import _Cluster, _Workspace

        for graph in (sparse_random_graph, bridged_six_cliques):
            csr = to_csr(graph)
            ws = _Workspace(csr)
            rng = random.Random(17)
            nodes = sorted(graph.nodes)
            for _ in range(10):
                members = rng.sample(nodes, rng.randrange(2, min(12, len(nodes))))
                rows = sorted(nodes.index(m) for m in members)
                cluster = _Cluster(ws, rows)
                import numpy as np

                member_rows = np.asarray(rows)
                vector = cluster._raw_scores(member_rows, inside=True)
                for row, got in zip(rows, vector):
                    k_i = float(csr.degrees[row])
                    w_in = float(cluster.w_to[row])
                    scalar = membership_score(
                        k_i,
                        w_in,
                        cluster.k_c - k_i,
                        cluster.w_int - w_in,
                        csr.two_m,
                    )
                    assert got == pytest.approx(scalar, abs=1e-12)
