"""Shared fixtures: small graphs, the synthetic city, and configs."""

from __future__ import annotations

import itertools
import json
import random

import pytest

from siot_discovery.community import LouvainConfig, OverlapConfig, detect_overlapping, louvain
from siot_discovery.config import default_config, parse_config
from siot_discovery.discovery import build_index
from siot_discovery.ingest import ClusterSpec, SyntheticCityParams, generate_synthetic_city
from siot_discovery.model import RelationKind, SocialGraph
from siot_discovery.relations import SorRule, build_clor, build_sfor, build_sor


def clique_edges(nodes, weight=1.0):
    return [(i, j, weight) for i, j in itertools.combinations(sorted(nodes), 2)]


def make_graph(n, edges, kind=RelationKind.CLOR):
    return SocialGraph.build(kind, range(n), edges)


@pytest.fixture(scope="session")
def default_cfg():
    return default_config()


@pytest.fixture(scope="session")
def city_cfg(default_cfg):
    """Shipped config plus gazetteer entries at the synthetic cluster centers."""
    document = json.loads(json.dumps(default_cfg.document))
    document["gazetteer"].update(
        {"alpha": [0.2, 0.2], "bravo": [0.8, 0.3], "charlie": [0.5, 0.8]}
    )
    return parse_config(document)


@pytest.fixture(scope="session")
def two_triangles():
    return make_graph(6, clique_edges([0, 1, 2]) + clique_edges([3, 4, 5]))


@pytest.fixture(scope="session")
def two_k8_bridge():
    edges = clique_edges(range(8)) + clique_edges(range(8, 16)) + [(0, 8, 1.0)]
    return make_graph(16, edges)


@pytest.fixture(scope="session")
def bridged_six_cliques():
    """Two 6-cliques sharing exactly node 5."""
    edges = clique_edges(range(0, 6)) + clique_edges(range(5, 11))
    return make_graph(11, edges, RelationKind.SFOR)


@pytest.fixture(scope="session")
def sparse_random_graph():
    rng = random.Random(11)
    edges = [
        (i, j, 1.0)
        for i, j in itertools.combinations(range(60), 2)
        if rng.random() < 0.05
    ]
    return make_graph(60, edges)


@pytest.fixture(scope="session")
def optimality_battery():
    """Small graphs on which the greedy optimizer reaches the exhaustive
    optimum. Even cycles are deliberately absent: greedy merging settles on
    equal arcs there and stops short of the true maximum."""
    rng = random.Random(42)
    random9 = [
        (i, j, 1.0)
        for i, j in itertools.combinations(range(9), 2)
        if rng.random() < 0.35
    ]
    rng = random.Random(7)
    weighted10 = [
        (i, j, round(rng.uniform(0.2, 1.0), 3))
        for i, j in itertools.combinations(range(10), 2)
        if rng.random() < 0.3
    ]
    battery = {
        "two_triangles": (6, clique_edges([0, 1, 2]) + clique_edges([3, 4, 5])),
        "two_k4_bridge": (8, clique_edges(range(4)) + clique_edges(range(4, 8)) + [(3, 4, 1.0)]),
        "path_p7": (7, [(i, i + 1, 1.0) for i in range(6)]),
        "star_s7": (7, [(0, i, 1.0) for i in range(1, 7)]),
        "weighted_barbell": (
            6,
            clique_edges([0, 1, 2], 1.0) + clique_edges([3, 4, 5], 0.9) + [(2, 3, 0.25)],
        ),
        "planted_2x5": (
            10,
            clique_edges(range(5)) + clique_edges(range(5, 10)) + [(0, 5, 1.0), (4, 9, 1.0)],
        ),
        "seeded_random_9": (9, random9),
        "seeded_weighted_10": (10, weighted10),
    }
    return {name: make_graph(n, edges) for name, (n, edges) in battery.items()}


CITY_CLUSTERS = (
    ClusterSpec(center=(0.2, 0.2), radius=0.13, share=0.34),
    ClusterSpec(center=(0.8, 0.3), radius=0.12, share=0.33),
    ClusterSpec(center=(0.5, 0.8), radius=0.12, share=0.33),
)


@pytest.fixture(scope="session")
def city_params():
    return SyntheticCityParams(
        n_devices=300,
        n_owners=60,
        clusters=CITY_CLUSTERS,
        ws_k=4,
        ws_p=0.1,
        seed=7,
        public_share=0.1,
        sor_qualifying=((0, 2), (4, 6), (102, 104), (108, 110), (202, 204)),
        sor_near_misses=(
            (12, 14, "few_meetings"),
            (18, 20, "short_total"),
            (24, 26, "long_gap"),
        ),
    )


@pytest.fixture(scope="session")
def city(city_params):
    return generate_synthetic_city(city_params)


@pytest.fixture(scope="session")
def city_build(city):
    """Full pipeline over the synthetic city: graphs, communities, index."""
    devices, owners, trace = city
    ids = [d.device_id for d in devices]
    clor_graph = build_clor(devices)
    sfor_graph = build_sfor(devices, owners, max_hops=3)
    sor_graph = build_sor(trace, SorRule(), nodes=ids)
    clor_partition = louvain(clor_graph, LouvainConfig(seed=0))
    sor_partition = louvain(sor_graph, LouvainConfig(seed=0))
    sfor_cover = detect_overlapping(sfor_graph, OverlapConfig(seed=0))
    index = build_index(
        devices,
        clor_partition,
        sfor_cover,
        sor_partition,
        default_config().capabilities,
        sfor_graph=sfor_graph,
    )
    return {
        "devices": devices,
        "owners": owners,
        "trace": trace,
        "clor_graph": clor_graph,
        "sfor_graph": sfor_graph,
        "sor_graph": sor_graph,
        "clor_partition": clor_partition,
        "sor_partition": sor_partition,
        "sfor_cover": sfor_cover,
        "index": index,
    }


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        print(f"\n[acceptance] {name}: {status}")
    elif report.when == "setup" and report.skipped:
        print(f"\n[acceptance] {name}: SKIP")
