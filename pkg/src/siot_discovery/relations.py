"""Builders for the three device relationship graphs.

All builders are pure functions of their inputs and return immutable
SocialGraph objects, so the three graphs can be built concurrently from a
shared catalog.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CatalogError, GraphInvariantError, ParameterError
from .model import (
    UNIT_DIAGONAL,
    ContactEvent,
    DeviceRecord,
    OwnerGraph,
    RelationKind,
    SocialGraph,
)

EDGE_LIST_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SorRule:
    """When repeated contact between two devices counts as a relationship:
    at least ``min_meetings`` meetings totalling ``min_total_minutes``, with
    no gap between consecutive meetings longer than ``max_gap_hours``.
    ``reference_minutes`` scales total contact time into the edge weight."""

    min_meetings: int = 3
    min_total_minutes: float = 30.0
    max_gap_hours: float = 6.0
    reference_minutes: float = 120.0

    def __post_init__(self) -> None:
        if self.min_meetings < 1:
            raise ParameterError("min_meetings must be at least 1")
        if not self.min_total_minutes > 0:
            raise ParameterError("min_total_minutes must be positive")
        if not self.max_gap_hours > 0:
            raise ParameterError("max_gap_hours must be positive")
        if not self.reference_minutes > 0:
            raise ParameterError("reference_minutes must be positive")


def clor_weight(
    pos_i: tuple[float, float],
    pos_j: tuple[float, float],
    d_max: float = UNIT_DIAGONAL,
) -> float:
    """Proximity weight 1 - d/d_max for positions on the normalized map."""
    if not d_max > 0:
        raise ParameterError("d_max must be positive")
    dx = pos_i[0] - pos_j[0]
    dy = pos_i[1] - pos_j[1]
    d = math.sqrt(dx * dx + dy * dy)
    if d > d_max:
        raise ParameterError(f"distance {d} exceeds d_max {d_max}")
    return 1.0 - d / d_max


def build_clor(
    devices: Sequence[DeviceRecord],
    threshold: float = 0.8,
    d_max: float = UNIT_DIAGONAL,
) -> SocialGraph:
    """Connect device pairs whose proximity weight reaches the threshold.

    The scan is blocked over the full pairwise distance matrix; an empty
    catalog simply yields an empty graph.
    """
    if not (0.0 <= threshold <= 1.0):
        raise ParameterError("threshold must lie in [0, 1]")
    records = sorted(devices, key=lambda r: r.device_id)
    ids = np.array([r.device_id for r in records], dtype=np.int64)
    pos = np.array([r.position for r in records], dtype=np.float64).reshape(-1, 2)
    n = len(records)

    edges: list[tuple[int, int, float]] = []
    block = 512
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        dx = pos[lo:hi, 0][:, None] - pos[None, :, 0]
        dy = pos[lo:hi, 1][:, None] - pos[None, :, 1]
        w = 1.0 - np.sqrt(dx * dx + dy * dy) / d_max
        rows, cols = np.nonzero((w >= threshold) & (w > 0.0))
        keep = (rows + lo) < cols
        rows, cols = rows[keep], cols[keep]
        edges.extend(
            zip(
                ids[rows + lo].tolist(),
                ids[cols].tolist(),
                w[rows, cols].tolist(),
            )
        )
    return SocialGraph.build(RelationKind.CLOR, (int(i) for i in ids), edges)


def sfor_weight_for_distance(distance: int) -> float:
    """Weight ladder over owner social distance: 1.0 same owner, 0.75
    direct friends, 1/n beyond."""
    if distance < 0:
        raise ParameterError("distance must be non-negative")
    if distance == 0:
        return 1.0
    if distance == 1:
        return 0.75
    return 1.0 / distance


def _bfs_within(owners: OwnerGraph, source: int, max_hops: int) -> dict[int, int]:
    dist = {source: 0}
    frontier = deque([source])
    while frontier:
        u = frontier.popleft()
        if dist[u] >= max_hops:
            continue
        for v in owners.adjacency[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                frontier.append(v)
    return dist


def build_sfor(
    devices: Sequence[DeviceRecord],
    owners: OwnerGraph,
    max_hops: int = 3,
) -> SocialGraph:
    """Connect private devices by their owners' social distance.

    Public devices are trusted by everyone at query time, so no edges are
    materialized for them; storing the implied all-pairs links would be
    quadratic for no change in discovery results.
    """
    if max_hops < 1:
        raise ParameterError("max_hops must be at least 1")
    by_owner: dict[int, list[int]] = {}
    for record in devices:
        if record.is_public:
            continue
        if record.owner_id not in owners.nodes:
            raise CatalogError(
                f"device {record.device_id} has owner {record.owner_id} "
                "missing from the owner graph"
            )
        by_owner.setdefault(record.owner_id, []).append(record.device_id)

    edges: list[tuple[int, int, float]] = []
    # same owner: all device pairs at weight 1.0
    for members in by_owner.values():
        members.sort()
        for a_i, a in enumerate(members):
            for b in members[a_i + 1:]:
                edges.append((a, b, 1.0))
    # owners within max_hops: cross products at the ladder weight
    owner_ids = sorted(by_owner)
    for source in owner_ids:
        dist = _bfs_within(owners, source, max_hops)
        for target, d in dist.items():
            if target <= source or d == 0 or target not in by_owner:
                continue
            w = sfor_weight_for_distance(d)
            for a in by_owner[source]:
                for b in by_owner[target]:
                    edges.append((a, b, w) if a < b else (b, a, w))
    return SocialGraph.build(
        RelationKind.SFOR, (r.device_id for r in devices), edges
    )


def sor_qualifies(events: Sequence[ContactEvent], rule: SorRule) -> bool:
    """Direct statement of the repeated-contact rule for one pair's events."""
    if len(events) < rule.min_meetings:
        return False
    ordered = sorted(events, key=lambda e: (e.start_time, e.end_time))
    total_minutes = sum(e.duration_minutes for e in ordered)
    if total_minutes < rule.min_total_minutes:
        return False
    max_gap_seconds = rule.max_gap_hours * 3600.0
    for prev, nxt in zip(ordered, ordered[1:]):
        if nxt.start_time - prev.end_time > max_gap_seconds:
            return False
    return True


def build_sor(
    trace: Sequence[ContactEvent],
    rule: SorRule | None = None,
    nodes: Iterable[int] | None = None,
) -> SocialGraph:
    """Connect device pairs whose meeting history satisfies the rule.

    Edge weight is total contact time scaled by ``rule.reference_minutes``
    and capped at 1. ``nodes`` widens the node set beyond trace
    participants (pass the catalog ids so partitions stay total).
    """
    rule = rule or SorRule()
    by_pair: dict[tuple[int, int], list[ContactEvent]] = {}
    participants: set[int] = set()
    for event in trace:
        by_pair.setdefault(event.pair, []).append(event)
        participants.add(event.device_a)
        participants.add(event.device_b)

    edges = []
    for (a, b), events in by_pair.items():
        if not sor_qualifies(events, rule):
            continue
        total_minutes = sum(e.duration_minutes for e in events)
        weight = min(1.0, total_minutes / rule.reference_minutes)
        edges.append((a, b, weight))
    node_set = participants if nodes is None else set(nodes) | participants
    return SocialGraph.build(RelationKind.SOR, node_set, edges)


def save_edge_list(graph: SocialGraph, path: str | Path) -> None:
    """Write a graph as a delimited edge list for external inspection."""
    lines = [
        f"# schema_version={EDGE_LIST_SCHEMA_VERSION}",
        f"# relation={graph.relation_kind.value}",
        f"# nodes={','.join(str(n) for n in sorted(graph.nodes))}",
        "i,j,weight",
    ]
    lines.extend(f"{i},{j},{w!r}" for i, j, w in graph.edges)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_edge_list(
    path: str | Path,
    relation_kind: RelationKind | None = None,
    nodes: Iterable[int] | None = None,
) -> SocialGraph:
    """Read a graph written by :func:`save_edge_list`.

    The header's node list preserves isolated nodes; callers may widen the
    node set further via ``nodes``.
    """
    header_relation: RelationKind | None = None
    header_nodes: set[int] = set()
    edges: list[tuple[int, int, float]] = []
    saw_columns = False
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("relation="):
                header_relation = RelationKind(body.split("=", 1)[1])
            elif body.startswith("nodes="):
                value = body.split("=", 1)[1]
                if value:
                    header_nodes = {int(t) for t in value.split(",")}
            continue
        if not saw_columns:
            if line.replace(" ", "") != "i,j,weight":
                raise GraphInvariantError(
                    f"{path}:{line_no}: expected header 'i,j,weight', got {line!r}"
                )
            saw_columns = True
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise GraphInvariantError(f"{path}:{line_no}: expected 3 fields")
        try:
            edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError as exc:
            raise GraphInvariantError(f"{path}:{line_no}: {exc}") from exc
    kind = relation_kind or header_relation
    if kind is None:
        raise GraphInvariantError(f"{path}: no relation declared and none supplied")
    node_set = set(header_nodes)
    if nodes is not None:
        node_set |= set(nodes)
    for i, j, _ in edges:
        node_set.add(i)
        node_set.add(j)
    return SocialGraph.build(kind, node_set, edges)
