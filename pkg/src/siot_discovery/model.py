"""Domain types shared across the pipeline.

Everything here is immutable after construction and safe to share between
concurrent workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import GraphInvariantError, ParameterError

UNIT_DIAGONAL = math.sqrt(2.0)


class RelationKind(str, Enum):
    """Which device relationship a graph encodes."""

    CLOR = "CLOR"  # geographic co-location
    SFOR = "SFOR"  # owner friendship / ownership
    SOR = "SOR"    # repeated-contact history


class Visibility(str, Enum):
    PRIVATE = "private"
    PUBLIC = "public"


class TrustKind(str, Enum):
    OWNER = "owner"
    FRIEND = "friend"
    FRIEND_OF_FRIEND = "friend_of_friend"
    ANY = "any"


@dataclass(frozen=True)
class TrustLevel:
    """Requested trust ladder rung; friend-of-friend carries a hop count."""

    kind: TrustKind
    n_hops: int | None = None

    def __post_init__(self) -> None:
        if self.kind is TrustKind.FRIEND_OF_FRIEND:
            if self.n_hops is None or self.n_hops < 2:
                raise ParameterError("friend-of-friend trust needs n_hops >= 2")
        elif self.n_hops is not None:
            raise ParameterError(f"{self.kind.value} trust does not take n_hops")

    @property
    def min_weight(self) -> float | None:
        """Minimum qualifying ownership-graph edge weight; None means no floor."""
        if self.kind is TrustKind.OWNER:
            return 1.0
        if self.kind is TrustKind.FRIEND:
            return 0.75
        if self.kind is TrustKind.FRIEND_OF_FRIEND:
            return 1.0 / self.n_hops  # type: ignore[operator]
        return None

    @classmethod
    def parse(cls, text: str) -> "TrustLevel":
        token = text.strip().lower().replace("-", "_")
        if token in ("owner", "friend", "any"):
            return cls(TrustKind(token))
        for prefix in ("friend_of_friend:", "fof:"):
            if token.startswith(prefix):
                try:
                    hops = int(token[len(prefix):])
                except ValueError as exc:
                    raise ParameterError(f"bad trust level {text!r}") from exc
                return cls(TrustKind.FRIEND_OF_FRIEND, hops)
        raise ParameterError(f"bad trust level {text!r}")

    def __str__(self) -> str:
        if self.kind is TrustKind.FRIEND_OF_FRIEND:
            return f"fof:{self.n_hops}"
        return self.kind.value


@dataclass(frozen=True)
class DeviceRecord:
    """One catalog row: a device, its owner, its place on the map, and what
    it can do. Positions are normalized to the unit square."""

    device_id: int
    device_type: str
    owner_id: int
    visibility: Visibility
    position: tuple[float, float]
    capabilities: frozenset[str]

    @property
    def is_public(self) -> bool:
        return self.visibility is Visibility.PUBLIC


@dataclass(frozen=True)
class ContactEvent:
    """A single meeting between two devices, in epoch seconds."""

    device_a: int
    device_b: int
    start_time: float
    end_time: float

    def __post_init__(self) -> None:
        if self.device_a == self.device_b:
            raise ParameterError("contact event needs two distinct devices")
        if not self.end_time > self.start_time:
            raise ParameterError("contact event must end after it starts")

    @property
    def duration_minutes(self) -> float:
        return (self.end_time - self.start_time) / 60.0

    @property
    def pair(self) -> tuple[int, int]:
        a, b = self.device_a, self.device_b
        return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class RequestMetadata:
    """Requester-side metadata accompanying a text request."""

    requester_id: int
    requester_position: tuple[float, float]
    trust_level: TrustLevel

    def __post_init__(self) -> None:
        x, y = self.requester_position
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise ParameterError("requester position must lie in the unit square")


@dataclass(frozen=True)
class SocialGraph:
    """Undirected weighted graph for one relation kind.

    Edges are stored once as (i, j, weight) with i < j; weights lie in (0, 1].
    Construct through :meth:`build`, which canonicalizes and validates.
    """

    relation_kind: RelationKind
    nodes: frozenset[int]
    edges: tuple[tuple[int, int, float], ...]

    @classmethod
    def build(
        cls,
        relation_kind: RelationKind,
        nodes: Iterable[int],
        edges: Iterable[tuple[int, int, float]],
    ) -> "SocialGraph":
        node_set = frozenset(nodes)
        canonical: dict[tuple[int, int], float] = {}
        for u, v, w in edges:
            if u == v:
                raise GraphInvariantError(f"self-loop on node {u}")
            key = (u, v) if u < v else (v, u)
            if key in canonical:
                raise GraphInvariantError(f"duplicate edge {key}")
            canonical[key] = float(w)
        graph = cls(
            relation_kind=relation_kind,
            nodes=node_set,
            edges=tuple((i, j, w) for (i, j), w in sorted(canonical.items())),
        )
        check_social_graph(graph)
        return graph

    @cached_property
    def adjacency(self) -> dict[int, dict[int, float]]:
        adj: dict[int, dict[int, float]] = {n: {} for n in self.nodes}
        for i, j, w in self.edges:
            adj[i][j] = w
            adj[j][i] = w
        return adj

    @cached_property
    def weighted_degrees(self) -> dict[int, float]:
        return {n: math.fsum(nbrs.values()) for n, nbrs in self.adjacency.items()}

    @cached_property
    def total_weight(self) -> float:
        return math.fsum(w for _, _, w in self.edges)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def weight(self, i: int, j: int) -> float:
        """Edge weight, or 0.0 when the pair is unrelated."""
        return self.adjacency.get(i, {}).get(j, 0.0)


@dataclass(frozen=True)
class OwnerGraph:
    """Unweighted undirected friendship network over owner ids."""

    nodes: frozenset[int]
    edges: tuple[tuple[int, int], ...]

    @classmethod
    def build(cls, nodes: Iterable[int], edges: Iterable[tuple[int, int]]) -> "OwnerGraph":
        node_set = frozenset(nodes)
        canonical: set[tuple[int, int]] = set()
        for u, v in edges:
            if u == v:
                raise GraphInvariantError(f"self-loop on owner {u}")
            canonical.add((u, v) if u < v else (v, u))
        for u, v in canonical:
            if u not in node_set or v not in node_set:
                raise GraphInvariantError(f"edge ({u},{v}) references unknown owner")
        return cls(nodes=node_set, edges=tuple(sorted(canonical)))

    @cached_property
    def adjacency(self) -> dict[int, frozenset[int]]:
        adj: dict[int, set[int]] = {n: set() for n in self.nodes}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return {n: frozenset(s) for n, s in adj.items()}

    @property
    def edge_count(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class Partition:
    """Total single-valued assignment of nodes to disjoint communities.

    Community ids are contiguous from 0. The assignment mapping is treated
    as immutable once the partition is built.
    """

    relation_kind: RelationKind
    assignment: Mapping[int, int]

    @cached_property
    def communities(self) -> tuple[frozenset[int], ...]:
        groups: dict[int, set[int]] = {}
        for node, comm in self.assignment.items():
            groups.setdefault(comm, set()).add(node)
        return tuple(frozenset(groups[c]) for c in sorted(groups))

    @property
    def n_communities(self) -> int:
        return len(set(self.assignment.values()))

    def members(self, community_id: int) -> frozenset[int]:
        return self.communities[community_id]


@dataclass(frozen=True)
class Cover:
    """Overlapping community assignment; nodes may sit in several
    communities or in none (homeless)."""

    relation_kind: RelationKind
    communities: tuple[frozenset[int], ...]
    scores: tuple[float, ...] = ()
    threshold: float = 1.0

    @cached_property
    def covered_nodes(self) -> frozenset[int]:
        covered: set[int] = set()
        for community in self.communities:
            covered |= community
        return frozenset(covered)

    def membership(self, node: int) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.communities) if node in c)

    def homeless(self, nodes: Iterable[int]) -> frozenset[int]:
        return frozenset(nodes) - self.covered_nodes

    @property
    def total_membership(self) -> int:
        """Membership count with multiplicity (overlaps counted once per
        community they belong to)."""
        return sum(len(c) for c in self.communities)


@dataclass(frozen=True)
class Finding:
    """One validation problem found in a catalog."""

    kind: str
    message: str
    device_id: int | None = None


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validating a device table. Empty findings = accepted."""

    findings: tuple[Finding, ...] = ()
    n_total: int = 0
    n_private: int = 0
    n_public: int = 0

    @property
    def ok(self) -> bool:
        return not self.findings

    def summary(self) -> str:
        head = f"{self.n_total} devices ({self.n_private} private, {self.n_public} public)"
        if self.ok:
            return f"{head}: accepted"
        return f"{head}: {len(self.findings)} problem(s), first: {self.findings[0].message}"


def validate_device_table(table: Sequence[DeviceRecord], capability_config) -> ValidationReport:
    """Check a parsed catalog against the structural invariants.

    Reports duplicate ids, out-of-range positions, device types the
    configuration does not declare, and devices left without capabilities.
    Callers decide whether findings abort the run.
    """
    findings: list[Finding] = []
    seen: set[int] = set()
    n_private = n_public = 0
    known_types = capability_config.device_types
    for record in table:
        if record.device_id in seen:
            findings.append(
                Finding("duplicate-id", f"duplicate device_id {record.device_id}", record.device_id)
            )
        seen.add(record.device_id)
        x, y = record.position
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            findings.append(
                Finding(
                    "position-out-of-range",
                    f"device {record.device_id} position ({x}, {y}) outside the unit square",
                    record.device_id,
                )
            )
        if record.device_type not in known_types:
            findings.append(
                Finding(
                    "unknown-type",
                    f"device {record.device_id} has undeclared type {record.device_type!r}",
                    record.device_id,
                )
            )
        elif not record.capabilities:
            findings.append(
                Finding(
                    "no-capabilities",
                    f"device {record.device_id} ({record.device_type}) maps to no application",
                    record.device_id,
                )
            )
        if record.visibility is Visibility.PUBLIC:
            n_public += 1
        else:
            n_private += 1
    return ValidationReport(
        findings=tuple(findings),
        n_total=len(table),
        n_private=n_private,
        n_public=n_public,
    )


def check_social_graph(graph: SocialGraph) -> None:
    """Reusable graph-validity assertion; raises GraphInvariantError."""
    for i, j, w in graph.edges:
        if i >= j:
            raise GraphInvariantError(f"edge ({i},{j}) not stored with i < j")
        if i not in graph.nodes or j not in graph.nodes:
            raise GraphInvariantError(f"edge ({i},{j}) references a node outside the graph")
        if not (0.0 < w <= 1.0):
            raise GraphInvariantError(f"edge ({i},{j}) weight {w} outside (0, 1]")
    pairs = [(i, j) for i, j, _ in graph.edges]
    if len(pairs) != len(set(pairs)):
        raise GraphInvariantError("duplicate edges present")


def check_partition(partition: Partition, nodes: Iterable[int]) -> None:
    """Assert the assignment is total on `nodes` with contiguous ids from 0."""
    node_set = set(nodes)
    assigned = set(partition.assignment)
    if assigned != node_set:
        missing = node_set - assigned
        extra = assigned - node_set
        raise GraphInvariantError(
            f"partition not total: missing={sorted(missing)[:5]} extra={sorted(extra)[:5]}"
        )
    comm_ids = set(partition.assignment.values())
    if comm_ids and comm_ids != set(range(len(comm_ids))):
        raise GraphInvariantError("community ids not contiguous from 0")


def check_cover(cover: Cover) -> None:
    """Assert every community is non-empty and passes its recorded threshold."""
    for idx, community in enumerate(cover.communities):
        if not community:
            raise GraphInvariantError(f"community {idx} is empty")
        if cover.scores and not (cover.scores[idx] < cover.threshold):
            raise GraphInvariantError(
                f"community {idx} score {cover.scores[idx]} fails threshold {cover.threshold}"
            )


def euclidean(a: tuple[float, float], b: tuple[float, float]) -> float:
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return math.sqrt(dx * dx + dy * dy)
