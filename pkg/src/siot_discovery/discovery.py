"""Answering a parsed request: pick the nearest co-location community,
filter by trust and capability, return the surviving devices.

A DiscoveryIndex is immutable once built; any number of concurrent queries
may run against it, and a rebuild is published by swapping the whole index.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

from .config import CapabilityConfig
from .errors import GraphInvariantError, ParameterError, UnknownRequesterError
from .model import (
    Cover,
    DeviceRecord,
    Partition,
    RelationKind,
    SocialGraph,
    TrustKind,
    TrustLevel,
    euclidean,
)
from .request_nlp import ParsedRequest

STAGE_COMMUNITY = "community"
STAGE_TRUST = "trust"
STAGE_CAPABILITY = "capability"


@dataclass(frozen=True)
class DiscoveryIndex:
    """Everything needed to answer queries: the catalog, the co-location
    partition with centroids, the ownership cover and weighted ownership
    graph backing the trust filter, the contact partition (informational),
    and the capability map."""

    devices: tuple[DeviceRecord, ...]
    clor: Partition
    clor_centroids: dict[int, tuple[float, float]]
    sfor_cover: Cover
    sor: Partition
    sfor_graph: SocialGraph
    capability_map: dict[str, frozenset[str]]

    @cached_property
    def device_by_id(self) -> dict[int, DeviceRecord]:
        return {r.device_id: r for r in self.devices}

    @cached_property
    def device_ids(self) -> frozenset[int]:
        return frozenset(r.device_id for r in self.devices)

    @cached_property
    def public_ids(self) -> frozenset[int]:
        return frozenset(r.device_id for r in self.devices if r.is_public)

    @cached_property
    def owner_ids(self) -> frozenset[int]:
        return frozenset(r.owner_id for r in self.devices)

    @cached_property
    def devices_of_owner(self) -> dict[int, tuple[int, ...]]:
        grouped: dict[int, list[int]] = {}
        for r in self.devices:
            grouped.setdefault(r.owner_id, []).append(r.device_id)
        return {owner: tuple(sorted(ids)) for owner, ids in grouped.items()}

    @cached_property
    def covered_ids(self) -> frozenset[int]:
        return self.sfor_cover.covered_nodes

    @cached_property
    def capability_index(self) -> dict[str, frozenset[int]]:
        apps: dict[str, set[int]] = {}
        for r in self.devices:
            for app in r.capabilities:
                apps.setdefault(app, set()).add(r.device_id)
        return {app: frozenset(ids) for app, ids in apps.items()}


@dataclass(frozen=True)
class DiscoveryResult:
    """Final device list plus per-stage counts for audit."""

    application: str
    clor_community: int
    n_community: int
    n_after_trust: int
    n_after_capability: int
    device_ids: tuple[int, ...]
    emptied_at: str | None
    target_position: tuple[float, float]
    requester_id: int

    def to_dict(self) -> dict:
        return {
            "application": self.application,
            "clor_community": self.clor_community,
            "stage_counts": {
                STAGE_COMMUNITY: self.n_community,
                STAGE_TRUST: self.n_after_trust,
                STAGE_CAPABILITY: self.n_after_capability,
            },
            "device_ids": list(self.device_ids),
            "emptied_at": self.emptied_at,
            "target_position": list(self.target_position),
            "requester_id": self.requester_id,
        }


def build_index(
    devices: Sequence[DeviceRecord],
    clor: Partition,
    sfor_cover: Cover,
    sor: Partition,
    capability_config: CapabilityConfig | Mapping[str, frozenset[str]],
    sfor_graph: SocialGraph | None = None,
) -> DiscoveryIndex:
    """Assemble and validate the immutable query index.

    All communities must be computed over this same device table. The
    weighted ownership graph feeds the trust filter; omitting it leaves
    only public devices and the requester's own trusted below level "any".
    """
    table = tuple(sorted(devices, key=lambda r: r.device_id))
    ids = {r.device_id for r in table}
    if len(ids) != len(table):
        raise GraphInvariantError("device table contains duplicate ids")

    for name, partition in ((RelationKind.CLOR.value, clor), (RelationKind.SOR.value, sor)):
        if set(partition.assignment) != ids:
            raise GraphInvariantError(
                f"{name} partition does not cover exactly the device table"
            )
    for community in sfor_cover.communities:
        if not community <= ids:
            raise GraphInvariantError("ownership cover names devices outside the table")

    if sfor_graph is None:
        sfor_graph = SocialGraph.build(RelationKind.SFOR, ids, ())
    elif not sfor_graph.nodes <= ids:
        raise GraphInvariantError("ownership graph names devices outside the table")

    by_id = {r.device_id: r for r in table}
    centroids: dict[int, tuple[float, float]] = {}
    for community_id, members in enumerate(clor.communities):
        xs = [by_id[m].position[0] for m in sorted(members)]
        ys = [by_id[m].position[1] for m in sorted(members)]
        centroids[community_id] = (sum(xs) / len(xs), sum(ys) / len(ys))

    if isinstance(capability_config, CapabilityConfig):
        capability_map = dict(capability_config.capability_map)
    else:
        capability_map = {t: frozenset(v) for t, v in capability_config.items()}

    return DiscoveryIndex(
        devices=table,
        clor=clor,
        clor_centroids=centroids,
        sfor_cover=sfor_cover,
        sor=sor,
        sfor_graph=sfor_graph,
        capability_map=capability_map,
    )


def nearest_clor_community(index: DiscoveryIndex, position: tuple[float, float]) -> int:
    """Community whose centroid is closest; ties go to the lowest id."""
    if not index.clor_centroids:
        raise ParameterError("index has no co-location communities")
    best_id = -1
    best_d = float("inf")
    for community_id in sorted(index.clor_centroids):
        d = euclidean(position, index.clor_centroids[community_id])
        if d < best_d:
            best_d = d
            best_id = community_id
    return best_id


def eligible_by_trust(
    index: DiscoveryIndex, requester_id: int, level: TrustLevel
) -> frozenset[int]:
    """Devices the requester may task at the given trust level.

    Level "any" admits everything. Otherwise a device qualifies if it is
    public, belongs to the requester, or sits in some ownership community
    with an ownership-graph edge of weight at least the level's floor from
    one of the requester's devices.
    """
    if level.kind is TrustKind.ANY:
        return index.device_ids
    if requester_id not in index.owner_ids:
        raise UnknownRequesterError(
            f"requester {requester_id} owns no devices in the catalog"
        )
    threshold = level.min_weight
    own = set(index.devices_of_owner.get(requester_id, ()))
    eligible = own | set(index.public_ids)
    adjacency = index.sfor_graph.adjacency
    for device in own:
        for neighbor, weight in adjacency.get(device, {}).items():
            if weight >= threshold and neighbor in index.covered_ids:
                eligible.add(neighbor)
    return frozenset(eligible)


def discover(
    index: DiscoveryIndex,
    parsed: ParsedRequest,
    metadata,
) -> DiscoveryResult:
    """Intersect community, trust, and capability; empty results are legal
    and record the stage at which the candidate set emptied."""
    community_id = nearest_clor_community(index, parsed.target_position)
    members = index.clor.members(community_id)
    trusted = eligible_by_trust(index, metadata.requester_id, parsed.trust_level)
    after_trust = members & trusted
    capable = index.capability_index.get(parsed.application, frozenset())
    final = after_trust & capable

    emptied_at = None
    if not members:
        emptied_at = STAGE_COMMUNITY
    elif not after_trust:
        emptied_at = STAGE_TRUST
    elif not final:
        emptied_at = STAGE_CAPABILITY

    return DiscoveryResult(
        application=parsed.application,
        clor_community=community_id,
        n_community=len(members),
        n_after_trust=len(after_trust),
        n_after_capability=len(final),
        device_ids=tuple(sorted(final)),
        emptied_at=emptied_at,
        target_position=parsed.target_position,
        requester_id=metadata.requester_id,
    )
