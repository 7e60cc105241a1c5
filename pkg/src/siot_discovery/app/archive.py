"""Versioned on-disk form of a built index.

Canonical format is human-auditable JSON with sorted keys; a ``.gz`` path
selects the compact gzip variant of the same bytes. Apart from the
``created_at`` field, identical builds serialize to identical bytes.
"""

from __future__ import annotations

import gzip
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from ..config import PipelineConfig, parse_config
from ..discovery import DiscoveryIndex, build_index
from ..errors import ArchiveError
from ..model import (
    Cover,
    DeviceRecord,
    Partition,
    RelationKind,
    SocialGraph,
    Visibility,
)

ARCHIVE_SCHEMA_VERSION = 1
ARCHIVE_KIND = "siot-discovery-index"


@dataclass(frozen=True)
class IndexArchive:
    """A loaded archive: the index plus its build provenance, build-time
    statistics, and the pipeline configuration used for the build."""

    schema_version: int
    created_at: str
    build_params: dict
    index: DiscoveryIndex
    stats: dict
    config: "PipelineConfig"


def _partition_payload(partition: Partition) -> dict:
    return {str(node): comm for node, comm in sorted(partition.assignment.items())}


def _partition_from(payload: dict, kind: RelationKind) -> Partition:
    return Partition(
        relation_kind=kind,
        assignment={int(node): int(comm) for node, comm in payload.items()},
    )


def save_archive(
    index: DiscoveryIndex,
    path: str | Path,
    config: PipelineConfig,
    build_params: dict | None = None,
    stats: dict | None = None,
    created_at: str | None = None,
) -> None:
    payload = {
        "kind": ARCHIVE_KIND,
        "schema_version": ARCHIVE_SCHEMA_VERSION,
        "created_at": created_at or datetime.now(timezone.utc).isoformat(),
        "build": build_params or {},
        "stats": stats or {},
        "config": config.document,
        "devices": [
            [r.device_id, r.device_type, r.owner_id, r.visibility.value,
             r.position[0], r.position[1]]
            for r in index.devices
        ],
        "capability_map": {
            t: sorted(apps) for t, apps in sorted(index.capability_map.items())
        },
        "clor": {
            "assignment": _partition_payload(index.clor),
            "centroids": {
                str(c): list(pos) for c, pos in sorted(index.clor_centroids.items())
            },
        },
        "sor": {"assignment": _partition_payload(index.sor)},
        "sfor": {
            "cover": [sorted(c) for c in index.sfor_cover.communities],
            "scores": list(index.sfor_cover.scores),
            "threshold": index.sfor_cover.threshold,
            "edges": [[i, j, w] for i, j, w in index.sfor_graph.edges],
            "nodes": sorted(index.sfor_graph.nodes),
        },
    }
    text = json.dumps(payload, sort_keys=True, indent=1)
    path = Path(path)
    if path.suffix == ".gz":
        # fixed mtime keeps identical builds byte-identical
        with open(path, "wb") as raw:
            with gzip.GzipFile(fileobj=raw, mode="wb", mtime=0) as fh:
                fh.write(text.encode("utf-8"))
    else:
        path.write_text(text, encoding="utf-8")


def load_archive(path: str | Path) -> IndexArchive:
    path = Path(path)
    if not path.exists():
        raise ArchiveError(f"archive {path} does not exist")
    try:
        if path.suffix == ".gz":
            with gzip.open(path, "rt", encoding="utf-8") as fh:
                payload = json.load(fh)
        else:
            payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ArchiveError(f"archive {path} is unreadable: {exc}") from exc

    if payload.get("kind") != ARCHIVE_KIND:
        raise ArchiveError(f"{path} is not an index archive")
    version = payload.get("schema_version")
    if version != ARCHIVE_SCHEMA_VERSION:
        raise ArchiveError(
            f"{path}: schema_version {version} unsupported (expected {ARCHIVE_SCHEMA_VERSION})"
        )

    capability_map = {
        t: frozenset(apps) for t, apps in payload["capability_map"].items()
    }
    devices = [
        DeviceRecord(
            device_id=int(row[0]),
            device_type=str(row[1]),
            owner_id=int(row[2]),
            visibility=Visibility(row[3]),
            position=(float(row[4]), float(row[5])),
            capabilities=capability_map.get(str(row[1]), frozenset()),
        )
        for row in payload["devices"]
    ]
    clor = _partition_from(payload["clor"]["assignment"], RelationKind.CLOR)
    sor = _partition_from(payload["sor"]["assignment"], RelationKind.SOR)
    sfor_section = payload["sfor"]
    cover = Cover(
        relation_kind=RelationKind.SFOR,
        communities=tuple(frozenset(c) for c in sfor_section["cover"]),
        scores=tuple(sfor_section["scores"]),
        threshold=float(sfor_section["threshold"]),
    )
    sfor_graph = SocialGraph.build(
        RelationKind.SFOR,
        {int(n) for n in sfor_section["nodes"]},
        [(int(i), int(j), float(w)) for i, j, w in sfor_section["edges"]],
    )
    index = build_index(
        devices,
        clor,
        cover,
        sor,
        capability_map,
        sfor_graph=sfor_graph,
    )
    if "config" not in payload:
        raise ArchiveError(f"{path}: archive carries no pipeline configuration")
    config = parse_config(payload["config"])
    return IndexArchive(
        schema_version=int(version),
        created_at=str(payload.get("created_at", "")),
        build_params=dict(payload.get("build", {})),
        index=index,
        stats=dict(payload.get("stats", {})),
        config=config,
    )


def archives_equivalent(path_a: str | Path, path_b: str | Path) -> bool:
    """True when two archives differ at most in their created_at field."""
    def canonical(p: str | Path) -> str:
        p = Path(p)
        if p.suffix == ".gz":
            with gzip.open(p, "rt", encoding="utf-8") as fh:
                payload = json.load(fh)
        else:
            payload = json.loads(Path(p).read_text(encoding="utf-8"))
        payload.pop("created_at", None)
        return json.dumps(payload, sort_keys=True)

    return canonical(path_a) == canonical(path_b)
