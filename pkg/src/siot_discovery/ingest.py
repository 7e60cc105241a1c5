"""Catalog/trace loading and seeded synthetic-city generation.

Loaders normalize positions into the unit square using the bounding box the
file declares. Generators are pure functions of (params, seed): the same
inputs always produce byte-identical outputs.
"""

from __future__ import annotations

import csv
import json
import math
import random
from dataclasses import dataclass
from io import StringIO
from pathlib import Path
from typing import Iterable, Sequence

from .config import PipelineConfig, default_config
from .errors import CatalogError, ParameterError, TraceError
from .model import (
    ContactEvent,
    DeviceRecord,
    OwnerGraph,
    Visibility,
    validate_device_table,
)
from .relations import SorRule

FILE_SCHEMA_VERSION = 1
DEVICE_COLUMNS = ("device_id", "device_type", "owner_id", "visibility", "x", "y")
CONTACT_COLUMNS = ("device_a", "device_b", "start", "end")
OWNER_COLUMNS = ("owner_a", "owner_b")

SOR_VIOLATIONS = ("few_meetings", "short_total", "long_gap")


# ---------------------------------------------------------------------------
# loading


def _split_headers(text: str) -> tuple[dict[str, str], list[tuple[int, str]]]:
    """Separate leading '# key=value' comment lines from data lines.

    Returns the header mapping and (line_number, line) pairs for the rest.
    """
    headers: dict[str, str] = {}
    rows: list[tuple[int, str]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, value = body.split("=", 1)
                headers[key.strip()] = value.strip()
            continue
        rows.append((line_no, raw))
    return headers, rows


def _parse_bbox(value: str) -> tuple[float, float, float, float]:
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != 4:
        raise CatalogError(f"bbox must have 4 numbers, got {value!r}")
    x0, y0, x1, y1 = map(float, parts)
    if not (x1 > x0 and y1 > y0):
        raise CatalogError(f"bbox {value!r} is degenerate")
    return x0, y0, x1, y1


def _normalize(x: float, y: float, bbox: tuple[float, float, float, float] | None):
    if bbox is None:
        return x, y
    x0, y0, x1, y1 = bbox
    return (x - x0) / (x1 - x0), (y - y0) / (y1 - y0)


def _record_from_fields(
    fields: dict[str, str],
    line_no: int,
    bbox,
    config: PipelineConfig,
    source: str,
) -> DeviceRecord:
    try:
        device_id = int(fields["device_id"])
        device_type = fields["device_type"].strip()
        owner_id = int(fields["owner_id"])
        visibility = Visibility(fields["visibility"].strip().lower())
        x, y = float(fields["x"]), float(fields["y"])
    except KeyError as exc:
        raise CatalogError(f"{source}:{line_no}: missing field {exc.args[0]!r}") from exc
    except ValueError as exc:
        raise CatalogError(f"{source}:{line_no}: {exc}") from exc
    x, y = _normalize(x, y, bbox)
    capabilities = config.capabilities.capability_map.get(device_type, frozenset())
    return DeviceRecord(
        device_id=device_id,
        device_type=device_type,
        owner_id=owner_id,
        visibility=visibility,
        position=(x, y),
        capabilities=capabilities,
    )


def load_devices(
    source: str | Path,
    format: str = "auto",
    config: PipelineConfig | None = None,
) -> list[DeviceRecord]:
    """Load and validate a device catalog from a delimited or JSON file.

    Positions are normalized with the file's declared bounding box (comment
    header ``# bbox=x0,y0,x1,y1`` or a JSON ``bbox`` field); without one
    they must already lie in the unit square. A catalog that fails
    validation raises CatalogError with the report summary.
    """
    config = config or default_config()
    path = Path(source)
    if format == "auto":
        format = "json" if path.suffix.lower() == ".json" else "delimited"
    text = path.read_text(encoding="utf-8")

    records: list[DeviceRecord] = []
    if format == "json":
        try:
            document = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CatalogError(f"{path}: invalid JSON ({exc})") from exc
        if isinstance(document, dict):
            bbox = tuple(document["bbox"]) if "bbox" in document else None
            rows = document.get("devices")
            if rows is None:
                raise CatalogError(f"{path}: missing field 'devices'")
        else:
            bbox, rows = None, document
        for i, row in enumerate(rows):
            fields = {k: str(v) for k, v in row.items()}
            records.append(_record_from_fields(fields, i + 1, bbox, config, str(path)))
    elif format == "delimited":
        headers, rows = _split_headers(text)
        bbox = _parse_bbox(headers["bbox"]) if "bbox" in headers else None
        if not rows:
            return []
        first_no, first = rows[0]
        reader = csv.reader(StringIO(first))
        columns = [c.strip() for c in next(reader)]
        missing = set(DEVICE_COLUMNS) - set(columns)
        if missing:
            raise CatalogError(f"{path}:{first_no}: missing column {sorted(missing)[0]!r}")
        for line_no, raw in rows[1:]:
            values = next(csv.reader(StringIO(raw)))
            if len(values) != len(columns):
                raise CatalogError(
                    f"{path}:{line_no}: expected {len(columns)} fields, got {len(values)}"
                )
            fields = dict(zip(columns, values))
            records.append(_record_from_fields(fields, line_no, bbox, config, str(path)))
    else:
        raise ParameterError(f"unknown catalog format {format!r}")

    report = validate_device_table(records, config.capabilities)
    if not report.ok:
        raise CatalogError(f"{path}: {report.summary()}")
    return records


def crop_to_bbox(
    devices: Sequence[DeviceRecord],
    bbox: tuple[float, float, float, float],
    renormalize: bool = True,
) -> list[DeviceRecord]:
    """Keep devices inside the (normalized-coordinate) box; by default the
    cropped area is stretched back onto the unit square so the proximity
    weight stays scale-free on the sub-map."""
    x0, y0, x1, y1 = bbox
    if not (x1 > x0 and y1 > y0):
        raise ParameterError("bbox is degenerate")
    kept = []
    for record in devices:
        x, y = record.position
        if x0 <= x <= x1 and y0 <= y <= y1:
            if renormalize:
                x, y = (x - x0) / (x1 - x0), (y - y0) / (y1 - y0)
            kept.append(
                DeviceRecord(
                    device_id=record.device_id,
                    device_type=record.device_type,
                    owner_id=record.owner_id,
                    visibility=record.visibility,
                    position=(x, y),
                    capabilities=record.capabilities,
                )
            )
    return kept


def load_contact_trace(source: str | Path) -> list[ContactEvent]:
    """Load contact events sorted by start time.

    Rows are (device_a, device_b, start, end) in seconds; a malformed row or
    one ending before it starts raises TraceError naming the line.
    """
    path = Path(source)
    headers, rows = _split_headers(path.read_text(encoding="utf-8"))
    events: list[ContactEvent] = []
    start_at = 0
    if rows and rows[0][1].replace(" ", "").startswith("device_a,"):
        start_at = 1
    for line_no, raw in rows[start_at:]:
        parts = [p.strip() for p in raw.split(",")]
        if len(parts) != 4:
            raise TraceError(f"{path}:{line_no}: expected 4 fields, got {len(parts)}")
        try:
            event = ContactEvent(
                device_a=int(parts[0]),
                device_b=int(parts[1]),
                start_time=float(parts[2]),
                end_time=float(parts[3]),
            )
        except (ValueError, ParameterError) as exc:
            raise TraceError(f"{path}:{line_no}: {exc}") from exc
        events.append(event)
    events.sort(key=lambda e: (e.start_time, e.end_time, e.pair))
    return events


def load_owner_graph(source: str | Path) -> OwnerGraph:
    """Load owner friendships from a delimited (owner_a, owner_b) file."""
    path = Path(source)
    headers, rows = _split_headers(path.read_text(encoding="utf-8"))
    nodes_header = headers.get("owners", "")
    nodes = {int(t) for t in nodes_header.split(",") if t.strip()} if nodes_header else set()
    edges: list[tuple[int, int]] = []
    start_at = 1 if rows and rows[0][1].replace(" ", "").startswith("owner_a") else 0
    for line_no, raw in rows[start_at:]:
        parts = [p.strip() for p in raw.split(",")]
        if len(parts) != 2:
            raise CatalogError(f"{path}:{line_no}: expected 2 fields")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise CatalogError(f"{path}:{line_no}: {exc}") from exc
        edges.append((a, b))
        nodes.add(a)
        nodes.add(b)
    return OwnerGraph.build(nodes, edges)


# ---------------------------------------------------------------------------
# generation


def generate_watts_strogatz(n: int, k: int, p: float, seed: int = 0) -> OwnerGraph:
    """Ring lattice of even degree k with each forward edge rewired with
    probability p. Rewiring relocates edges, so the count stays n*k/2."""
    if k < 2 or k % 2 != 0:
        raise ParameterError("k must be an even integer >= 2")
    if n <= k:
        raise ParameterError("n must exceed k")
    if not (0.0 <= p <= 1.0):
        raise ParameterError("p must lie in [0, 1]")
    rng = random.Random(seed)
    adjacency: dict[int, set[int]] = {i: set() for i in range(n)}
    for j in range(1, k // 2 + 1):
        for i in range(n):
            t = (i + j) % n
            adjacency[i].add(t)
            adjacency[t].add(i)
    for j in range(1, k // 2 + 1):
        for i in range(n):
            if rng.random() >= p:
                continue
            old = (i + j) % n
            if len(adjacency[i]) >= n - 1:
                continue  # saturated node: keep the lattice edge
            new = rng.randrange(n)
            while new == i or new in adjacency[i]:
                new = rng.randrange(n)
            adjacency[i].discard(old)
            adjacency[old].discard(i)
            adjacency[i].add(new)
            adjacency[new].add(i)
    edges = {(i, j) if i < j else (j, i) for i, nbrs in adjacency.items() for j in nbrs}
    return OwnerGraph.build(range(n), sorted(edges))


@dataclass(frozen=True)
class ClusterSpec:
    """One spatial cluster: a disc inside the unit square plus its share of
    the device population."""

    center: tuple[float, float]
    radius: float
    share: float

    def __post_init__(self) -> None:
        x, y = self.center
        if not self.radius > 0:
            raise ParameterError("cluster radius must be positive")
        if not (
            0.0 <= x - self.radius and x + self.radius <= 1.0
            and 0.0 <= y - self.radius and y + self.radius <= 1.0
        ):
            raise ParameterError("cluster disc must fit inside the unit square")
        if not (0.0 < self.share <= 1.0):
            raise ParameterError("cluster share must lie in (0, 1]")


@dataclass(frozen=True)
class SyntheticCityParams:
    """Recipe for a synthetic catalog + owner network + contact trace."""

    n_devices: int
    n_owners: int
    clusters: tuple[ClusterSpec, ...]
    ws_k: int = 6
    ws_p: float = 0.1
    trace_length_hours: float = 72.0
    seed: int = 0
    public_share: float = 0.1
    device_type_cycle: tuple[str, ...] = (
        "smartphone",
        "weather-sensor",
        "personal-computer",
        "transport-sensor",
        "tablet",
        "smartwatch",
    )
    sor_qualifying: tuple[tuple[int, int], ...] = ()
    sor_near_misses: tuple[tuple[int, int, str], ...] = ()

    def __post_init__(self) -> None:
        if self.n_devices < 1:
            raise ParameterError("n_devices must be positive")
        if self.n_owners < 1:
            raise ParameterError("n_owners must be positive")
        if not self.clusters:
            raise ParameterError("at least one cluster is required")
        total_share = math.fsum(c.share for c in self.clusters)
        if abs(total_share - 1.0) > 1e-9:
            raise ParameterError(f"cluster shares must sum to 1, got {total_share}")
        if self.ws_k >= self.n_owners:
            raise ParameterError("ws_k must be smaller than n_owners")
        if not (0.0 <= self.public_share < 1.0):
            raise ParameterError("public_share must lie in [0, 1)")
        if self.trace_length_hours < 24.0:
            raise ParameterError("trace_length_hours must be at least 24")
        for a, b, kind in self.sor_near_misses:
            if kind not in SOR_VIOLATIONS:
                raise ParameterError(f"unknown violation kind {kind!r}")


def city_layout(params: SyntheticCityParams) -> list[tuple[int, int, str]]:
    """Deterministic (device_id, cluster_index, device_type) layout.

    Devices fill clusters in contiguous id ranges sized by share (remainder
    to the last cluster); types cycle globally. No randomness: tests can
    derive ground truth from params alone.
    """
    counts = [int(math.floor(c.share * params.n_devices)) for c in params.clusters]
    counts[-1] += params.n_devices - sum(counts)
    layout = []
    device_id = 0
    for cluster_idx, count in enumerate(counts):
        for _ in range(count):
            device_type = params.device_type_cycle[device_id % len(params.device_type_cycle)]
            layout.append((device_id, cluster_idx, device_type))
            device_id += 1
    return layout


def synthesize_sor_trace(
    qualifying: Iterable[tuple[int, int]],
    near_misses: Iterable[tuple[int, int, str]] = (),
    rule: SorRule | None = None,
    seed: int = 0,
    horizon_hours: float = 72.0,
) -> list[ContactEvent]:
    """Contact events that make each qualifying pair satisfy the rule and
    each near-miss pair violate exactly the named clause."""
    rule = rule or SorRule()
    rng = random.Random(seed)
    max_gap_s = rule.max_gap_hours * 3600.0
    events: list[ContactEvent] = []

    def meetings(a: int, b: int, durations_min: list[float], gaps_s: list[float]) -> None:
        span = sum(d * 60.0 for d in durations_min) + sum(gaps_s)
        latest = max(0.0, horizon_hours * 3600.0 - span)
        t = rng.uniform(0.0, latest)
        for idx, duration in enumerate(durations_min):
            end = t + duration * 60.0
            events.append(ContactEvent(a, b, t, end))
            if idx < len(gaps_s):
                t = end + gaps_s[idx]

    per_meeting = rule.min_total_minutes / rule.min_meetings
    ok_gap = min(2.0 * 3600.0, max_gap_s / 2.0)
    for a, b in qualifying:
        durations = [per_meeting + 5.0] * rule.min_meetings
        meetings(a, b, durations, [ok_gap] * (rule.min_meetings - 1))
    for a, b, kind in near_misses:
        if kind == "few_meetings":
            n = rule.min_meetings - 1
            if n == 0:
                continue  # rule cannot be under-met on count
            durations = [rule.min_total_minutes / n + 5.0] * n
            meetings(a, b, durations, [ok_gap] * (n - 1))
        elif kind == "short_total":
            share = (rule.min_total_minutes * 0.9) / rule.min_meetings
            durations = [share] * rule.min_meetings
            meetings(a, b, durations, [ok_gap] * (rule.min_meetings - 1))
        elif kind == "long_gap":
            durations = [rule.min_total_minutes / rule.min_meetings + 5.0] * rule.min_meetings
            gaps = [ok_gap] * (rule.min_meetings - 1)
            gaps[-1] = max_gap_s + 3600.0
            meetings(a, b, durations, gaps)
        else:
            raise ParameterError(f"unknown violation kind {kind!r}")
    events.sort(key=lambda e: (e.start_time, e.end_time, e.pair))
    return events


def generate_synthetic_city(
    params: SyntheticCityParams,
    config: PipelineConfig | None = None,
) -> tuple[list[DeviceRecord], OwnerGraph, list[ContactEvent]]:
    """Generate (devices, owner network, contact trace) for tests and demos.

    Devices are placed uniformly inside their cluster disc, owners are
    assigned round-robin, and contact events realize the pairs flagged in
    the params. Fully determined by ``params`` (which includes the seed).
    """
    config = config or default_config()
    rng = random.Random(params.seed)
    layout = city_layout(params)

    devices: list[DeviceRecord] = []
    for device_id, cluster_idx, device_type in layout:
        cluster = params.clusters[cluster_idx]
        angle = rng.uniform(0.0, 2.0 * math.pi)
        radius = cluster.radius * math.sqrt(rng.random())
        x = cluster.center[0] + radius * math.cos(angle)
        y = cluster.center[1] + radius * math.sin(angle)
        visibility = Visibility.PUBLIC if rng.random() < params.public_share else Visibility.PRIVATE
        devices.append(
            DeviceRecord(
                device_id=device_id,
                device_type=device_type,
                owner_id=device_id % params.n_owners,
                visibility=visibility,
                position=(x, y),
                capabilities=config.capabilities.capability_map.get(device_type, frozenset()),
            )
        )

    owner_graph = generate_watts_strogatz(
        params.n_owners, params.ws_k, params.ws_p, seed=params.seed
    )
    trace = synthesize_sor_trace(
        params.sor_qualifying,
        params.sor_near_misses,
        seed=params.seed,
        horizon_hours=params.trace_length_hours,
    )
    return devices, owner_graph, trace


# ---------------------------------------------------------------------------
# writing (used by the `generate` command)


def write_devices_csv(devices: Sequence[DeviceRecord], path: str | Path) -> None:
    lines = [f"# schema_version={FILE_SCHEMA_VERSION}", ",".join(DEVICE_COLUMNS)]
    for r in sorted(devices, key=lambda d: d.device_id):
        x, y = r.position
        lines.append(
            f"{r.device_id},{r.device_type},{r.owner_id},{r.visibility.value},{x!r},{y!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_owner_edges_csv(graph: OwnerGraph, path: str | Path) -> None:
    lines = [
        f"# schema_version={FILE_SCHEMA_VERSION}",
        f"# owners={','.join(str(n) for n in sorted(graph.nodes))}",
        ",".join(OWNER_COLUMNS),
    ]
    lines.extend(f"{a},{b}" for a, b in graph.edges)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_contacts_csv(events: Sequence[ContactEvent], path: str | Path) -> None:
    lines = [f"# schema_version={FILE_SCHEMA_VERSION}", ",".join(CONTACT_COLUMNS)]
    lines.extend(
        f"{e.device_a},{e.device_b},{e.start_time!r},{e.end_time!r}" for e in events
    )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
