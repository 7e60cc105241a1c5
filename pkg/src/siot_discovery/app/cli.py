"""Command-line interface: generate, build, query, stats, serve."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .. import community, ingest, relations
from ..config import default_config, load_config
from ..discovery import build_index, discover
from ..errors import SiotError, UnknownApplicationError
from ..model import (
    Cover,
    Partition,
    RelationKind,
    RequestMetadata,
    SocialGraph,
    TrustLevel,
)
from ..request_nlp import parse_request
from .archive import load_archive, save_archive

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNKNOWN_APPLICATION = 2


def _singleton_partition(kind: RelationKind, nodes) -> Partition:
    return Partition(
        relation_kind=kind,
        assignment={node: i for i, node in enumerate(sorted(nodes))},
    )


def _histogram_payload(histogram: community.Histogram) -> list[list]:
    return [[label, count] for label, count in histogram.entries]


def _write_histogram_csv(histogram_rows, path: Path, columns: str) -> None:
    lines = [f"# schema_version={ingest.FILE_SCHEMA_VERSION}", columns]
    lines.extend(f"{label},{count}" for label, count in histogram_rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_build(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config = load_config(args.config) if args.config else default_config()
    devices = ingest.load_devices(args.devices, config=config)
    if args.subarea:
        box = tuple(float(v) for v in args.subarea.split(","))
        devices = ingest.crop_to_bbox(devices, box)  # type: ignore[arg-type]
    ids = [r.device_id for r in devices]

    if args.owners:
        owner_graph = ingest.load_owner_graph(args.owners)
    else:
        n, k, p = args.ws.split(",")
        owner_graph = ingest.generate_watts_strogatz(
            int(n), int(k), float(p), seed=args.seed
        )

    id_set = set(ids)
    sor_rule = relations.SorRule()
    if args.trace:
        trace = ingest.load_contact_trace(args.trace)
        # a cropped catalog may not contain every trace participant
        trace = [e for e in trace if e.device_a in id_set and e.device_b in id_set]
        sor_graph = relations.build_sor(trace, sor_rule, nodes=ids)
    elif args.sor_edges:
        loaded = relations.load_edge_list(args.sor_edges, relation_kind=RelationKind.SOR)
        kept = [(i, j, w) for i, j, w in loaded.edges if i in id_set and j in id_set]
        sor_graph = SocialGraph.build(RelationKind.SOR, id_set, kept)
    else:
        sor_graph = relations.build_sor([], sor_rule, nodes=ids)

    clor_graph = relations.build_clor(devices, threshold=args.clor_threshold)
    sfor_graph = relations.build_sfor(devices, owner_graph, max_hops=args.max_hops)

    louvain_config = community.LouvainConfig(seed=args.seed)
    overlap_config = community.OverlapConfig(seed=args.seed)

    q_values: dict[str, float | None] = {}
    if clor_graph.edges:
        clor_partition = community.louvain(clor_graph, louvain_config)
        q_values["clor"] = community.modularity(clor_graph, clor_partition)
    else:
        clor_partition = _singleton_partition(RelationKind.CLOR, ids)
        q_values["clor"] = None
    if sor_graph.edges:
        sor_partition = community.louvain(sor_graph, louvain_config)
        q_values["sor"] = community.modularity(sor_graph, sor_partition)
    else:
        sor_partition = _singleton_partition(RelationKind.SOR, ids)
        q_values["sor"] = None
    if sfor_graph.edges:
        sfor_cover = community.detect_overlapping(sfor_graph, overlap_config)
    else:
        sfor_cover = Cover(
            relation_kind=RelationKind.SFOR,
            communities=(),
            scores=(),
            threshold=overlap_config.significance_threshold,
        )

    stats = {
        "histograms": {
            "clor": _histogram_payload(community.community_histogram(clor_partition)),
            "sfor": _histogram_payload(community.community_histogram(sfor_cover)),
            "sor": _histogram_payload(community.community_histogram(sor_partition)),
        },
        "degree_distributions": {
            "clor": _histogram_payload(community.degree_distribution(clor_graph)),
            "sfor": _histogram_payload(community.degree_distribution(sfor_graph)),
            "sor": _histogram_payload(community.degree_distribution(sor_graph)),
        },
        "clustering": {
            "clor": community.avg_clustering_coefficient(clor_graph),
            "sfor": community.avg_clustering_coefficient(sfor_graph),
            "sor": community.avg_clustering_coefficient(sor_graph),
        },
        "modularity": q_values,
    }
    build_params = {
        "seed": args.seed,
        "clor_threshold": args.clor_threshold,
        "sfor_max_hops": args.max_hops,
        "sor_rule": {
            "min_meetings": sor_rule.min_meetings,
            "min_total_minutes": sor_rule.min_total_minutes,
            "max_gap_hours": sor_rule.max_gap_hours,
            "reference_minutes": sor_rule.reference_minutes,
        },
        "config_digest": config.digest,
        "sources": {
            "devices": str(args.devices),
            "owners": str(args.owners) if args.owners else None,
            "ws": args.ws if not args.owners else None,
            "trace": str(args.trace) if args.trace else None,
            "sor_edges": str(args.sor_edges) if args.sor_edges else None,
            "subarea": args.subarea,
        },
    }

    index = build_index(
        devices, clor_partition, sfor_cover, sor_partition,
        config.capabilities, sfor_graph=sfor_graph,
    )
    save_archive(index, args.out, config, build_params=build_params, stats=stats)

    elapsed = time.perf_counter() - started
    print(f"devices: {len(devices)}")
    for name, graph in (("clor", clor_graph), ("sfor", sfor_graph), ("sor", sor_graph)):
        print(f"{name}: {len(graph.nodes)} nodes, {graph.edge_count} edges")
    print(
        f"communities: clor={clor_partition.n_communities} "
        f"sfor={len(sfor_cover.communities)} sor={sor_partition.n_communities}"
    )
    for name, q in q_values.items():
        print(f"modularity[{name}]: {'n/a' if q is None else f'{q:.4f}'}")
    print(f"archive: {args.out} ({elapsed:.1f}s)")
    return EXIT_OK


def cmd_query(args: argparse.Namespace) -> int:
    archive = load_archive(args.archive)
    x, y = (float(v) for v in args.pos.split(","))
    metadata = RequestMetadata(
        requester_id=args.requester,
        requester_position=(x, y),
        trust_level=TrustLevel.parse(args.trust),
    )
    try:
        parsed = parse_request(args.text, metadata, archive.config)
    except UnknownApplicationError as exc:
        print(f"unknown application: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_APPLICATION
    result = discover(archive.index, parsed, metadata)
    print(json.dumps(result.to_dict(), sort_keys=True, indent=1))
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    archive = load_archive(args.archive)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for relation, rows in archive.stats.get("histograms", {}).items():
        _write_histogram_csv(rows, out / f"communities_{relation}.csv", "label,count")
    for relation, rows in archive.stats.get("degree_distributions", {}).items():
        _write_histogram_csv(rows, out / f"degree_{relation}.csv", "degree,count")
    clustering = archive.stats.get("clustering", {})
    lines = [f"# schema_version={ingest.FILE_SCHEMA_VERSION}", "relation,avg_clustering_coefficient"]
    lines.extend(f"{relation},{value!r}" for relation, value in sorted(clustering.items()))
    (out / "clustering.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"stats written to {out}")
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    with open(args.params, encoding="utf-8") as fh:
        raw = json.load(fh)
    clusters = tuple(
        ingest.ClusterSpec(center=tuple(c["center"]), radius=c["radius"], share=c["share"])
        for c in raw["clusters"]
    )
    params = ingest.SyntheticCityParams(
        n_devices=raw["n_devices"],
        n_owners=raw["n_owners"],
        clusters=clusters,
        ws_k=raw.get("ws_k", 6),
        ws_p=raw.get("ws_p", 0.1),
        trace_length_hours=raw.get("trace_length_hours", 72.0),
        seed=args.seed if args.seed is not None else raw.get("seed", 0),
        public_share=raw.get("public_share", 0.1),
        sor_qualifying=tuple(tuple(p) for p in raw.get("sor_qualifying", [])),
        sor_near_misses=tuple(tuple(p) for p in raw.get("sor_near_misses", [])),
    )
    devices, owner_graph, trace = ingest.generate_synthetic_city(params)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ingest.write_devices_csv(devices, out / "devices.csv")
    ingest.write_owner_edges_csv(owner_graph, out / "owners.csv")
    ingest.write_contacts_csv(trace, out / "contacts.csv")
    print(f"wrote devices.csv ({len(devices)}), owners.csv "
          f"({owner_graph.edge_count} edges), contacts.csv ({len(trace)} events) to {out}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve_http

    serve_http(args.archive, args.bind)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="siot-discovery",
        description="Build relationship graphs over a device catalog and "
        "answer natural-language service requests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="build graphs, detect communities, write an archive")
    p_build.add_argument("--devices", required=True, help="device catalog (csv or json)")
    group = p_build.add_mutually_exclusive_group(required=True)
    group.add_argument("--owners", help="owner friendship edge file")
    group.add_argument("--ws", help="generate owners as small-world n,k,p")
    p_build.add_argument("--trace", help="contact trace file")
    p_build.add_argument("--sor-edges", help="precomputed contact-relation edge list")
    p_build.add_argument("--config", help="pipeline config JSON (default: shipped)")
    p_build.add_argument("--seed", type=int, default=0)
    p_build.add_argument("--clor-threshold", type=float, default=0.8)
    p_build.add_argument("--max-hops", type=int, default=3)
    p_build.add_argument("--subarea", help="crop to x0,y0,x1,y1 before building")
    p_build.add_argument("--out", required=True, help="archive output path")
    p_build.set_defaults(func=cmd_build)

    p_query = sub.add_parser("query", help="answer one request against an archive")
    p_query.add_argument("--archive", required=True)
    p_query.add_argument("--text", required=True)
    p_query.add_argument("--requester", type=int, required=True)
    p_query.add_argument("--pos", required=True, help="requester position x,y")
    p_query.add_argument("--trust", default="any", help="owner|friend|fof:N|any")
    p_query.set_defaults(func=cmd_query)

    p_stats = sub.add_parser("stats", help="export histograms and coefficients")
    p_stats.add_argument("--archive", required=True)
    p_stats.add_argument("--out", required=True, help="output directory")
    p_stats.set_defaults(func=cmd_stats)

    p_generate = sub.add_parser("generate", help="emit a synthetic city dataset")
    p_generate.add_argument("--params", required=True, help="city params JSON")
    p_generate.add_argument("--seed", type=int, default=None)
    p_generate.add_argument("--out", required=True, help="output directory")
    p_generate.set_defaults(func=cmd_generate)

    p_serve = sub.add_parser("serve", help="serve an archive over HTTP")
    p_serve.add_argument("--archive", required=True)
    p_serve.add_argument("--bind", default="127.0.0.1:8080")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SiotError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
