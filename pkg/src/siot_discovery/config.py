"""Loading and validation of the pipeline configuration document.

One JSON document carries both halves of the configuration: the catalog side
(device types and the capability map) and the request side (keywords,
synonyms, stop words, gazetteer). The document is versioned through a
``schema_version`` field.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError

CONFIG_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class CapabilityConfig:
    """Declared device types and which applications each type can serve."""

    device_types: frozenset[str]
    capability_map: dict[str, frozenset[str]]
    applications: tuple[str, ...]

    def capabilities_for(self, device_type: str) -> frozenset[str]:
        if device_type not in self.device_types:
            raise ConfigError(f"device type {device_type!r} is not declared")
        return self.capability_map.get(device_type, frozenset())


@dataclass(frozen=True)
class KeywordConfig:
    """Keyword lists, synonym tables, stop words, and the place gazetteer."""

    applications: tuple[str, ...]
    keywords: dict[str, frozenset[str]]
    synonyms: dict[str, dict[str, str]]
    stopwords: frozenset[str]
    gazetteer: dict[str, tuple[float, float]]
    min_score: float = 0.2


@dataclass(frozen=True)
class PipelineConfig:
    schema_version: int
    capabilities: CapabilityConfig
    keywords: KeywordConfig
    digest: str
    document: dict


def _expanded_vocabulary(keywords: KeywordConfig, app: str) -> frozenset[str]:
    return keywords.keywords[app] | frozenset(keywords.synonyms.get(app, {}))


def _validate(config: PipelineConfig) -> None:
    caps = config.capabilities
    kw = config.keywords
    if not caps.applications:
        raise ConfigError("no applications declared")
    if tuple(kw.applications) != tuple(caps.applications):
        raise ConfigError("keyword section and capability section disagree on applications")
    for device_type, apps in caps.capability_map.items():
        if device_type not in caps.device_types:
            raise ConfigError(f"capability map names undeclared type {device_type!r}")
        unknown = apps - set(caps.applications)
        if unknown:
            raise ConfigError(f"type {device_type!r} maps to unknown applications {sorted(unknown)}")
    missing = caps.device_types - set(caps.capability_map)
    if missing:
        raise ConfigError(f"device types without capability entry: {sorted(missing)}")

    for app in kw.applications:
        if app not in kw.keywords:
            raise ConfigError(f"application {app!r} has no keyword list")
        for surface, canonical in kw.synonyms.get(app, {}).items():
            if canonical not in kw.keywords[app]:
                raise ConfigError(
                    f"synonym {surface!r} of {app!r} targets {canonical!r}, not a keyword"
                )
    apps = list(kw.applications)
    for i, a in enumerate(apps):
        vocab_a = _expanded_vocabulary(kw, a)
        for b in apps[i + 1:]:
            clash = vocab_a & _expanded_vocabulary(kw, b)
            if clash:
                raise ConfigError(f"applications {a!r} and {b!r} share vocabulary {sorted(clash)}")
        stopped = vocab_a & kw.stopwords
        if stopped:
            raise ConfigError(f"stop words shadow {a!r} vocabulary {sorted(stopped)}")
    for name, pos in kw.gazetteer.items():
        if name != name.lower():
            raise ConfigError(f"gazetteer name {name!r} must be lower-cased")
        x, y = pos
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise ConfigError(f"gazetteer entry {name!r} outside the unit square")
    if not (0.0 < kw.min_score <= 1.0):
        raise ConfigError("min_score must lie in (0, 1]")


def parse_config(document: dict, digest: str = "") -> PipelineConfig:
    try:
        version = int(document["schema_version"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("configuration document lacks a schema_version field") from exc
    if version != CONFIG_SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported config schema_version {version} (expected {CONFIG_SCHEMA_VERSION})"
        )
    try:
        applications = tuple(document["applications"])
        capabilities = CapabilityConfig(
            device_types=frozenset(document["device_types"]),
            capability_map={
                t: frozenset(apps) for t, apps in document["capability_map"].items()
            },
            applications=applications,
        )
        keywords = KeywordConfig(
            applications=applications,
            keywords={a: frozenset(map(str.lower, ws)) for a, ws in document["keywords"].items()},
            synonyms={
                a: {s.lower(): c.lower() for s, c in table.items()}
                for a, table in document.get("synonyms", {}).items()
            },
            stopwords=frozenset(map(str.lower, document["stopwords"])),
            gazetteer={
                name: (float(x), float(y))
                for name, (x, y) in document.get("gazetteer", {}).items()
            },
            min_score=float(document.get("min_score", 0.2)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed configuration document: {exc}") from exc
    config = PipelineConfig(
        schema_version=version,
        capabilities=capabilities,
        keywords=keywords,
        digest=digest or _digest_of(document),
        document=document,
    )
    _validate(config)
    return config


def _digest_of(document: dict) -> str:
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_config(path: str | Path) -> PipelineConfig:
    raw = Path(path).read_text(encoding="utf-8")
    try:
        document = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return parse_config(document)


def default_config() -> PipelineConfig:
    """The configuration shipped with the package."""
    raw = resources.files("siot_discovery.data").joinpath("default_config.json").read_text()
    return parse_config(json.loads(raw))
