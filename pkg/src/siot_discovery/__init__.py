"""Service discovery over social-IoT device catalogs.

Builds three weighted relationship graphs over a device catalog
(co-location, ownership/friendship, repeated contact), partitions them into
virtual communities, and resolves natural-language crowdsourcing requests to
a small set of capable, trusted, co-located devices.
"""

from .config import PipelineConfig, default_config, load_config
from .discovery import (
    DiscoveryIndex,
    DiscoveryResult,
    build_index,
    discover,
    eligible_by_trust,
    nearest_clor_community,
)
from .ingest import (
    SyntheticCityParams,
    generate_synthetic_city,
    generate_watts_strogatz,
    load_contact_trace,
    load_devices,
)
from .model import (
    ContactEvent,
    Cover,
    DeviceRecord,
    OwnerGraph,
    Partition,
    RelationKind,
    RequestMetadata,
    SocialGraph,
    TrustLevel,
    validate_device_table,
)
from .relations import SorRule, build_clor, build_sfor, build_sor, clor_weight
from .request_nlp import ParsedRequest, parse_request

__version__ = "0.1.0"

__all__ = [
    "ContactEvent",
    "Cover",
    "DeviceRecord",
    "DiscoveryIndex",
    "DiscoveryResult",
    "OwnerGraph",
    "ParsedRequest",
    "Partition",
    "PipelineConfig",
    "RelationKind",
    "RequestMetadata",
    "SocialGraph",
    "SorRule",
    "SyntheticCityParams",
    "TrustLevel",
    "build_clor",
    "build_index",
    "build_sfor",
    "build_sor",
    "clor_weight",
    "default_config",
    "discover",
    "eligible_by_trust",
    "generate_synthetic_city",
    "generate_watts_strogatz",
    "load_config",
    "load_contact_trace",
    "load_devices",
    "nearest_clor_community",
    "parse_request",
    "validate_device_table",
    "__version__",
]
