"""Community detection and graph statistics."""

from .backend import available_kernels, kernel_name
from .louvain import LouvainConfig, louvain, louvain_trace
from .metrics import (
    Histogram,
    avg_clustering_coefficient,
    community_histogram,
    degree_distribution,
    heavy_tail_share,
)
from .overlap import (
    OverlapConfig,
    cleanup_cover,
    community_significance,
    corrected_score,
    detect_overlapping,
    membership_score,
)
from .quality import modularity

__all__ = [
    "Histogram",
    "LouvainConfig",
    "OverlapConfig",
    "available_kernels",
    "avg_clustering_coefficient",
    "cleanup_cover",
    "community_histogram",
    "community_significance",
    "corrected_score",
    "degree_distribution",
    "detect_overlapping",
    "heavy_tail_share",
    "kernel_name",
    "louvain",
    "louvain_trace",
    "membership_score",
    "modularity",
]
