"""Array-form (CSR) view of a SocialGraph for the numeric kernels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import SocialGraph


@dataclass(frozen=True)
class CsrGraph:
    """Compressed sparse rows over contiguous node indices 0..n-1.

    ``ids[idx]`` maps a row index back to the device id. ``loops`` carries
    self-loop weights, which only appear on aggregated levels; a self-loop of
    weight w contributes 2w to the node degree.
    """

    ids: np.ndarray        # int64, sorted device ids
    indptr: np.ndarray     # int64, n+1
    indices: np.ndarray    # int64
    weights: np.ndarray    # float64
    loops: np.ndarray      # float64, n
    degrees: np.ndarray    # float64, n
    two_m: float

    @property
    def n_nodes(self) -> int:
        return len(self.ids)

    def index_of(self) -> dict[int, int]:
        return {int(node): i for i, node in enumerate(self.ids)}


def _assemble(n: int, src: np.ndarray, dst: np.ndarray, wgt: np.ndarray,
              loops: np.ndarray, ids: np.ndarray) -> CsrGraph:
    order = np.lexsort((dst, src))
    src, dst, wgt = src[order], dst[order], wgt[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    indptr = np.cumsum(indptr, dtype=np.int64)
    degrees = np.zeros(n, dtype=np.float64)
    np.add.at(degrees, src, wgt)
    degrees = degrees + 2.0 * loops
    two_m = float(degrees.sum())
    return CsrGraph(
        ids=ids, indptr=indptr, indices=dst, weights=wgt,
        loops=loops.astype(np.float64), degrees=degrees, two_m=two_m,
    )


def to_csr(graph: SocialGraph) -> CsrGraph:
    ids = np.array(sorted(graph.nodes), dtype=np.int64)
    n = len(ids)
    if graph.edges:
        raw = np.asarray(graph.edges, dtype=np.float64).reshape(-1, 3)
        ei = np.searchsorted(ids, raw[:, 0].astype(np.int64))
        ej = np.searchsorted(ids, raw[:, 1].astype(np.int64))
        w = raw[:, 2]
        src = np.concatenate([ei, ej]).astype(np.int64)
        dst = np.concatenate([ej, ei]).astype(np.int64)
        wgt = np.concatenate([w, w])
    else:
        src = np.empty(0, dtype=np.int64)
        dst = np.empty(0, dtype=np.int64)
        wgt = np.empty(0, dtype=np.float64)
    loops = np.zeros(n, dtype=np.float64)
    return _assemble(n, src, dst, wgt, loops, ids)


def csr_from_pairs(n: int, a: np.ndarray, b: np.ndarray, w: np.ndarray,
                   loops: np.ndarray) -> CsrGraph:
    """CSR for an aggregated level graph over nodes 0..n-1; pairs have a < b."""
    src = np.concatenate([a, b]).astype(np.int64)
    dst = np.concatenate([b, a]).astype(np.int64)
    wgt = np.concatenate([w, w]).astype(np.float64)
    return _assemble(n, src, dst, wgt, loops, np.arange(n, dtype=np.int64))
