"""Overlapping community detection by significance-scored cleanup.

Seed clusters come from the non-overlapping optimizer. Each cluster is then
refined independently: external border nodes whose connection into the
cluster is too strong to be a degree-sequence fluctuation are admitted, and
members whose connection is explicable by chance are expelled, until the
cluster reaches a fixed point. A node admitted by several clusters overlaps;
a cluster that empties out is dropped and its former nodes may end up in no
community at all.

Membership score. For a node with weighted degree k evaluated against a
cluster C (node outside C), let K_out be C's external stub mass (total
member degree minus twice the internal weight) and S_ext the stub mass of
all nodes outside C, k included. Under a configuration-model null, each of
C's K_out free stub units lands on a given external node proportionally to
its share of external stubs, so the node's expected internal weight is
K_out * k / S_ext. The score is the upper tail

    r = P(X >= w_in),  X ~ Binomial(K_out, k / S_ext)

evaluated through the regularized incomplete beta function, which extends
the tail continuously to the real-valued weights these graphs carry. When
the node is the only external mass (S_ext == k) the null has a single
outcome and the node cannot be a fluctuation; the score is 0 by convention.
A node with no internal weight scores 1.

Scores are corrected for multiple testing across the candidate set of size
t (the border for admissions, the cluster size for expulsions and audits):
corrected = 1 - (1 - r)^t.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import betainc

from ..errors import EdgelessGraphError, ParameterError
from ..model import Cover, Partition, SocialGraph
from .graphops import CsrGraph, to_csr
from .louvain import LouvainConfig, louvain

_EPS = 1e-12


@dataclass(frozen=True)
class OverlapConfig:
    seed: int = 0
    significance_threshold: float = 0.1
    n_trials: int = 50
    max_iterations: int = 30

    def __post_init__(self) -> None:
        if not (0.0 < self.significance_threshold < 1.0):
            raise ParameterError("significance_threshold must lie in (0, 1)")
        if self.n_trials < 1:
            raise ParameterError("n_trials must be at least 1")
        if self.max_iterations < 1:
            raise ParameterError("max_iterations must be at least 1")


def membership_score(
    k_i: float, w_in: float, community_degree: float,
    community_internal_weight: float, two_m: float,
) -> float:
    """Raw (uncorrected) significance of one node's tie into a community.

    ``community_degree`` and ``community_internal_weight`` describe the
    community WITHOUT the scored node. Lower is more significant.
    """
    if w_in <= _EPS or k_i <= _EPS:
        return 1.0
    s_ext = two_m - community_degree
    if s_ext - k_i <= _EPS:
        return 0.0  # no competing external stubs; see module docstring
    k_out = community_degree - 2.0 * community_internal_weight
    if k_out <= _EPS:
        return 1.0
    w = min(w_in, k_out)
    p = min(max(k_i / s_ext, _EPS), 1.0 - _EPS)
    return float(betainc(w, k_out - w + 1.0, p))


def corrected_score(raw: float, n_candidates: int) -> float:
    """Order-statistics correction: best-of-t under the uniform null."""
    if n_candidates <= 1:
        return raw
    if raw >= 1.0:
        return 1.0
    return float(-np.expm1(n_candidates * np.log1p(-raw)))


class _Workspace:
    """Mutable per-cluster state over the CSR arrays."""

    def __init__(self, csr: CsrGraph):
        self.csr = csr
        self.k = csr.degrees
        self.two_m = csr.two_m
        self.n = csr.n_nodes

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        sl = slice(self.csr.indptr[i], self.csr.indptr[i + 1])
        return self.csr.indices[sl], self.csr.weights[sl]


class _Cluster:
    def __init__(self, ws: _Workspace, members: Iterable[int]):
        self.ws = ws
        self.member = np.zeros(ws.n, dtype=bool)
        self.w_to = np.zeros(ws.n, dtype=np.float64)
        self.k_c = 0.0
        self.w_int = 0.0
        for i in sorted(members):
            self.add(int(i))

    def add(self, i: int) -> None:
        self.w_int += self.w_to[i]
        self.k_c += float(self.ws.k[i])
        idx, w = self.ws.row(i)
        np.add.at(self.w_to, idx, w)
        self.member[i] = True

    def remove(self, i: int) -> None:
        idx, w = self.ws.row(i)
        np.subtract.at(self.w_to, idx, w)
        self.w_int -= self.w_to[i]
        self.k_c -= float(self.ws.k[i])
        self.member[i] = False

    def members(self) -> np.ndarray:
        return np.nonzero(self.member)[0]

    def size(self) -> int:
        return int(self.member.sum())

    def _raw_scores(self, nodes: np.ndarray, inside: bool) -> np.ndarray:
        """Vectorized membership_score for several nodes at once."""
        k = self.ws.k[nodes]
        w_in = self.w_to[nodes]
        if inside:
            k_comm = self.k_c - k
            w_internal = self.w_int - w_in
        else:
            k_comm = np.full(len(nodes), self.k_c)
            w_internal = np.full(len(nodes), self.w_int)
        s_ext = self.ws.two_m - k_comm
        k_out = k_comm - 2.0 * w_internal
        w = np.minimum(w_in, k_out)
        p = np.clip(k / np.maximum(s_ext, _EPS), _EPS, 1.0 - _EPS)
        with np.errstate(invalid="ignore"):
            r = betainc(np.maximum(w, _EPS), np.maximum(k_out - w, 0.0) + 1.0, p)
        # same precedence as membership_score: trivial > degenerate > closed
        r = np.where(k_out <= _EPS, 1.0, r)
        r = np.where(s_ext - k <= _EPS, 0.0, r)
        r = np.where((w_in <= _EPS) | (k <= _EPS), 1.0, r)
        return r

    def admission_phase(self, p_star: float) -> bool:
        border = np.nonzero((self.w_to > _EPS) & ~self.member)[0]
        if len(border) == 0:
            return False
        raw = self._raw_scores(border, inside=False)
        corrected = _correct_vec(raw, len(border))
        admit = border[corrected < p_star]
        for i in admit:
            self.add(int(i))
        return len(admit) > 0

    def expulsion_phase(self, p_star: float) -> bool:
        changed = False
        while True:
            members = self.members()
            if len(members) == 0:
                return changed
            raw = self._raw_scores(members, inside=True)
            corrected = _correct_vec(raw, len(members))
            worst = int(np.argmax(corrected))
            if corrected[worst] < p_star:
                return changed
            self.remove(int(members[worst]))
            changed = True

    def audit_score(self) -> float:
        members = self.members()
        if len(members) == 0:
            return 1.0
        if len(members) == 1:
            return 1.0  # single node: no internal edges, insignificant by convention
        raw = self._raw_scores(members, inside=True)
        return float(_correct_vec(raw, len(members)).max())


def _correct_vec(raw: np.ndarray, t: int) -> np.ndarray:
    if t <= 1:
        return raw.copy()
    out = np.empty_like(raw)
    full = raw >= 1.0
    out[full] = 1.0
    out[~full] = -np.expm1(t * np.log1p(-raw[~full]))
    return out


def _clean_one(ws: _Workspace, seed_members: Sequence[int], config: OverlapConfig) -> frozenset[int]:
    cluster = _Cluster(ws, seed_members)
    p_star = config.significance_threshold
    seen: set[frozenset[int]] = set()
    for _ in range(config.max_iterations):
        state = frozenset(int(i) for i in cluster.members())
        if state in seen:
            break
        seen.add(state)
        grew = cluster.admission_phase(p_star)
        shrank = cluster.expulsion_phase(p_star)
        if not grew and not shrank:
            break
    # leave the cluster expulsion-quiescent so every member passes the audit
    cluster.expulsion_phase(p_star)
    return frozenset(int(i) for i in cluster.members())


def detect_overlapping(graph: SocialGraph, config: OverlapConfig | None = None) -> Cover:
    """Seed with the modularity partition, then clean every cluster.

    Deterministic under ``config.seed``. ``n_trials`` is accepted for
    interface compatibility with resampling-based cleanups; the analytic
    scorer used here is exact, so extra trials would reproduce the same
    cover and none are run.
    """
    config = config or OverlapConfig()
    if not graph.edges:
        raise EdgelessGraphError("overlap detection needs at least one edge")
    seeds = louvain(graph, LouvainConfig(seed=config.seed))
    return cleanup_cover(graph, seeds, config)


def cleanup_cover(
    graph: SocialGraph,
    seeds: Cover | Partition,
    config: OverlapConfig | None = None,
) -> Cover:
    """Run the admission/expulsion cleanup from the given communities.

    Applying this to its own output changes nothing (fixed point), which is
    how covers are re-audited.
    """
    config = config or OverlapConfig()
    if not graph.edges:
        raise EdgelessGraphError("overlap cleanup needs at least one edge")
    csr = to_csr(graph)
    ws = _Workspace(csr)
    index = csr.index_of()
    ids = csr.ids

    cleaned: list[frozenset[int]] = []
    for members in seeds.communities:
        rows = [index[m] for m in sorted(members)]
        result = _clean_one(ws, rows, config)
        if result and result not in cleaned:
            cleaned.append(result)

    cleaned.sort(key=lambda c: (min(c), -len(c), sorted(c)))
    communities = tuple(
        frozenset(int(ids[i]) for i in community) for community in cleaned
    )
    scores = tuple(
        _Cluster(ws, sorted(community)).audit_score() for community in cleaned
    )
    return Cover(
        relation_kind=graph.relation_kind,
        communities=communities,
        scores=scores,
        threshold=config.significance_threshold,
    )


def community_significance(
    graph: SocialGraph,
    community: Iterable[int],
    config: OverlapConfig | None = None,
) -> float:
    """Worst (largest) corrected membership score over the community.

    1.0 for single-node communities by convention (no internal edges).
    Covers returned by the detector re-audit below the threshold because the
    cleanup only stops once every member passes this same check.
    """
    config = config or OverlapConfig()
    members = frozenset(community)
    if not members:
        raise ParameterError("community must be non-empty")
    if not members <= graph.nodes:
        raise ParameterError("community is not a subset of the graph's nodes")
    if len(members) == 1:
        return 1.0
    csr = to_csr(graph)
    ws = _Workspace(csr)
    index = csr.index_of()
    cluster = _Cluster(ws, [index[m] for m in sorted(members)])
    return cluster.audit_score()
