"""Neighbor ranking by surprise, subjective interest, and their blend.

Surprise of a node is the divergence of its neighborhood feature
distributions from the global ones; it depends only on the graph, so it is
precomputed once into a SurpriseIndex. Interest is the divergence of those
same neighborhood distributions from the session profile, so it must be
computed per request; with local distributions cached in the index that
costs exactly one JS divergence per candidate per feature.

Ranking a focus node considers all its neighbors, or only the
``candidate_cap`` highest-degree neighbors for very high degree nodes so
latency stays interactive. Ties break deterministically: by the primary
score, then (cold start only) degree descending, then node id ascending.
"""

from __future__ import annotations

import json
from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .graph import AttributedGraph, FeatureKind, GraphSchema
from .histograms import (
    Binning,
    BinningMismatchError,
    Histogram,
    js_divergence_rows,
)

DEFAULT_CANDIDATE_CAP = 1000
INDEX_FILE_VERSION = 1

_PRECOMPUTE_CHUNK = 1 << 16
_SCORE_CHUNK = 1 << 14


class UnknownNodeError(KeyError):
    """Focus or visit node not present in the graph."""


class EmptyProfileError(ValueError):
    """Interest ranking requested with no visits recorded."""


class ColdProfileError(ValueError):
    """Interest ranking requested before the profile is warm."""


class IndexMismatchError(ValueError):
    """SurpriseIndex does not match the supplied graph or binnings."""


class RankMode(str, Enum):
    SURPRISE = "surprise"
    INTEREST = "interest"
    COMBINED = "combined"


@dataclass(frozen=True)
class ScoredNeighbor:
    """One ranked candidate with per-feature score breakdowns.

    ``interest`` and ``blended`` are None when the ranking ran in surprise
    or cold-start mode (no usable profile).
    """

    node: int
    degree: int
    surprise: float
    interest: float | None
    blended: float | None
    feature_surprise: np.ndarray
    feature_interest: np.ndarray | None
    feature_blended: np.ndarray | None


@dataclass(frozen=True)
class RankResult:
    mode_used: RankMode
    cold_start: bool
    neighbors: list[ScoredNeighbor]


class _LruLocalCache:
    """Memory-capped (node, feature) -> bin-count cache for graphs too large
    to materialize every local histogram."""

    def __init__(self, graph: AttributedGraph, binnings: Sequence[Binning], maxsize: int):
        self.graph = graph
        self.bin_of = [b.bin_indices(graph.feature_values(j)) for j, b in enumerate(binnings)]
        self.bin_counts = [b.bin_count for b in binnings]
        self.maxsize = maxsize
        self._cache: OrderedDict[tuple[int, int], np.ndarray] = OrderedDict()

    def counts(self, node: int, feature: int) -> np.ndarray:
        key = (node, feature)
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        neigh = self.graph.neighbors_of(node)
        row = np.bincount(self.bin_of[feature][neigh], minlength=self.bin_counts[feature])
        self._cache[key] = row
        if len(self._cache) > self.maxsize:
            self._cache.popitem(last=False)
        return row


class SurpriseIndex:
    """Precomputed per-node surprise plus cached local distributions.

    ``feature_surprise[i, j]`` is the JS divergence of node i's neighborhood
    distribution from the global distribution of feature j, always in
    [0, 1]. ``node_surprise`` aggregates with the build-time feature weights
    recorded in the header.
    """

    def __init__(
        self,
        graph_fingerprint: str,
        schema: GraphSchema,
        lambdas: np.ndarray,
        binning_fingerprints: Sequence[str],
        feature_surprise: np.ndarray,
        node_surprise: np.ndarray,
        degrees: np.ndarray,
        local_counts: list[sparse.csr_matrix] | None,
        lru_cache: _LruLocalCache | None = None,
        derived: list[dict] | None = None,
    ):
        self.graph_fingerprint = graph_fingerprint
        self.schema = schema
        self.lambdas = np.asarray(lambdas, dtype=np.float64)
        self.binning_fingerprints = list(binning_fingerprints)
        self.feature_surprise = feature_surprise
        self.node_surprise = node_surprise
        self.degrees = degrees
        self.local_counts = local_counts
        self._lru = lru_cache
        self.derived = derived or []

    @property
    def node_count(self) -> int:
        return len(self.node_surprise)

    @property
    def feature_count(self) -> int:
        return self.feature_surprise.shape[1]

    def local_mass_rows(self, feature: int, nodes: np.ndarray) -> np.ndarray:
        """Dense (len(nodes), bins) matrix of local distributions."""
        if self.local_counts is not None:
            rows = self.local_counts[feature][nodes].toarray()
        elif self._lru is not None:
            rows = np.stack([self._lru.counts(int(n), feature) for n in nodes])
        else:
            raise IndexMismatchError("index has no local distributions attached")
        return rows / self.degrees[nodes, None]

    def local_histogram(self, node: int, feature: int, binning: Binning) -> Histogram:
        mass = self.local_mass_rows(feature, np.asarray([node]))[0]
        return Histogram(binning, mass)

    def aggregate_surprise(self, nodes: np.ndarray, lambdas: np.ndarray | None = None) -> np.ndarray:
        if lambdas is None:
            return self.node_surprise[nodes]
        return self.feature_surprise[nodes] @ np.asarray(lambdas, dtype=np.float64)

    def validate_graph(self, g: AttributedGraph) -> None:
        if g.fingerprint() != self.graph_fingerprint:
            raise IndexMismatchError("index was built for a different graph")

    def validate_binnings(self, binnings: Sequence[Binning]) -> None:
        fps = [b.fingerprint() for b in binnings]
        if fps != self.binning_fingerprints:
            raise IndexMismatchError("index was built with different binnings")

    def to_doc(self) -> dict:
        doc = {
            "version": INDEX_FILE_VERSION,
            "graph_fingerprint": self.graph_fingerprint,
            "schema": self.schema.to_dict(),
            "lambda": self.lambdas.tolist(),
            "binning_fingerprints": self.binning_fingerprints,
            "derived": self.derived,
            "degrees": self.degrees.tolist(),
            "feature_surprise": self.feature_surprise.tolist(),
            "node_surprise": self.node_surprise.tolist(),
        }
        if self.local_counts is not None:
            doc["local_counts"] = [
                {
                    "indptr": m.indptr.tolist(),
                    "indices": m.indices.tolist(),
                    "data": m.data.tolist(),
                    "bins": m.shape[1],
                }
                for m in self.local_counts
            ]
        else:
            doc["local_counts"] = None
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "SurpriseIndex":
        if doc.get("version") != INDEX_FILE_VERSION:
            raise ValueError(f"unsupported index file version {doc.get('version')!r}")
        locals_doc = doc["local_counts"]
        local_counts = None
        n = len(doc["node_surprise"])
        if locals_doc is not None:
            local_counts = [
                sparse.csr_matrix(
                    (
                        np.asarray(m["data"], dtype=np.int64),
                        np.asarray(m["indices"], dtype=np.int64),
                        np.asarray(m["indptr"], dtype=np.int64),
                    ),
                    shape=(n, m["bins"]),
                )
                for m in locals_doc
            ]
        return cls(
            doc["graph_fingerprint"],
            GraphSchema.from_dict(doc["schema"]),
            np.asarray(doc["lambda"], dtype=np.float64),
            doc["binning_fingerprints"],
            np.asarray(doc["feature_surprise"], dtype=np.float64),
            np.asarray(doc["node_surprise"], dtype=np.float64),
            np.asarray(doc["degrees"], dtype=np.int64),
            local_counts,
            derived=doc["derived"],
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_doc(), fh, separators=(",", ":"))

    @classmethod
    def load(cls, path) -> "SurpriseIndex":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_doc(json.load(fh))


def _check_binnings_cover(g: AttributedGraph, binnings: Sequence[Binning]) -> None:
    if len(binnings) != len(g.schema):
        raise BinningMismatchError("one binning per schema feature required")
    for j, (spec, binning) in enumerate(zip(g.schema, binnings)):
        if binning.kind != spec.kind:
            raise BinningMismatchError(f"feature {spec.name!r}: kind mismatch")
        col = g.columns[j]
        if spec.kind is FeatureKind.NUMERICAL:
            if binning.edges[0] > col.data.min() or binning.edges[-1] < col.data.max():
                raise BinningMismatchError(
                    f"feature {spec.name!r}: binning does not cover global range"
                )
        elif binning.categories != col.categories:
            raise BinningMismatchError(
                f"feature {spec.name!r}: categories differ from graph values"
            )


def _feature_surprise_column(
    g: AttributedGraph, binning: Binning, feature: int, rows: np.ndarray
) -> tuple[np.ndarray, sparse.csr_matrix]:
    """Surprise of every node for one feature, plus its local bin counts."""
    n = g.node_count
    bin_of = binning.bin_indices(g.feature_values(feature))
    global_mass = np.bincount(bin_of, minlength=binning.bin_count) / n
    counts = sparse.coo_matrix(
        (np.ones(len(rows), dtype=np.int64), (rows, bin_of[g.neighbors])),
        shape=(n, binning.bin_count),
    ).tocsr()
    column = np.empty(n)
    for start in range(0, n, _PRECOMPUTE_CHUNK):
        stop = min(start + _PRECOMPUTE_CHUNK, n)
        mass = counts[start:stop].toarray() / g.degrees[start:stop, None]
        column[start:stop] = js_divergence_rows(mass, global_mass)
    return column, counts


def precompute_surprise(
    g: AttributedGraph,
    binnings: Sequence[Binning],
    weights: Sequence[float] | None = None,
    materialize_locals: bool = True,
    lru_size: int = 1 << 20,
    derived: list[dict] | None = None,
    parallel: bool = False,
) -> SurpriseIndex:
    """Compute every node's per-feature surprise against the global
    distributions and cache the local distributions for ranking.

    With ``materialize_locals`` the local bin counts are kept as one sparse
    matrix per feature (memory proportional to edge count); otherwise an LRU
    cache of at most ``lru_size`` (node, feature) entries recomputes rows on
    demand. ``parallel`` fans the per-feature work out to a thread pool;
    features are independent, so the result does not depend on scheduling.
    """
    _check_binnings_cover(g, binnings)
    if weights is None:
        lambdas = np.ones(len(binnings))
    else:
        lambdas = np.asarray(weights, dtype=np.float64)
        if len(lambdas) != len(binnings):
            raise ValueError("one weight per feature required")

    n = g.node_count
    rows = np.repeat(np.arange(n, dtype=np.int64), g.degrees)
    feature_surprise = np.empty((n, len(binnings)))
    per_feature_counts: list[sparse.csr_matrix | None] = [None] * len(binnings)
    if parallel and len(binnings) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor() as pool:
            results = pool.map(
                lambda jb: _feature_surprise_column(g, jb[1], jb[0], rows),
                enumerate(binnings),
            )
            for j, (column, counts) in enumerate(results):
                feature_surprise[:, j] = column
                per_feature_counts[j] = counts
    else:
        for j, binning in enumerate(binnings):
            column, counts = _feature_surprise_column(g, binning, j, rows)
            feature_surprise[:, j] = column
            per_feature_counts[j] = counts
    local_counts = list(per_feature_counts) if materialize_locals else None

    node_surprise = feature_surprise @ lambdas
    lru = None
    if not materialize_locals:
        lru = _LruLocalCache(g, binnings, lru_size)
    return SurpriseIndex(
        g.fingerprint(),
        g.schema,
        lambdas,
        [b.fingerprint() for b in binnings],
        feature_surprise,
        node_surprise,
        g.degrees.copy(),
        local_counts,
        lru_cache=lru,
        derived=derived,
    )


def candidate_set(
    g: AttributedGraph,
    focus: int,
    cap: int | None = DEFAULT_CANDIDATE_CAP,
    exclude: Iterable[int] = (),
) -> np.ndarray:
    """Neighbors of the focus eligible for ranking, in ascending node id.

    Already-displayed nodes are removed first; if more than ``cap``
    candidates remain, only the ``cap`` highest-degree ones are kept (ties
    by node id ascending).
    """
    if not 0 <= focus < g.node_count:
        raise UnknownNodeError(focus)
    cand = g.neighbors_of(focus)
    exclude = np.asarray(list(exclude), dtype=np.int64)
    if exclude.size:
        cand = cand[~np.isin(cand, exclude)]
    if cap is not None and len(cand) > cap:
        by_degree = np.lexsort((cand, -g.degrees[cand]))[:cap]
        cand = np.sort(cand[by_degree])
    return cand


def interest_scores(
    candidates: np.ndarray,
    profile,
    index: SurpriseIndex,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-candidate divergence from the session profile.

    Returns ``(per_feature, aggregate)`` where lower means a better match
    to the user's demonstrated taste. One JS evaluation per candidate per
    feature.
    """
    if profile is None or profile.visit_count == 0:
        raise EmptyProfileError("interest scores need at least one visited node")
    candidates = np.asarray(candidates, dtype=np.int64)
    per_feature = np.empty((len(candidates), index.feature_count))
    # Candidate blocks keep the dense local-mass slices cache-sized, so the
    # cost stays linear in the candidate count.
    for start in range(0, len(candidates), _SCORE_CHUNK):
        stop = min(start + _SCORE_CHUNK, len(candidates))
        block = candidates[start:stop]
        for j in range(index.feature_count):
            u = profile.histogram(j)
            local = index.local_mass_rows(j, block)
            per_feature[start:stop, j] = js_divergence_rows(local, u.mass)
    return per_feature, per_feature @ profile.lambdas


def _build_results(
    g: AttributedGraph,
    order: np.ndarray,
    cand: np.ndarray,
    s_feat: np.ndarray,
    s_agg: np.ndarray,
    r_feat: np.ndarray | None = None,
    r_agg: np.ndarray | None = None,
    t_feat: np.ndarray | None = None,
    t_agg: np.ndarray | None = None,
) -> list[ScoredNeighbor]:
    out = []
    for i in order:
        out.append(
            ScoredNeighbor(
                node=int(cand[i]),
                degree=int(g.degrees[cand[i]]),
                surprise=float(s_agg[i]),
                interest=None if r_agg is None else float(r_agg[i]),
                blended=None if t_agg is None else float(t_agg[i]),
                feature_surprise=s_feat[i].copy(),
                feature_interest=None if r_feat is None else r_feat[i].copy(),
                feature_blended=None if t_feat is None else t_feat[i].copy(),
            )
        )
    return out


def top_surprising(
    g: AttributedGraph,
    index: SurpriseIndex,
    focus: int,
    k: int,
    exclude: Iterable[int] = (),
    cap: int | None = DEFAULT_CANDIDATE_CAP,
    lambdas: np.ndarray | None = None,
) -> list[ScoredNeighbor]:
    """Top-k candidates by aggregate surprise, ties by node id ascending."""
    cand = candidate_set(g, focus, cap, exclude)
    s_feat = index.feature_surprise[cand]
    s_agg = index.aggregate_surprise(cand, lambdas)
    order = np.lexsort((cand, -s_agg))[:k]
    return _build_results(g, order, cand, s_feat, s_agg)


def top_interesting(
    g: AttributedGraph,
    index: SurpriseIndex,
    profile,
    focus: int,
    k: int,
    exclude: Iterable[int] = (),
    cap: int | None = DEFAULT_CANDIDATE_CAP,
) -> list[ScoredNeighbor]:
    """Top-k candidates by smallest divergence from the profile."""
    cand = candidate_set(g, focus, cap, exclude)
    r_feat, r_agg = interest_scores(cand, profile, index)
    s_feat = index.feature_surprise[cand]
    s_agg = index.aggregate_surprise(cand, profile.lambdas)
    order = np.lexsort((cand, r_agg))[:k]
    return _build_results(g, order, cand, s_feat, s_agg, r_feat, r_agg)


def cold_start_rank(
    g: AttributedGraph,
    index: SurpriseIndex,
    focus: int,
    k: int,
    exclude: Iterable[int] = (),
    cap: int | None = DEFAULT_CANDIDATE_CAP,
    lambdas: np.ndarray | None = None,
) -> list[ScoredNeighbor]:
    """Profile-free ordering: surprising first, important (high degree) as
    tiebreak, then node id. Interest is reported as absent."""
    cand = candidate_set(g, focus, cap, exclude)
    s_feat = index.feature_surprise[cand]
    s_agg = index.aggregate_surprise(cand, lambdas)
    order = np.lexsort((cand, -g.degrees[cand], -s_agg))[:k]
    return _build_results(g, order, cand, s_feat, s_agg)


def rank_neighbors(
    g: AttributedGraph,
    index: SurpriseIndex,
    profile,
    focus: int,
    k: int,
    mode: RankMode = RankMode.COMBINED,
    exclude: Iterable[int] = (),
    cap: int | None = DEFAULT_CANDIDATE_CAP,
) -> RankResult:
    """Rank the focus node's neighbors in the requested mode.

    Combined mode blends per-feature surprise and interest,
    t_j = w_s * s_j + w_r * (1 - r_j), aggregated with the session's
    feature weights; it falls back to the cold-start ordering until the
    profile is warm. Interest mode on a cold profile is an error.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if mode is RankMode.SURPRISE:
        lambdas = profile.lambdas if profile is not None else None
        return RankResult(
            RankMode.SURPRISE,
            False,
            top_surprising(g, index, focus, k, exclude, cap, lambdas),
        )

    warm = profile is not None and profile.warm
    if mode is RankMode.INTEREST:
        if profile is None or profile.visit_count == 0:
            raise EmptyProfileError("interest mode needs a profile with visits")
        if not warm:
            raise ColdProfileError(
                f"interest mode needs at least {profile.warm_after} visits"
            )
        return RankResult(
            RankMode.INTEREST,
            False,
            top_interesting(g, index, profile, focus, k, exclude, cap),
        )

    if not warm:
        lambdas = profile.lambdas if profile is not None else None
        return RankResult(
            RankMode.SURPRISE,
            True,
            cold_start_rank(g, index, focus, k, exclude, cap, lambdas),
        )

    cand = candidate_set(g, focus, cap, exclude)
    s_feat = index.feature_surprise[cand]
    r_feat, r_agg = interest_scores(cand, profile, index)
    w = profile.blend
    t_feat = w.w_s * s_feat + w.w_r * (1.0 - r_feat)
    t_agg = t_feat @ profile.lambdas
    s_agg = s_feat @ profile.lambdas
    order = np.lexsort((cand, -t_agg))[:k]
    return RankResult(
        RankMode.COMBINED,
        False,
        _build_results(g, order, cand, s_feat, s_agg, r_feat, r_agg, t_feat, t_agg),
    )
