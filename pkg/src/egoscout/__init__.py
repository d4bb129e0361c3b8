"""Adaptive local graph exploration.

Ranks the neighbors of a focus node by how surprising their neighborhood
feature distributions are against the global background, by how well they
match the nodes the user has already visited, and by a blend of both.
"""

from .graph import (
    AttributedGraph,
    FeatureKind,
    FeatureSpec,
    GraphLoadError,
    GraphSchema,
    derive_degree,
    derive_pagerank,
    load_graph,
    search_nodes,
)
from .histograms import (
    Binning,
    BinningMismatchError,
    Histogram,
    build_binnings,
    global_distribution,
    histogram_over,
    js_divergence,
    kl_divergence,
    local_distribution,
    mdl_binning,
)
from .ranking import (
    ColdProfileError,
    EmptyProfileError,
    IndexMismatchError,
    RankMode,
    RankResult,
    ScoredNeighbor,
    SurpriseIndex,
    UnknownNodeError,
    cold_start_rank,
    interest_scores,
    precompute_surprise,
    rank_neighbors,
    top_interesting,
    top_surprising,
)
from .sessions import BlendWeights, SessionProfile

__version__ = "0.1.0"

__all__ = [
    "AttributedGraph",
    "Binning",
    "BinningMismatchError",
    "BlendWeights",
    "ColdProfileError",
    "EmptyProfileError",
    "FeatureKind",
    "FeatureSpec",
    "GraphLoadError",
    "GraphSchema",
    "Histogram",
    "IndexMismatchError",
    "RankMode",
    "RankResult",
    "ScoredNeighbor",
    "SessionProfile",
    "SurpriseIndex",
    "UnknownNodeError",
    "build_binnings",
    "cold_start_rank",
    "derive_degree",
    "derive_pagerank",
    "global_distribution",
    "histogram_over",
    "interest_scores",
    "js_divergence",
    "kl_divergence",
    "load_graph",
    "local_distribution",
    "mdl_binning",
    "precompute_surprise",
    "rank_neighbors",
    "search_nodes",
    "top_interesting",
    "top_surprising",
]
