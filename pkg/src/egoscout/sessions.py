"""Per-session exploration state: visit history, profile distributions, weights.

A session is single-writer (one interactive user). The profile histogram of a
feature is simply the histogram of that feature's values over the visited
nodes (optionally limited to a sliding window of the most recent visits),
built on the same global binning used everywhere else so it can be compared
to local distributions directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import AttributedGraph
from .histograms import Binning, Histogram, histogram_over


@dataclass(frozen=True)
class BlendWeights:
    """Mixing weights for surprise vs interest in the blended score."""

    w_s: float = 0.5
    w_r: float = 0.5

    def __post_init__(self):
        if self.w_s < 0 or self.w_r < 0:
            raise ValueError("blend weights must be non-negative")
        if abs(self.w_s + self.w_r - 1.0) > 1e-9:
            raise ValueError("blend weights must sum to 1")


SNAPSHOT_VERSION = 1


class SessionProfile:
    """Visit sequence plus user-adjustable ranking weights for one session.

    ``warm_after`` is the number of visits after which the interest ranking
    activates; before that, ranking falls back to surprise ordering.
    """

    def __init__(
        self,
        session_id: str,
        graph: AttributedGraph,
        binnings: Sequence[Binning],
        window: int | None = None,
        lambdas: Sequence[float] | None = None,
        blend: BlendWeights | None = None,
        warm_after: int = 3,
    ):
        if len(binnings) != len(graph.schema):
            raise ValueError("one binning per schema feature required")
        if window is not None and window < 1:
            raise ValueError("window must be positive or None")
        self.session_id = session_id
        self.graph = graph
        self.binnings = list(binnings)
        self.window = window
        self.warm_after = warm_after
        self.visits: list[int] = []
        self.blend = blend or BlendWeights()
        if lambdas is None:
            self.lambdas = np.ones(len(binnings))
        else:
            self.lambdas = np.asarray(lambdas, dtype=np.float64)
            self._check_lambdas(self.lambdas)
        self._profile_cache: dict[int, Histogram] = {}

    @staticmethod
    def _check_lambdas(lam: np.ndarray) -> None:
        if lam.min() < 0:
            raise ValueError("feature weights must be non-negative")
        if lam.max() <= 0:
            raise ValueError("at least one feature weight must be positive")

    @property
    def visit_count(self) -> int:
        return len(self.visits)

    @property
    def warm(self) -> bool:
        return len(self.visits) >= self.warm_after

    def record_visit(self, node: int) -> None:
        """Append a visited node; duplicates are allowed and meaningful."""
        if not 0 <= node < self.graph.node_count:
            raise KeyError(f"unknown node {node}")
        self.visits.append(int(node))
        self._profile_cache.clear()

    def set_feature_weight(self, feature: int, weight: float) -> None:
        if weight < 0:
            raise ValueError("feature weight must be non-negative")
        updated = self.lambdas.copy()
        updated[feature] = weight
        self._check_lambdas(updated)
        self.lambdas = updated

    def set_lambdas(self, lambdas: Sequence[float]) -> None:
        lam = np.asarray(lambdas, dtype=np.float64)
        if len(lam) != len(self.binnings):
            raise ValueError("one weight per feature required")
        self._check_lambdas(lam)
        self.lambdas = lam

    def set_blend(self, w_s: float, w_r: float) -> None:
        self.blend = BlendWeights(w_s, w_r)

    def set_window(self, window: int | None) -> None:
        if window is not None and window < 1:
            raise ValueError("window must be positive or None")
        self.window = window
        self._profile_cache.clear()

    def _window_visits(self) -> list[int]:
        if self.window is None:
            return self.visits
        return self.visits[-self.window:]

    def histogram(self, feature: int) -> Histogram:
        """Profile distribution of one feature over the windowed visits."""
        if not self.visits:
            raise ValueError("profile is empty: no visits recorded")
        cached = self._profile_cache.get(feature)
        if cached is None:
            values = self.graph.feature_values(feature)[self._window_visits()]
            cached = histogram_over(values, self.binnings[feature])
            self._profile_cache[feature] = cached
        return cached

    def histograms(self) -> list[Histogram]:
        return [self.histogram(j) for j in range(len(self.binnings))]

    def summary(self) -> dict:
        """Profile histograms plus visit metadata; histograms are None until
        the first visit (the explicit empty marker)."""
        return {
            "session_id": self.session_id,
            "visit_count": self.visit_count,
            "window": self.window,
            "warm": self.warm,
            "empty": self.visit_count == 0,
            "histograms": self.histograms() if self.visits else None,
        }

    def to_snapshot(self) -> dict:
        return {
            "version": SNAPSHOT_VERSION,
            "session_id": self.session_id,
            "visits": [self.graph.ext_ids[i] for i in self.visits],
            "window": self.window,
            "lambda": {
                spec.name: float(w)
                for spec, w in zip(self.graph.schema, self.lambdas)
            },
            "blend": {"w_s": self.blend.w_s, "w_r": self.blend.w_r},
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_snapshot(), fh, indent=None, separators=(",", ":"))

    @classmethod
    def from_snapshot(
        cls,
        doc: dict,
        graph: AttributedGraph,
        binnings: Sequence[Binning],
        warm_after: int = 3,
    ) -> "SessionProfile":
        if doc.get("version") != SNAPSHOT_VERSION:
            raise ValueError(f"unsupported snapshot version {doc.get('version')!r}")
        lam = [doc["lambda"][spec.name] for spec in graph.schema]
        profile = cls(
            doc["session_id"],
            graph,
            binnings,
            window=doc["window"],
            lambdas=lam,
            blend=BlendWeights(doc["blend"]["w_s"], doc["blend"]["w_r"]),
            warm_after=warm_after,
        )
        for ext in doc["visits"]:
            profile.record_visit(graph.internal_id(ext))
        return profile

    @classmethod
    def load(
        cls, path, graph: AttributedGraph, binnings: Sequence[Binning], warm_after: int = 3
    ) -> "SessionProfile":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_snapshot(json.load(fh), graph, binnings, warm_after)
