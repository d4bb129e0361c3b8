"""Histogram binning and divergence math.

One Binning per feature is computed from the global value set and shared by
every histogram of that feature (local, global, profile), so divergences
always compare distributions over identical support. Numerical features are
binned with a two-part minimum-description-length code solved exactly by
dynamic programming; categorical features get one bin per observed category.

All logs are base 2, so divergences are reported in bits and the
Jensen-Shannon divergence of two histograms lies in [0, 1].
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import AttributedGraph, FeatureKind

_EPS = np.finfo(np.float64).eps

# Running count of JS divergence evaluations, for cost instrumentation.
_js_evaluations = 0


def divergence_calls() -> int:
    return _js_evaluations


def reset_divergence_calls() -> None:
    global _js_evaluations
    _js_evaluations = 0


class BinningMismatchError(ValueError):
    """Raised when two histograms do not share a binning."""


@dataclass(frozen=True)
class Binning:
    """Bin layout for one feature.

    Numerical: ``edges`` are strictly increasing cut points spanning the
    global [min, max]; bin b covers [edges[b], edges[b+1]), the last bin
    closed. Categorical: one bin per category, in ``categories`` order.
    """

    feature: int
    kind: FeatureKind
    edges: tuple[float, ...] | None = None
    categories: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind is FeatureKind.NUMERICAL:
            if self.edges is None or len(self.edges) < 2:
                raise ValueError("numerical binning needs at least one bin")
            if any(a >= b for a, b in zip(self.edges, self.edges[1:])):
                raise ValueError("bin edges must be strictly increasing")
        else:
            if not self.categories:
                raise ValueError("categorical binning needs at least one category")

    @property
    def bin_count(self) -> int:
        if self.kind is FeatureKind.NUMERICAL:
            return len(self.edges) - 1
        return len(self.categories)

    def bin_indices(self, values) -> np.ndarray:
        """Map feature values to bin indices; out-of-range numericals clamp
        into the boundary bins."""
        if self.kind is FeatureKind.NUMERICAL:
            vals = np.asarray(values, dtype=np.float64)
            interior = np.asarray(self.edges[1:-1])
            return np.searchsorted(interior, vals, side="right")
        vals = np.asarray(values)
        if vals.dtype.kind in "iu":
            if vals.size and (vals.min() < 0 or vals.max() >= len(self.categories)):
                raise ValueError("category code out of range")
            return vals.astype(np.int64)
        lookup = {c: k for k, c in enumerate(self.categories)}
        try:
            return np.array([lookup[v] for v in vals.tolist()], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"unknown category {exc.args[0]!r}") from None

    def to_dict(self) -> dict:
        doc = {"feature": self.feature, "kind": self.kind.value}
        if self.kind is FeatureKind.NUMERICAL:
            doc["edges"] = list(self.edges)
        else:
            doc["categories"] = list(self.categories)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "Binning":
        kind = FeatureKind(doc["kind"])
        if kind is FeatureKind.NUMERICAL:
            return cls(doc["feature"], kind, edges=tuple(doc["edges"]))
        return cls(doc["feature"], kind, categories=tuple(doc["categories"]))

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Histogram:
    """Probability mass over one Binning; masses are >= 0 and sum to 1."""

    binning: Binning
    mass: np.ndarray

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=np.float64)
        object.__setattr__(self, "mass", mass)
        if len(mass) != self.binning.bin_count:
            raise ValueError("mass length must match bin count")
        if mass.size == 0 or mass.min() < 0:
            raise ValueError("masses must be non-negative")
        if abs(mass.sum() - 1.0) > 1e-9:
            raise ValueError("masses must sum to 1")


def _candidate_cuts(values: np.ndarray, max_candidates: int) -> np.ndarray:
    """Midpoints between consecutive distinct values, thinned to at most
    ``max_candidates`` by equi-depth subsampling over the data."""
    distinct = np.unique(values)
    mids = (distinct[:-1] + distinct[1:]) / 2.0
    if len(mids) <= max_candidates:
        return mids
    ranks = (np.arange(1, max_candidates + 1) * len(values)) // (max_candidates + 1)
    anchors = np.sort(values)[np.clip(ranks, 0, len(values) - 1)]
    idx = np.clip(np.searchsorted(distinct, anchors, side="right") - 1, 0, len(mids) - 1)
    return np.unique(mids[idx])


def binning_cost(
    values: np.ndarray, edges: Sequence[float], candidate_count: int
) -> float:
    """Two-part code length of a binning: data bits under the piecewise
    uniform density plus model bits for choosing the cuts.

    cost = -sum_b n_b log2(n_b / (N w_b)) + (|B|-1) log2(|C|) + log2(N)

    where w_b is the bin width normalized by the total range. Used by both
    the optimizer and the brute-force test oracle.
    """
    values = np.asarray(values, dtype=np.float64)
    edges = np.asarray(edges, dtype=np.float64)
    n_total = len(values)
    total_range = edges[-1] - edges[0]
    counts = np.bincount(
        np.searchsorted(edges[1:-1], values, side="right"), minlength=len(edges) - 1
    ).astype(np.float64)
    widths = np.diff(edges) / total_range
    nz = counts > 0
    data_bits = -(counts[nz] * np.log2(counts[nz] / (n_total * widths[nz]))).sum()
    model_bits = (len(edges) - 2) * np.log2(candidate_count) if candidate_count else 0.0
    return float(data_bits + model_bits + np.log2(n_total))


@dataclass(frozen=True)
class MdlBinningResult:
    binning: Binning
    cost: float


def mdl_binning(
    values,
    max_bins: int = 64,
    feature: int = 0,
    max_candidates: int = 256,
    candidates=None,
) -> MdlBinningResult:
    """Choose cut points minimizing the two-part code of :func:`binning_cost`.

    The search is exact over the candidate set (all midpoints between
    consecutive distinct values, equi-depth thinned to ``max_candidates``,
    unless an explicit ``candidates`` array is given), via dynamic
    programming on (bin count, rightmost cut). Ties break toward fewer
    bins. All-identical inputs get a single bin over a degenerate range
    widened by machine-epsilon padding.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("mdl_binning requires at least one value")
    if max_bins < 1:
        raise ValueError("max_bins must be >= 1")
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        pad = max(abs(lo), 1.0) * _EPS
        edges = (lo - pad, hi + pad)
        binning = Binning(feature, FeatureKind.NUMERICAL, edges=edges)
        return MdlBinningResult(binning, binning_cost(values, edges, 0))

    if candidates is not None:
        cuts = np.unique(np.asarray(candidates, dtype=np.float64))
        if len(cuts) and (cuts[0] <= lo or cuts[-1] >= hi):
            raise ValueError("candidate cuts must lie strictly inside (min, max)")
    else:
        cuts = _candidate_cuts(values, max_candidates)
    pos = np.concatenate(([lo], cuts, [hi]))
    m = len(cuts)
    n_total = len(values)
    total_range = hi - lo
    cut_bits = np.log2(m) if m else 0.0

    # prefix[i] = number of values strictly below pos[i], so the half-open
    # bin [pos[j], pos[i]) holds prefix[i] - prefix[j] values (matching the
    # searchsorted convention in binning_cost and Binning.bin_indices);
    # the last bin also absorbs values equal to hi.
    prefix = np.searchsorted(np.sort(values), pos, side="left").astype(np.float64)
    prefix[-1] = n_total

    counts = prefix[None, :] - prefix[:, None]
    widths = (pos[None, :] - pos[:, None]) / total_range
    with np.errstate(divide="ignore", invalid="ignore"):
        seg = -counts * np.log2(counts / (n_total * widths))
    seg[counts <= 0] = 0.0
    seg[widths <= 0] = np.inf  # j >= i: not a bin

    last = m + 1
    k_cap = min(max_bins, last)
    best_cost = np.inf
    best_edges = None
    # dp[i] = min data bits covering [pos[0], pos[i]) with exactly k bins
    dp = seg[0].copy()
    parents = []
    for k in range(1, k_cap + 1):
        if np.isfinite(dp[last]):
            total = dp[last] + (k - 1) * cut_bits + np.log2(n_total)
            if total < best_cost:
                best_cost = total
                best_edges = _backtrack(parents, pos, last)
        if k == k_cap:
            break
        stacked = dp[:, None] + seg
        choice = np.argmin(stacked, axis=0)
        parents.append(choice)
        dp = stacked[choice, np.arange(last + 1)]

    binning = Binning(feature, FeatureKind.NUMERICAL, edges=best_edges)
    return MdlBinningResult(binning, float(best_cost))


def _backtrack(parents, pos, last) -> tuple[float, ...]:
    idx = [last]
    for choice in reversed(parents):
        idx.append(int(choice[idx[-1]]))
    idx.append(0)
    return tuple(float(pos[i]) for i in reversed(idx))


def categorical_binning(categories: Sequence[str], feature: int = 0) -> Binning:
    return Binning(feature, FeatureKind.CATEGORICAL, categories=tuple(categories))


def build_binnings(
    g: AttributedGraph, max_bins: int = 64, max_candidates: int = 256
) -> list[Binning]:
    """One shared Binning per schema feature, computed from global values."""
    binnings = []
    for j, spec in enumerate(g.schema):
        col = g.columns[j]
        if spec.kind is FeatureKind.NUMERICAL:
            binnings.append(
                mdl_binning(col.data, max_bins, feature=j, max_candidates=max_candidates).binning
            )
        else:
            binnings.append(categorical_binning(col.categories, feature=j))
    return binnings


def histogram_over(values, binning: Binning) -> Histogram:
    """Normalized histogram of ``values`` under a fixed binning."""
    idx = binning.bin_indices(values)
    if idx.size == 0:
        raise ValueError("cannot build a histogram over zero values")
    counts = np.bincount(idx, minlength=binning.bin_count)
    return Histogram(binning, counts / idx.size)


def kl_divergence(p: Histogram, q: Histogram) -> float:
    """D(P || Q) in bits, with the 0 log 0 convention.

    Requires q > 0 wherever p > 0; inside the JS mixture that always holds,
    anywhere else a zero denominator is a caller error.
    """
    if p.binning != q.binning:
        raise BinningMismatchError("histograms use different binnings")
    pm, qm = p.mass, q.mass
    support = pm > 0
    if np.any(qm[support] == 0):
        raise ValueError("KL undefined: p > 0 where q = 0")
    return float((pm[support] * np.log2(pm[support] / qm[support])).sum())


def js_divergence(p: Histogram, g: Histogram) -> float:
    """Jensen-Shannon divergence in bits; symmetric, in [0, 1]."""
    if p.binning != g.binning:
        raise BinningMismatchError("histograms use different binnings")
    global _js_evaluations
    _js_evaluations += 1
    return float(_js_rows(p.mass[None, :], g.mass)[0])


_JS_CHUNK = 1 << 14


def js_divergence_rows(p_rows: np.ndarray, q_mass: np.ndarray) -> np.ndarray:
    """JS divergence of each row of ``p_rows`` against ``q_mass``.

    Vectorized form used on the ranking hot path; each row counts as one
    divergence evaluation. Large inputs are processed in cache-sized row
    chunks, which keeps the cost linear in the row count.
    """
    global _js_evaluations
    _js_evaluations += len(p_rows)
    if len(p_rows) <= _JS_CHUNK:
        return _js_rows(p_rows, q_mass)
    out = np.empty(len(p_rows))
    for start in range(0, len(p_rows), _JS_CHUNK):
        stop = min(start + _JS_CHUNK, len(p_rows))
        out[start:stop] = _js_rows(p_rows[start:stop], q_mass)
    return out


def _js_rows(p_rows: np.ndarray, q_mass: np.ndarray) -> np.ndarray:
    mix = 0.5 * (p_rows + q_mass[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        left = np.where(p_rows > 0, p_rows * np.log2(p_rows / mix), 0.0).sum(axis=1)
        right = np.where(
            q_mass[None, :] > 0, q_mass[None, :] * np.log2(q_mass[None, :] / mix), 0.0
        ).sum(axis=1)
    # Mathematically in [0, 1]; clamp the last-ulp float noise so the bound
    # holds exactly. Identical inputs produce exactly 0 before the clamp.
    return np.clip(0.5 * (left + right), 0.0, 1.0)


def local_distribution(
    g: AttributedGraph, node: int, feature: int, binning: Binning
) -> Histogram:
    """Histogram of a feature over the 1-hop neighbors of ``node``."""
    neigh = g.neighbors_of(node)
    return histogram_over(g.feature_values(feature)[neigh], binning)


def global_distribution(g: AttributedGraph, feature: int, binning: Binning) -> Histogram:
    """Histogram of a feature over every node in the graph."""
    return histogram_over(g.feature_values(feature), binning)


BINNING_FILE_VERSION = 1


def binnings_to_doc(binnings: Sequence[Binning], global_hists: Sequence[Histogram]) -> dict:
    """Versioned JSON document for the precompute cache: binning plus the
    global mass per feature, deterministic field order."""
    features = []
    for binning, hist in zip(binnings, global_hists):
        doc = binning.to_dict()
        doc["mass"] = hist.mass.tolist()
        features.append(doc)
    return {"version": BINNING_FILE_VERSION, "features": features}


def binnings_from_doc(doc: dict) -> tuple[list[Binning], list[Histogram]]:
    if doc.get("version") != BINNING_FILE_VERSION:
        raise ValueError(f"unsupported binning file version {doc.get('version')!r}")
    binnings, hists = [], []
    for entry in doc["features"]:
        binning = Binning.from_dict(entry)
        binnings.append(binning)
        hists.append(Histogram(binning, np.asarray(entry["mass"])))
    return binnings, hists
