"""Attributed graph loading, validation, and derived structural features.

The graph is undirected, unweighted, and immutable after load. Node ids are
dense integers assigned in node-file order; the original string ids are kept
in a side map. Zero-degree nodes and self-edges are removed at load time
because they contribute nothing to neighborhood ranking.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)


class GraphLoadError(ValueError):
    """Raised when node or edge input cannot be turned into a valid graph."""


class FeatureKind(str, Enum):
    NUMERICAL = "numerical"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: FeatureKind


class GraphSchema:
    """Ordered feature declarations; the order defines the feature index j."""

    def __init__(self, features: Sequence[FeatureSpec]):
        names = [f.name for f in features]
        if any(not n for n in names):
            raise ValueError("feature names must be non-empty")
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        self.features: tuple[FeatureSpec, ...] = tuple(features)
        self._index = {f.name: j for j, f in enumerate(self.features)}

    def __len__(self) -> int:
        return len(self.features)

    def __iter__(self):
        return iter(self.features)

    def index_of(self, name: str) -> int:
        return self._index[name]

    def extended(self, spec: FeatureSpec) -> "GraphSchema":
        return GraphSchema(self.features + (spec,))

    def to_dict(self) -> list[dict]:
        return [{"name": f.name, "kind": f.kind.value} for f in self.features]

    @classmethod
    def from_dict(cls, items: Iterable[dict]) -> "GraphSchema":
        return cls([FeatureSpec(d["name"], FeatureKind(d["kind"])) for d in items])

    @classmethod
    def parse(cls, text: str) -> "GraphSchema":
        """Parse an inline spec like ``"year:numerical,genre:categorical"``."""
        specs = []
        if text.strip():
            for part in text.split(","):
                name, _, kind = part.partition(":")
                if not kind:
                    raise ValueError(f"schema entry {part!r} must be name:kind")
                specs.append(FeatureSpec(name.strip(), FeatureKind(kind.strip())))
        return cls(specs)


@dataclass
class FeatureColumn:
    """Per-node values of one feature.

    Numerical columns hold float64 values; categorical columns hold int32
    category codes plus the ordered category list (sorted lexicographically
    so loads are deterministic).
    """

    kind: FeatureKind
    data: np.ndarray
    categories: tuple[str, ...] | None = None

    def display_value(self, node: int):
        if self.kind is FeatureKind.NUMERICAL:
            return float(self.data[node])
        return self.categories[int(self.data[node])]


@dataclass
class LoadReport:
    self_edges_dropped: int = 0
    duplicate_edges_dropped: int = 0
    zero_degree_dropped: int = 0
    nodes_loaded: int = 0
    edges_loaded: int = 0


class AttributedGraph:
    """Immutable undirected graph with per-node feature values.

    Adjacency is CSR-shaped: ``neighbors[indptr[i]:indptr[i+1]]`` are the
    neighbors of node ``i``, sorted ascending. Safe to share across threads.
    """

    def __init__(
        self,
        indptr: np.ndarray,
        neighbors: np.ndarray,
        ext_ids: Sequence[str],
        labels: Sequence[str],
        schema: GraphSchema,
        columns: Sequence[FeatureColumn],
        report: LoadReport | None = None,
    ):
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.neighbors = np.asarray(neighbors, dtype=np.int64)
        self.ext_ids = tuple(ext_ids)
        self.labels = tuple(labels)
        self.schema = schema
        self.columns = list(columns)
        self.report = report or LoadReport()
        self.node_count = len(self.ext_ids)
        self.degrees = np.diff(self.indptr)
        self._ext_index = {e: i for i, e in enumerate(self.ext_ids)}
        self._validate()

    def _validate(self) -> None:
        if len(self.indptr) != self.node_count + 1:
            raise ValueError("indptr length mismatch")
        if len(self.columns) != len(self.schema):
            raise ValueError("one column per schema feature required")
        for col in self.columns:
            if len(col.data) != self.node_count:
                raise ValueError("feature column length mismatch")
        if self.node_count and self.degrees.min() < 1:
            raise ValueError("zero-degree node survived load")

    @property
    def edge_count(self) -> int:
        return len(self.neighbors) // 2

    def neighbors_of(self, node: int) -> np.ndarray:
        return self.neighbors[self.indptr[node]:self.indptr[node + 1]]

    def degree(self, node: int) -> int:
        return int(self.degrees[node])

    def internal_id(self, ext_id: str) -> int:
        try:
            return self._ext_index[ext_id]
        except KeyError:
            raise KeyError(f"unknown node id {ext_id!r}") from None

    def has_node(self, ext_id: str) -> bool:
        return ext_id in self._ext_index

    def feature_values(self, j: int) -> np.ndarray:
        return self.columns[j].data

    def with_numerical_feature(self, name: str, values: np.ndarray) -> "AttributedGraph":
        """Return a new graph with one extra numerical feature appended."""
        values = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise ValueError("derived feature values must be finite")
        return AttributedGraph(
            self.indptr,
            self.neighbors,
            self.ext_ids,
            self.labels,
            self.schema.extended(FeatureSpec(name, FeatureKind.NUMERICAL)),
            self.columns + [FeatureColumn(FeatureKind.NUMERICAL, values)],
            self.report,
        )

    def canonical_bytes(self) -> bytes:
        """Deterministic serialization used for fingerprints and load tests."""
        doc = {
            "schema": self.schema.to_dict(),
            "ids": list(self.ext_ids),
            "labels": list(self.labels),
            "indptr": self.indptr.tolist(),
            "neighbors": self.neighbors.tolist(),
            "values": [
                {
                    "kind": col.kind.value,
                    "data": col.data.tolist(),
                    "categories": list(col.categories) if col.categories else None,
                }
                for col in self.columns
            ],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")

    def fingerprint(self) -> str:
        return hashlib.sha256(self.canonical_bytes()).hexdigest()


def _open_source(source) -> IO[str]:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, io.TextIOBase):
        return source
    raise TypeError(f"unsupported source {type(source)!r}")


def _detect_delimiter(header: str) -> str:
    return "\t" if "\t" in header else ","


def _read_table(source, expected_first: str) -> tuple[list[str], list[tuple[int, list[str]]]]:
    """Read a delimited file; returns (header, [(line_number, row), ...])."""
    fh = _open_source(source)
    close = isinstance(source, (str, Path))
    try:
        first = fh.readline()
        if not first:
            raise GraphLoadError("empty input file")
        delim = _detect_delimiter(first)
        header = next(csv.reader([first], delimiter=delim))
        header = [h.strip() for h in header]
        if not header or header[0] != expected_first:
            raise GraphLoadError(
                f"header must start with {expected_first!r}, got {header[:1]}"
            )
        rows = []
        reader = csv.reader(fh, delimiter=delim)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise GraphLoadError(
                    f"line {lineno}: expected {len(header)} columns, got {len(row)}"
                )
            rows.append((lineno, row))
        return header, rows
    finally:
        if close:
            fh.close()


def load_graph(edge_source, node_source, schema: GraphSchema) -> AttributedGraph:
    """Load an attributed graph from node and edge tables.

    Node file header: ``id,label,<feature names...>`` (comma or tab
    delimited, auto-detected). Edge file header: ``src,dst``. Self-edges and
    duplicate edges are dropped, zero-degree nodes removed; counts land in
    the returned graph's ``report``.
    """
    header, node_rows = _read_table(node_source, "id")
    if len(header) < 2 or header[1] != "label":
        raise GraphLoadError("node header must be id,label,<features...>")
    file_features = header[2:]
    for spec in schema:
        if spec.name not in file_features:
            raise GraphLoadError(f"node file lacks feature column {spec.name!r}")
    col_pos = {name: 2 + k for k, name in enumerate(file_features)}

    ext_ids: list[str] = []
    labels: list[str] = []
    raw_values: list[list[str]] = [[] for _ in schema]
    seen = set()
    for lineno, row in node_rows:
        ext = row[0].strip()
        if not ext:
            raise GraphLoadError(f"line {lineno}: empty node id")
        if ext in seen:
            raise GraphLoadError(f"line {lineno}: duplicate node id {ext!r}")
        seen.add(ext)
        ext_ids.append(ext)
        labels.append(row[1])
        for j, spec in enumerate(schema):
            cell = row[col_pos[spec.name]].strip()
            if cell == "":
                raise GraphLoadError(
                    f"line {lineno}: missing value for feature {spec.name!r}"
                )
            raw_values[j].append(cell)

    columns = []
    for j, spec in enumerate(schema):
        if spec.kind is FeatureKind.NUMERICAL:
            data = np.empty(len(ext_ids), dtype=np.float64)
            for i, cell in enumerate(raw_values[j]):
                try:
                    v = float(cell)
                except ValueError:
                    raise GraphLoadError(
                        f"feature {spec.name!r}: non-numeric value {cell!r} "
                        f"for node {ext_ids[i]!r}"
                    ) from None
                if not math.isfinite(v):
                    raise GraphLoadError(
                        f"feature {spec.name!r}: non-finite value for node {ext_ids[i]!r}"
                    )
                data[i] = v
            columns.append(FeatureColumn(FeatureKind.NUMERICAL, data))
        else:
            cats = tuple(sorted(set(raw_values[j])))
            code = {c: k for k, c in enumerate(cats)}
            data = np.array([code[c] for c in raw_values[j]], dtype=np.int32)
            columns.append(FeatureColumn(FeatureKind.CATEGORICAL, data, cats))

    index = {e: i for i, e in enumerate(ext_ids)}
    report = LoadReport()
    _, edge_rows = _read_table(edge_source, "src")
    pairs = set()
    for lineno, row in edge_rows:
        src, dst = row[0].strip(), row[1].strip()
        if src not in index:
            raise GraphLoadError(f"line {lineno}: unknown node id {src!r} in edge")
        if dst not in index:
            raise GraphLoadError(f"line {lineno}: unknown node id {dst!r} in edge")
        a, b = index[src], index[dst]
        if a == b:
            report.self_edges_dropped += 1
            continue
        key = (a, b) if a < b else (b, a)
        if key in pairs:
            report.duplicate_edges_dropped += 1
            continue
        pairs.add(key)

    # Drop nodes that end up with no edges, then reindex densely in file order.
    touched = np.zeros(len(ext_ids), dtype=bool)
    for a, b in pairs:
        touched[a] = touched[b] = True
    report.zero_degree_dropped = int((~touched).sum())
    keep = np.flatnonzero(touched)
    remap = -np.ones(len(ext_ids), dtype=np.int64)
    remap[keep] = np.arange(len(keep))

    n = len(keep)
    if n == 0:
        raise GraphLoadError("graph has no edges")
    degrees = np.zeros(n, dtype=np.int64)
    for a, b in pairs:
        degrees[remap[a]] += 1
        degrees[remap[b]] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(degrees, out=indptr[1:])
    neighbors = np.empty(indptr[-1], dtype=np.int64)
    cursor = indptr[:-1].copy()
    for a, b in sorted((remap[a], remap[b]) for a, b in pairs):
        neighbors[cursor[a]] = b
        cursor[a] += 1
        neighbors[cursor[b]] = a
        cursor[b] += 1
    # Rows come out sorted for the lower endpoint only; sort each row.
    for i in range(n):
        neighbors[indptr[i]:indptr[i + 1]].sort()

    report.nodes_loaded = n
    report.edges_loaded = len(pairs)
    if report.self_edges_dropped:
        logger.warning("dropped %d self-edges", report.self_edges_dropped)
    if report.zero_degree_dropped:
        logger.warning("dropped %d zero-degree nodes", report.zero_degree_dropped)

    kept_columns = [
        FeatureColumn(c.kind, c.data[keep], c.categories) for c in columns
    ]
    return AttributedGraph(
        indptr,
        neighbors,
        [ext_ids[i] for i in keep],
        [labels[i] for i in keep],
        schema,
        kept_columns,
        report,
    )


def graph_from_edges(
    n: int,
    edges: Iterable[tuple[int, int]],
    schema: GraphSchema,
    columns: Sequence[FeatureColumn],
    ext_ids: Sequence[str] | None = None,
    labels: Sequence[str] | None = None,
) -> AttributedGraph:
    """Build a graph directly from integer edge pairs (test and bench helper).

    Applies the same cleanup as :func:`load_graph`: self-edges and duplicates
    dropped, zero-degree nodes rejected (callers supply only touched nodes).
    """
    pairs = set()
    for a, b in edges:
        if a == b:
            continue
        pairs.add((a, b) if a < b else (b, a))
    degrees = np.zeros(n, dtype=np.int64)
    for a, b in pairs:
        degrees[a] += 1
        degrees[b] += 1
    if n and degrees.min() < 1:
        raise ValueError("graph_from_edges requires every node to have an edge")
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(degrees, out=indptr[1:])
    neighbors = np.empty(indptr[-1], dtype=np.int64)
    cursor = indptr[:-1].copy()
    for a, b in pairs:
        neighbors[cursor[a]] = b
        cursor[a] += 1
        neighbors[cursor[b]] = a
        cursor[b] += 1
    for i in range(n):
        neighbors[indptr[i]:indptr[i + 1]].sort()
    ids = ext_ids if ext_ids is not None else [str(i) for i in range(n)]
    labs = labels if labels is not None else list(ids)
    return AttributedGraph(indptr, neighbors, ids, labs, schema, columns)


def derive_degree(g: AttributedGraph) -> np.ndarray:
    """Node degree as a numerical feature value per node."""
    return g.degrees.astype(np.float64)


@dataclass
class PageRankResult:
    scores: np.ndarray
    converged: bool
    iterations: int


def derive_pagerank(
    g: AttributedGraph,
    damping: float = 0.85,
    tol: float = 1e-10,
    max_iters: int = 100,
) -> PageRankResult:
    """PageRank by power iteration, treating each undirected edge as two arcs.

    Stops when the L1 change drops below ``tol`` or after ``max_iters``
    sweeps; the result flags which. Scores sum to 1 (no dangling nodes since
    zero-degree nodes never survive load).
    """
    if g.node_count == 0:
        raise ValueError("pagerank requires a non-empty graph")
    n = g.node_count
    p = np.full(n, 1.0 / n)
    teleport = (1.0 - damping) / n
    converged = False
    iterations = 0
    for iterations in range(1, max_iters + 1):
        contrib = p / g.degrees
        spread = np.add.reduceat(contrib[g.neighbors], g.indptr[:-1])
        new_p = teleport + damping * spread
        delta = np.abs(new_p - p).sum()
        p = new_p
        if delta < tol:
            converged = True
            break
    if not converged:
        logger.warning("pagerank hit max_iters=%d without converging", max_iters)
    return PageRankResult(p, converged, iterations)


def search_nodes(g: AttributedGraph, query: str, limit: int) -> list[int]:
    """Case-insensitive substring search over labels.

    Results ordered by (match position, degree descending, node id); an
    empty query matches every node at position 0.
    """
    q = query.lower()
    hits = []
    for i, label in enumerate(g.labels):
        pos = label.lower().find(q)
        if pos >= 0:
            hits.append((pos, -g.degrees[i], i))
    hits.sort()
    return [i for _, _, i in hits[:limit]]
