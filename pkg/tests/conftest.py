import io

import numpy as np
import pytest

from egoscout.graph import (
    AttributedGraph,
    FeatureColumn,
    FeatureKind,
    FeatureSpec,
    GraphSchema,
    graph_from_edges,
    load_graph,
)
from egoscout.histograms import build_binnings


def make_numeric_graph(edges, values_by_feature, labels=None) -> AttributedGraph:
    """In-memory graph with numerical features given as per-feature lists."""
    n = len(values_by_feature[0])
    schema = GraphSchema(
        [FeatureSpec(f"f{j}", FeatureKind.NUMERICAL) for j in range(len(values_by_feature))]
    )
    columns = [
        FeatureColumn(FeatureKind.NUMERICAL, np.asarray(vals, dtype=np.float64))
        for vals in values_by_feature
    ]
    return graph_from_edges(n, edges, schema, columns, labels=labels)


def make_random_graph(
    seed: int, n: int = 50, numeric_features: int = 3, categorical_features: int = 1,
    extra_edge_factor: float = 1.5,
) -> AttributedGraph:
    """Random connected graph: spanning tree plus extra random edges, with
    mixed numerical and categorical features. Every node has degree >= 1."""
    rng = np.random.default_rng(seed)
    edges = set()
    for i in range(1, n):
        parent = int(rng.integers(0, i))
        edges.add((parent, i))
    for _ in range(int(n * extra_edge_factor)):
        a, b = rng.integers(0, n, size=2)
        if a != b:
            edges.add((min(int(a), int(b)), max(int(a), int(b))))

    specs, columns = [], []
    for j in range(numeric_features):
        specs.append(FeatureSpec(f"num{j}", FeatureKind.NUMERICAL))
        if j % 2 == 0:
            data = rng.normal(size=n)
        else:
            data = rng.uniform(0, 10, size=n).round(1)  # repeated values on purpose
        columns.append(FeatureColumn(FeatureKind.NUMERICAL, data.astype(np.float64)))
    for j in range(categorical_features):
        cats = tuple(sorted(["red", "green", "blue", "gold"][: 3 + j % 2]))
        codes = rng.integers(0, len(cats), size=n).astype(np.int32)
        specs.append(FeatureSpec(f"cat{j}", FeatureKind.CATEGORICAL))
        columns.append(FeatureColumn(FeatureKind.CATEGORICAL, codes, cats))
    return graph_from_edges(n, edges, GraphSchema(specs), columns)


NODE_FILE = """id,label,year,score,genre
m1,Toy Story,1995,8.3,animation
m2,Toy Story II,1999,7.9,animation
m3,Heat,1995,8.2,crime
m4,Casino,1995,8.0,crime
m5,Up,2009,8.2,animation
"""

EDGE_FILE = """src,dst
m1,m2
m1,m5
m2,m5
m3,m4
m1,m3
"""

MOVIE_SCHEMA = "year:numerical,score:numerical,genre:categorical"


@pytest.fixture
def movie_files(tmp_path):
    nodes = tmp_path / "nodes.csv"
    edges = tmp_path / "edges.csv"
    nodes.write_text(NODE_FILE, encoding="utf-8")
    edges.write_text(EDGE_FILE, encoding="utf-8")
    return nodes, edges


@pytest.fixture
def movie_graph(movie_files):
    nodes, edges = movie_files
    return load_graph(edges, nodes, GraphSchema.parse(MOVIE_SCHEMA))


@pytest.fixture
def movie_binnings(movie_graph):
    return build_binnings(movie_graph)


def text_stream(content: str) -> io.StringIO:
    return io.StringIO(content)
