"""Synthetic scaling benchmark for the ranking path.

Builds graphs with hub nodes of controlled neighborhood size n (each hub
connects to a shared pool of n nodes) and f synthetic features drawn from
mixed distributions, then walks the graph in one of two orders and times
the combined surprise+interest ranking at each focus whose neighborhood has
the target size:

  hop   next focus chosen uniformly among untraversed neighbors of the
        current focus (restarting at a random untraversed node when stuck),
        simulating node-to-node exploration;
  rand  next focus chosen uniformly among all untraversed nodes,
        simulating jumps via the search box.

The profile is pre-warmed with three visits so every timed call runs the
full interest path, and the candidate cap is off by default so ranking
cost scales with the whole neighborhood. Timings cover the ranking call
only; graph load, binning, surprise precompute, and profile histogram
materialization happen outside the timed region.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import AttributedGraph, FeatureColumn, FeatureKind, FeatureSpec, GraphSchema
from .histograms import Binning, divergence_calls, mdl_binning, reset_divergence_calls
from .ranking import RankMode, SurpriseIndex, precompute_surprise, rank_neighbors
from .sessions import SessionProfile

BINNING_SAMPLE = 2000


@dataclass(frozen=True)
class BenchRow:
    n: int
    f: int
    order: str
    mean_ms: float
    stdev_ms: float
    samples: int
    js_calls_per_rank: float


@dataclass(frozen=True)
class LinearFit:
    axis: str
    order: str
    fixed: int
    slope: float
    intercept: float
    r_squared: float


@dataclass(frozen=True)
class BenchResult:
    rows: list[BenchRow]
    fits: list[LinearFit]

    def table(self) -> str:
        lines = ["n\tf\torder\tmean_ms\tstdev_ms\tsamples\tjs_calls_per_rank"]
        for r in self.rows:
            lines.append(
                f"{r.n}\t{r.f}\t{r.order}\t{r.mean_ms:.3f}\t{r.stdev_ms:.3f}"
                f"\t{r.samples}\t{r.js_calls_per_rank:.1f}"
            )
        for fit in self.fits:
            fixed = "f" if fit.axis == "neighbors" else "n"
            lines.append(
                f"# fit\taxis={fit.axis}\torder={fit.order}\t{fixed}={fit.fixed}"
                f"\tslope_ms={fit.slope:.6g}\tintercept_ms={fit.intercept:.6g}"
                f"\tr2={fit.r_squared:.4f}"
            )
        return "\n".join(lines) + "\n"


def synthetic_feature(kind: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """One synthetic numerical feature; families cycle so histograms stay
    non-degenerate: uniform, heavy-tailed power law, bimodal.

    Values are drawn on fixed 64-point inverse-cdf lattices rather than
    continuously, so the binning complexity (and with it the per-call
    divergence cost) stays constant across graph sizes; otherwise bin
    counts grow with the amount of data and contaminate the scaling shape.
    """
    from scipy.special import ndtri

    which = kind % 3
    u = (rng.integers(0, 64, size) + 0.5) / 64.0
    if which == 0:
        return u
    if which == 1:
        return (1.0 - u) ** -0.5  # power-law tail, shape 2
    mode = rng.random(size) < 0.5
    return np.where(mode, ndtri(u), 6.0 + ndtri(u))


def make_hub_graph(
    n_neighbors: int, n_features: int, hubs: int, rng: np.random.Generator
) -> tuple[AttributedGraph, np.ndarray]:
    """Graph with ``hubs`` focus nodes of degree exactly ``n_neighbors``,
    all sharing one neighbor pool. Returns (graph, hub node ids)."""
    pool = n_neighbors
    total = hubs + pool
    # Hubs occupy ids [0, hubs); each connects to every pool node.
    degrees = np.concatenate(
        [np.full(hubs, pool, dtype=np.int64), np.full(pool, hubs, dtype=np.int64)]
    )
    indptr = np.zeros(total + 1, dtype=np.int64)
    np.cumsum(degrees, out=indptr[1:])
    hub_rows = np.tile(np.arange(hubs, total, dtype=np.int64), hubs)
    pool_rows = np.tile(np.arange(hubs, dtype=np.int64), pool)
    neighbors = np.concatenate([hub_rows, pool_rows])

    schema = GraphSchema(
        [FeatureSpec(f"synth{j}", FeatureKind.NUMERICAL) for j in range(n_features)]
    )
    columns = [
        FeatureColumn(FeatureKind.NUMERICAL, synthetic_feature(j, total, rng))
        for j in range(n_features)
    ]
    ids = [f"hub{i}" for i in range(hubs)] + [f"n{i}" for i in range(pool)]
    g = AttributedGraph(indptr, neighbors, ids, ids, schema, columns)
    return g, np.arange(hubs, dtype=np.int64)


def bench_binnings(g: AttributedGraph, sample: int = BINNING_SAMPLE) -> list[Binning]:
    """Binnings from a fixed-size value sample, boundary edges stretched to
    the global range.

    Bin counts chosen by the description-length criterion grow with the
    amount of data; sampling a constant number of values keeps the
    histogram complexity (and so the per-call divergence cost) the same at
    every graph size, which is what the scaling measurement varies ``n``
    against.
    """
    binnings = []
    for j in range(len(g.schema)):
        vals = g.feature_values(j)
        fitted = mdl_binning(vals[: min(sample, len(vals))], feature=j).binning
        edges = list(fitted.edges)
        edges[0] = min(edges[0], float(vals.min()))
        edges[-1] = max(edges[-1], float(vals.max()))
        binnings.append(Binning(j, FeatureKind.NUMERICAL, edges=tuple(edges)))
    return binnings


def _next_hop(
    g: AttributedGraph, current: int | None, untraversed: np.ndarray, rng
) -> int:
    if current is not None:
        options = g.neighbors_of(current)
        options = options[untraversed[options]]
        if len(options):
            return int(options[rng.integers(len(options))])
    remaining = np.flatnonzero(untraversed)
    return int(remaining[rng.integers(len(remaining))])


def _measure_order(
    g: AttributedGraph,
    index: SurpriseIndex,
    binnings,
    order: str,
    n_target: int,
    repeats: int,
    rng: np.random.Generator,
    cap: int | None,
) -> tuple[list[float], list[int]]:
    profile = SessionProfile("bench", g, binnings, warm_after=3)
    pool = np.arange(len(index.node_surprise))[g.degrees != n_target]
    if len(pool) == 0:
        pool = np.arange(g.node_count)
    for node in rng.choice(pool, size=3, replace=True):
        profile.record_visit(int(node))
    # Warm up code paths so the first timed sample is not an outlier.
    profile.histograms()
    rank_neighbors(g, index, profile, int(pool[0]), 5, RankMode.COMBINED, cap=cap)

    untraversed = np.ones(g.node_count, dtype=bool)
    times_ms: list[float] = []
    js_calls: list[int] = []
    perm = rng.permutation(g.node_count) if order == "rand" else None
    perm_pos = 0
    current: int | None = None
    while len(times_ms) < repeats:
        if order == "rand":
            while perm_pos < len(perm) and not untraversed[perm[perm_pos]]:
                perm_pos += 1
            if perm_pos >= len(perm):
                break
            focus = int(perm[perm_pos])
        else:
            if not untraversed.any():
                break
            focus = _next_hop(g, current, untraversed, rng)
        untraversed[focus] = False
        current = focus
        profile.record_visit(focus)
        if g.degree(focus) == n_target:
            profile.histograms()
            reset_divergence_calls()
            t0 = time.perf_counter()
            rank_neighbors(g, index, profile, focus, 10, RankMode.COMBINED, cap=cap)
            times_ms.append((time.perf_counter() - t0) * 1e3)
            js_calls.append(divergence_calls())
    return times_ms, js_calls


def _fit(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * xs + intercept
    ss_res = float(((ys - pred) ** 2).sum())
    ss_tot = float(((ys - ys.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def run_bench(
    n_list: Sequence[int],
    f_list: Sequence[int],
    orders: Sequence[str] = ("rand", "hop"),
    repeats: int = 5,
    seed: int = 0,
    cap: int | None = None,
) -> BenchResult:
    """Time the ranking call over the cross product of neighborhood sizes
    and feature counts, then fit mean time against each axis."""
    for order in orders:
        if order not in ("rand", "hop"):
            raise ValueError(f"unknown order {order!r}")
    rows = []
    for n in n_list:
        for f in f_list:
            gen_rng = np.random.default_rng([seed, n, f])
            g, _ = make_hub_graph(n, f, hubs=repeats, rng=gen_rng)
            binnings = bench_binnings(g)
            index = precompute_surprise(g, binnings)
            for oidx, order in enumerate(orders):
                walk_rng = np.random.default_rng([seed, n, f, oidx])
                times, calls = _measure_order(
                    g, index, binnings, order, n, repeats, walk_rng, cap
                )
                times_arr = np.asarray(times)
                rows.append(
                    BenchRow(
                        n=n,
                        f=f,
                        order=order,
                        mean_ms=float(times_arr.mean()),
                        stdev_ms=float(times_arr.std(ddof=1)) if len(times) > 1 else 0.0,
                        samples=len(times),
                        js_calls_per_rank=float(np.mean(calls)),
                    )
                )

    fits = []
    for order in orders:
        for f in sorted({r.f for r in rows}):
            pts = [(r.n, r.mean_ms) for r in rows if r.order == order and r.f == f]
            if len({x for x, _ in pts}) >= 3:
                slope, intercept, r2 = _fit(
                    np.asarray([x for x, _ in pts], dtype=np.float64),
                    np.asarray([y for _, y in pts]),
                )
                fits.append(LinearFit("neighbors", order, f, slope, intercept, r2))
        for n in sorted({r.n for r in rows}):
            pts = [(r.f, r.mean_ms) for r in rows if r.order == order and r.n == n]
            if len({x for x, _ in pts}) >= 3:
                slope, intercept, r2 = _fit(
                    np.asarray([x for x, _ in pts], dtype=np.float64),
                    np.asarray([y for _, y in pts]),
                )
                fits.append(LinearFit("features", order, n, slope, intercept, r2))
    return BenchResult(rows, fits)
