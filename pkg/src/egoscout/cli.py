"""Command line interface: precompute, rank, bench, serve.

Exit codes: 0 success, 1 usage error, 2 data error (bad input files,
unknown nodes, fingerprint mismatches).
"""

from __future__ import annotations

import contextlib
import json
import time
from pathlib import Path

import click
import numpy as np

from .bench import run_bench
from .graph import (
    AttributedGraph,
    GraphLoadError,
    GraphSchema,
    derive_degree,
    derive_pagerank,
    load_graph,
)
from .histograms import (
    binnings_from_doc,
    binnings_to_doc,
    build_binnings,
    global_distribution,
)
from .ranking import (
    ColdProfileError,
    EmptyProfileError,
    IndexMismatchError,
    RankMode,
    SurpriseIndex,
    UnknownNodeError,
    precompute_surprise,
    rank_neighbors,
)
from .sessions import SessionProfile

BINNINGS_FILE = "binnings.json"
INDEX_FILE = "index.json"


class DataError(click.ClickException):
    exit_code = 2


@contextlib.contextmanager
def _data_errors():
    """Convert engine data errors into exit-code-2 CLI failures."""
    try:
        yield
    except (GraphLoadError, IndexMismatchError, ColdProfileError, EmptyProfileError) as exc:
        raise DataError(str(exc)) from exc
    except (UnknownNodeError, KeyError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        raise DataError(f"unknown node: {msg}") from exc
    except (ValueError, OSError) as exc:
        raise DataError(str(exc)) from exc


def _parse_derives(text: str, damping: float, tol: float, iters: int) -> list[dict]:
    derives = []
    for name in filter(None, (p.strip() for p in text.split(","))):
        if name == "degree":
            derives.append({"name": "degree"})
        elif name == "pagerank":
            derives.append(
                {"name": "pagerank", "damping": damping, "tol": tol, "max_iters": iters}
            )
        else:
            raise click.UsageError(f"unknown derived feature {name!r}")
    return derives


def _apply_derives(g: AttributedGraph, derives: list[dict]) -> AttributedGraph:
    for d in derives:
        if d["name"] == "degree":
            g = g.with_numerical_feature("degree", derive_degree(g))
        else:
            result = derive_pagerank(g, d["damping"], d["tol"], d["max_iters"])
            g = g.with_numerical_feature("pagerank", result.scores)
    return g


def _parse_lambdas(text: str | None, schema: GraphSchema) -> list[float] | None:
    if not text:
        return None
    weights = {f.name: 1.0 for f in schema}
    for part in filter(None, (p.strip() for p in text.split(","))):
        name, _, value = part.partition("=")
        if not value:
            raise click.UsageError(f"--lambda entry {part!r} must be name=weight")
        if name not in weights:
            raise DataError(f"--lambda names unknown feature {name!r}")
        weights[name] = float(value)
    return [weights[f.name] for f in schema]


def _write_artifacts(outdir: Path, binnings, global_hists, index: SurpriseIndex) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    doc = binnings_to_doc(binnings, global_hists)
    (outdir / BINNINGS_FILE).write_text(
        json.dumps(doc, separators=(",", ":")), encoding="utf-8"
    )
    index.save(outdir / INDEX_FILE)


def _read_artifacts(indexdir: Path):
    with open(indexdir / BINNINGS_FILE, encoding="utf-8") as fh:
        binnings, global_hists = binnings_from_doc(json.load(fh))
    index = SurpriseIndex.load(indexdir / INDEX_FILE)
    index.validate_binnings(binnings)
    return binnings, global_hists, index


def _load_graph_for_index(nodes: Path, edges: Path, index: SurpriseIndex) -> AttributedGraph:
    """Reload the graph an index was built from: file features first, then
    the derived features recorded in the index header."""
    total = len(index.schema)
    file_schema = GraphSchema(index.schema.features[: total - len(index.derived)])
    g = load_graph(edges, nodes, file_schema)
    g = _apply_derives(g, index.derived)
    index.validate_graph(g)
    return g


@click.group()
def cli():
    """Adaptive neighbor ranking for attributed graphs."""


@cli.command()
@click.option("--nodes", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--edges", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--schema", default="", help="Feature spec, e.g. year:numerical,genre:categorical")
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--derive", default="", help="Comma list of degree,pagerank")
@click.option("--lambda", "lambdas_text", default=None, help="Feature weights, name=w pairs")
@click.option("--max-bins", default=64, show_default=True)
@click.option("--max-candidates", default=256, show_default=True)
@click.option("--damping", default=0.85, show_default=True)
@click.option("--pagerank-tol", default=1e-10, show_default=True)
@click.option("--pagerank-iters", default=100, show_default=True)
@click.option("--parallel", is_flag=True, help="Parallelize precompute over features")
def precompute(
    nodes, edges, schema, out, derive, lambdas_text, max_bins, max_candidates,
    damping, pagerank_tol, pagerank_iters, parallel,
):
    """Build binnings and the surprise index for a graph."""
    with _data_errors():
        derives = _parse_derives(derive, damping, pagerank_tol, pagerank_iters)
        t0 = time.perf_counter()
        g = load_graph(edges, nodes, GraphSchema.parse(schema))
        g = _apply_derives(g, derives)
        t_load = time.perf_counter()
        if len(g.schema) == 0:
            raise DataError("no features: declare a schema or use --derive")
        rep = g.report
        click.echo(
            f"loaded {g.node_count} nodes, {g.edge_count} edges in "
            f"{(t_load - t0) * 1e3:.1f} ms (dropped: {rep.self_edges_dropped} self-edges, "
            f"{rep.duplicate_edges_dropped} duplicate edges, "
            f"{rep.zero_degree_dropped} zero-degree nodes)"
        )
        binnings = build_binnings(g, max_bins, max_candidates)
        global_hists = [global_distribution(g, j, b) for j, b in enumerate(binnings)]
        t_bin = time.perf_counter()
        click.echo(f"binned {len(binnings)} features in {(t_bin - t_load) * 1e3:.1f} ms")
        weights = _parse_lambdas(lambdas_text, g.schema)
        index = precompute_surprise(
            g, binnings, weights, derived=derives, parallel=parallel
        )
        t_idx = time.perf_counter()
        click.echo(f"precomputed surprise in {(t_idx - t_bin) * 1e3:.1f} ms")
        _write_artifacts(out, binnings, global_hists, index)
        click.echo(f"wrote {out / BINNINGS_FILE} and {out / INDEX_FILE}")


@cli.command()
@click.option("--nodes", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--edges", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--index", "indexdir", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--focus", required=True)
@click.option("--k", default=10, show_default=True)
@click.option("--mode", type=click.Choice([m.value for m in RankMode]), default="combined")
@click.option("--visits", default="", help="Comma list of node ids seeding a throwaway profile")
@click.option("--cap", default=1000, show_default=True)
def rank(nodes, edges, indexdir, focus, k, mode, visits, cap):
    """One-shot ranking query against a precomputed index."""
    with _data_errors():
        binnings, _, index = _read_artifacts(indexdir)
        g = _load_graph_for_index(nodes, edges, index)
        profile = None
        visit_ids = [v.strip() for v in visits.split(",") if v.strip()]
        if visit_ids:
            profile = SessionProfile("cli", g, binnings)
            for ext in visit_ids:
                profile.record_visit(g.internal_id(ext))
        result = rank_neighbors(
            g, index, profile, g.internal_id(focus), k,
            mode=RankMode(mode), cap=cap,
        )
        click.echo(f"mode_used={result.mode_used.value} cold_start={result.cold_start}")
        click.echo("rank\tid\tlabel\tdegree\ts\tr\tt")
        for pos, sn in enumerate(result.neighbors, start=1):
            r = "-" if sn.interest is None else f"{sn.interest:.6f}"
            t = "-" if sn.blended is None else f"{sn.blended:.6f}"
            click.echo(
                f"{pos}\t{g.ext_ids[sn.node]}\t{g.labels[sn.node]}\t{sn.degree}"
                f"\t{sn.surprise:.6f}\t{r}\t{t}"
            )


@cli.command()
@click.option("--neighbors", "-n", default="1000,2000,5000", help="Comma list of neighborhood sizes")
@click.option("--features", "-f", default="8", help="Comma list of feature counts")
@click.option("--order", default="rand,hop", help="Comma list of rand,hop")
@click.option("--repeats", default=5, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--cap", default=None, type=int, help="Candidate cap (default: uncapped)")
@click.option("--out", default=None, type=click.Path(path_type=Path))
def bench(neighbors, features, order, repeats, seed, cap, out):
    """Synthetic scaling benchmark of the ranking call."""
    with _data_errors():
        n_list = [int(x) for x in neighbors.split(",") if x.strip()]
        f_list = [int(x) for x in features.split(",") if x.strip()]
        orders = [o.strip() for o in order.split(",") if o.strip()]
        result = run_bench(n_list, f_list, orders, repeats, seed, cap)
        text = result.table()
        if out:
            out.write_text(text, encoding="utf-8")
            click.echo(f"wrote {out}")
        else:
            click.echo(text, nl=False)


@cli.command()
@click.option("--nodes", required=True, envvar="EGOSCOUT_NODES",
              type=click.Path(exists=True, path_type=Path))
@click.option("--edges", required=True, envvar="EGOSCOUT_EDGES",
              type=click.Path(exists=True, path_type=Path))
@click.option("--index", "indexdir", required=True, envvar="EGOSCOUT_INDEX",
              type=click.Path(exists=True, path_type=Path))
@click.option("--host", default="127.0.0.1", envvar="EGOSCOUT_HOST", show_default=True)
@click.option("--port", default=8765, envvar="EGOSCOUT_PORT", show_default=True)
@click.option("--cap", default=1000, envvar="EGOSCOUT_CAP", show_default=True)
@click.option("--warm-after", default=3, envvar="EGOSCOUT_WARM_AFTER", show_default=True)
def serve(nodes, edges, indexdir, host, port, cap, warm_after):
    """Serve the exploration API over HTTP."""
    import uvicorn

    from .service import EngineState, create_app

    with _data_errors():
        binnings, global_hists, index = _read_artifacts(indexdir)
        g = _load_graph_for_index(nodes, edges, index)
        state = EngineState(
            g, binnings, global_hists, index, candidate_cap=cap, warm_after=warm_after
        )
        app = create_app(state)
    click.echo(f"serving {g.node_count} nodes on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="egoscout", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return exc.exit_code
    except click.Abort:
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
