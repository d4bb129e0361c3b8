"""HTTP/JSON API over the exploration engine.

The loaded graph, binnings, and surprise index are shared immutably across
request handlers; the only mutable state is per-session (visit history and
weights), guarded by a per-session lock. Sessions are identified by
client-supplied opaque ids and auto-created on first use.

Every error body uses the envelope {"error": {"code", "message"}}. Scores
are serialized with 6 fractional digits unless the request asks for
``precision=full``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from fastapi import Body, FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .graph import AttributedGraph, search_nodes
from .histograms import Binning, Histogram
from .ranking import (
    ColdProfileError,
    EmptyProfileError,
    RankMode,
    RankResult,
    ScoredNeighbor,
    SurpriseIndex,
    rank_neighbors,
)
from .sessions import SessionProfile


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


@dataclass
class EngineState:
    """Shared engine objects plus the per-session registry."""

    graph: AttributedGraph
    binnings: Sequence[Binning]
    global_hists: Sequence[Histogram]
    index: SurpriseIndex
    candidate_cap: int | None = 1000
    warm_after: int = 3
    sessions: dict[str, SessionProfile] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)
    _session_locks: dict[str, threading.Lock] = field(default_factory=dict)

    def session(self, sid: str) -> tuple[SessionProfile, threading.Lock]:
        with self._lock:
            profile = self.sessions.get(sid)
            if profile is None:
                profile = SessionProfile(
                    sid, self.graph, self.binnings, warm_after=self.warm_after
                )
                self.sessions[sid] = profile
                self._session_locks[sid] = threading.Lock()
            return profile, self._session_locks[sid]

    def node_id(self, ext_id: str) -> int:
        try:
            return self.graph.internal_id(ext_id)
        except KeyError:
            raise ApiError(404, "not_found", f"unknown node id {ext_id!r}") from None


class RankRequest(BaseModel):
    focus: str
    k: int = Field(default=10, ge=1)
    mode: RankMode = RankMode.COMBINED
    exclude: list[str] = Field(default_factory=list)


class VisitRequest(BaseModel):
    node: str


class WeightsRequest(BaseModel):
    feature_weights: dict[str, float] | None = Field(default=None, alias="lambda")
    w_s: float | None = None
    w_r: float | None = None

    model_config = {"populate_by_name": True}


def _fmt(x: float | None, full: bool):
    if x is None:
        return None
    return float(x) if full else round(float(x), 6)


def _neighbor_body(state: EngineState, sn: ScoredNeighbor, full: bool) -> dict:
    g = state.graph
    features = []
    for j, spec in enumerate(g.schema):
        features.append(
            {
                "name": spec.name,
                "surprise": _fmt(sn.feature_surprise[j], full),
                "interest": _fmt(
                    None if sn.feature_interest is None else sn.feature_interest[j], full
                ),
                "blended": _fmt(
                    None if sn.feature_blended is None else sn.feature_blended[j], full
                ),
            }
        )
    return {
        "id": g.ext_ids[sn.node],
        "label": g.labels[sn.node],
        "degree": sn.degree,
        "surprise": _fmt(sn.surprise, full),
        "interest": _fmt(sn.interest, full),
        "blended": _fmt(sn.blended, full),
        "features": features,
    }


def _profile_body(profile: SessionProfile, full: bool) -> dict:
    summary = profile.summary()
    hists = summary.pop("histograms")
    features = []
    for j, spec in enumerate(profile.graph.schema):
        mass = None if hists is None else [_fmt(m, full) for m in hists[j].mass]
        features.append({"name": spec.name, "mass": mass})
    summary["features"] = features
    summary["lambda"] = {
        spec.name: float(w) for spec, w in zip(profile.graph.schema, profile.lambdas)
    }
    summary["w_s"] = profile.blend.w_s
    summary["w_r"] = profile.blend.w_r
    return summary


def _rank_body(state: EngineState, req_mode: RankMode, result: RankResult, full: bool) -> dict:
    return {
        "mode_requested": req_mode.value,
        "mode_used": result.mode_used.value,
        "cold_start": result.cold_start,
        "results": [_neighbor_body(state, sn, full) for sn in result.neighbors],
    }


def create_app(state: EngineState) -> FastAPI:
    if len(state.graph.schema) == 0:
        raise ValueError("service requires a graph with at least one feature")
    app = FastAPI(title="egoscout", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(ApiError)
    async def _api_error(_: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": {"code": "validation", "message": str(exc.errors())}},
        )

    def full_precision(precision: str | None) -> bool:
        return precision == "full"

    @app.get("/graph/summary")
    def graph_summary():
        g = state.graph
        return {
            "nodes": g.node_count,
            "edges": g.edge_count,
            "features": [
                {"name": spec.name, "kind": spec.kind.value, "bins": b.bin_count}
                for spec, b in zip(g.schema, state.binnings)
            ],
        }

    @app.get("/nodes/{ext_id}")
    def node_details(ext_id: str, precision: str | None = None):
        full = full_precision(precision)
        g = state.graph
        i = state.node_id(ext_id)
        return {
            "id": ext_id,
            "label": g.labels[i],
            "degree": int(g.degrees[i]),
            "values": {
                spec.name: g.columns[j].display_value(i)
                for j, spec in enumerate(g.schema)
            },
            "surprise": _fmt(state.index.node_surprise[i], full),
            "feature_surprise": {
                spec.name: _fmt(state.index.feature_surprise[i, j], full)
                for j, spec in enumerate(g.schema)
            },
        }

    @app.get("/nodes/{ext_id}/neighborhood-summary")
    def neighborhood_summary(
        ext_id: str,
        sid: str | None = None,
        mode: RankMode = RankMode.COMBINED,
        k: int = Query(default=5, ge=1),
        exclude: str = "",
        precision: str | None = None,
    ):
        full = full_precision(precision)
        g = state.graph
        i = state.node_id(ext_id)
        excluded = _parse_exclude(state, exclude)
        profile = state.sessions.get(sid) if sid else None
        result = _rank(state, profile, i, k, mode, excluded)
        features = []
        for j, spec in enumerate(g.schema):
            binning = state.binnings[j]
            local = state.index.local_histogram(i, j, binning)
            entry = {
                "name": spec.name,
                "kind": spec.kind.value,
                "local_mass": [_fmt(m, full) for m in local.mass],
                "global_mass": [_fmt(m, full) for m in state.global_hists[j].mass],
            }
            if binning.edges is not None:
                entry["edges"] = list(binning.edges)
            else:
                entry["categories"] = list(binning.categories)
            features.append(entry)
        body = _rank_body(state, mode, result, full)
        body["id"] = ext_id
        body["features"] = features
        return body

    @app.post("/sessions/{sid}/rank")
    def rank(sid: str, req: RankRequest, precision: str | None = None):
        full = full_precision(precision)
        profile, lock = state.session(sid)
        focus = state.node_id(req.focus)
        excluded = [state.node_id(e) for e in req.exclude]
        with lock:
            result = _rank(state, profile, focus, req.k, req.mode, excluded)
        return _rank_body(state, req.mode, result, full)

    @app.post("/sessions/{sid}/visits")
    def record_visit(sid: str, req: VisitRequest, precision: str | None = None):
        profile, lock = state.session(sid)
        node = state.node_id(req.node)
        with lock:
            profile.record_visit(node)
            return _profile_body(profile, full_precision(precision))

    @app.get("/sessions/{sid}")
    def session_summary(sid: str, precision: str | None = None):
        profile, lock = state.session(sid)
        with lock:
            return _profile_body(profile, full_precision(precision))

    @app.put("/sessions/{sid}/weights")
    def set_weights(sid: str, req: WeightsRequest):
        profile, lock = state.session(sid)
        with lock:
            if req.feature_weights is not None:
                lam = profile.lambdas.copy()
                for name, w in req.feature_weights.items():
                    try:
                        lam[state.graph.schema.index_of(name)] = w
                    except KeyError:
                        raise ApiError(
                            404, "not_found", f"unknown feature {name!r}"
                        ) from None
                try:
                    profile.set_lambdas(lam)
                except ValueError as exc:
                    raise ApiError(400, "validation", str(exc)) from None
            if (req.w_s is None) != (req.w_r is None):
                raise ApiError(400, "validation", "w_s and w_r must be set together")
            if req.w_s is not None:
                try:
                    profile.set_blend(req.w_s, req.w_r)
                except ValueError as exc:
                    raise ApiError(400, "validation", str(exc)) from None
            return {"ok": True, "profile": _profile_body(profile, False)}

    @app.get("/search")
    def search(q: str = "", limit: int = Query(default=10, ge=1), precision: str | None = None):
        full = full_precision(precision)
        g = state.graph
        hits = search_nodes(g, q, limit)
        return {
            "results": [
                {
                    "id": g.ext_ids[i],
                    "label": g.labels[i],
                    "degree": int(g.degrees[i]),
                    "surprise": _fmt(state.index.node_surprise[i], full),
                }
                for i in hits
            ]
        }

    return app


def _parse_exclude(state: EngineState, exclude: str) -> list[int]:
    if not exclude:
        return []
    return [state.node_id(e) for e in exclude.split(",")]


def _rank(
    state: EngineState,
    profile: SessionProfile | None,
    focus: int,
    k: int,
    mode: RankMode,
    excluded: list[int],
) -> RankResult:
    try:
        return rank_neighbors(
            state.graph,
            state.index,
            profile,
            focus,
            k,
            mode=mode,
            exclude=excluded,
            cap=state.candidate_cap,
        )
    except ColdProfileError as exc:
        raise ApiError(409, "cold_profile", str(exc)) from None
    except EmptyProfileError as exc:
        raise ApiError(409, "cold_profile", str(exc)) from None
