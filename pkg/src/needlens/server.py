"""HTTP API for the expert console: topic inspection, labeling, graph
snapshots and dashboard data. Reads are concurrent; label submissions and
re-extraction runs are serialized by a single mutation lock."""

from __future__ import annotations

import json
import threading

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import topic_model
from .config import PipelineConfig
from .graph import NeedGraph
from .ingestion import corpus_from_dict
from .lexicon import AuditLog, LexiconError, SeedLexicon, save_lexicon
from .pipeline import Pipeline, StageError
from .waves import WAVES


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


class ServerState:
    def __init__(self, cfg: PipelineConfig, use_llm: bool):
        self.pipeline = Pipeline(cfg, use_llm=use_llm)
        for artifact, producer in (("corpus", "ingest"), ("model", "train"), ("lexicon", "extract")):
            if not self.pipeline.path(artifact).exists():
                raise StageError(
                    f"serve: {artifact} artifact missing; run `needlens {producer}` first"
                )
        self.mutation_lock = threading.Lock()
        self.run_status = {"state": "idle", "detail": None}
        self.audit = AuditLog(self.pipeline.out / "audit.jsonl")
        self.reload()

    def reload(self) -> None:
        read = self.pipeline._read_json
        self.corpus = corpus_from_dict(read("corpus", "serve", "ingest"))
        self.model = topic_model.model_from_dict(read("model", "serve", "train"))
        self.lexicon = SeedLexicon.from_dict(read("lexicon", "serve", "extract"))

    def read_artifact(self, name: str, producer: str):
        return self.pipeline._read_json(name, "serve", producer)

    def reextract(self) -> None:
        self.run_status = {"state": "running", "detail": "extract"}
        try:
            self.pipeline.extract()
            self.run_status["detail"] = "analyze"
            self.pipeline.analyze()
            self.run_status["detail"] = "report"
            self.pipeline.report()
            self.reload()
            self.run_status = {"state": "idle", "detail": None}
        except Exception as exc:
            self.run_status = {"state": "failed", "detail": str(exc)}
        finally:
            self.mutation_lock.release()

    def start_reextract(self) -> bool:
        """Kick a background re-extraction; False when a writer is active."""
        if not self.mutation_lock.acquire(blocking=False):
            return False
        thread = threading.Thread(target=self.reextract, daemon=True)
        thread.start()
        return True


def create_app(cfg: PipelineConfig, use_llm: bool = True) -> FastAPI:
    state = ServerState(cfg, use_llm)
    app = FastAPI(title="needlens", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.needlens = state

    def topic_payload(k: int, n_terms: int = 10) -> dict:
        terms = topic_model.top_terms(state.model, k, n_terms)
        owner = state.lexicon.owner_of(k)
        return {
            "topic_id": k,
            "top_terms": [{"token": t, "weight": w} for t, w in terms],
            "need_label": owner,
            "labeled": owner is not None,
        }

    @app.get("/api/health")
    def health():
        return {"status": "ok", "run": state.run_status}

    @app.get("/api/topics")
    def topics():
        return {"topics": [topic_payload(k) for k in range(state.model.K)]}

    @app.get("/api/topics/{k}")
    def topic(k: int):
        if not 0 <= k < state.model.K:
            return _error(404, "unknown_topic", f"topic {k} out of range")
        return topic_payload(k)

    @app.get("/api/topics/{k}/docs")
    def topic_docs(k: int, n: int = 5):
        if not 0 <= k < state.model.K:
            return _error(404, "unknown_topic", f"topic {k} out of range")
        weights = state.model.theta[:, k]
        order = sorted(
            range(len(state.model.doc_ids)), key=lambda i: (-weights[i], state.model.doc_ids[i])
        )[:n]
        docs_by_id = {d.doc_id: d for d in state.corpus.documents}
        return {
            "topic_id": k,
            "documents": [
                {
                    "doc_id": state.model.doc_ids[i],
                    "weight": float(weights[i]),
                    "wave": docs_by_id[state.model.doc_ids[i]].wave,
                    "text": docs_by_id[state.model.doc_ids[i]].clean_text,
                }
                for i in order
            ],
        }

    @app.post("/api/topics/{k}/label")
    def label_topic(k: int, body: dict):
        need_label = str(body.get("need_label", "")).strip().lower()
        kind = str(body.get("kind", "need"))
        if not state.mutation_lock.acquire(blocking=False):
            state_now = {"run": state.run_status, "lexicon": state.lexicon.to_dict()}
            return JSONResponse(
                status_code=409,
                content={
                    "code": "conflict",
                    "message": "another labeling or extraction run is in progress",
                    "state": state_now,
                },
            )
        try:
            state.lexicon.apply_expert_label(
                k,
                need_label,
                kind=kind,
                n_topics=state.model.K,
                audit=state.audit,
            )
            save_lexicon(state.lexicon, state.pipeline.path("lexicon"))
        except LexiconError as exc:
            state.mutation_lock.release()
            return _error(400, "bad_label", str(exc))
        # hand the already-held lock to the background re-extraction
        thread = threading.Thread(target=state.reextract, daemon=True)
        thread.start()
        return {"topic_id": k, "need_label": need_label, "reextract": "started"}

    @app.get("/api/lexicon")
    def get_lexicon():
        return state.lexicon.to_dict()

    @app.post("/api/lexicon")
    def post_lexicon(body: dict):
        label = str(body.get("need_label", "")).strip().lower()
        keywords = body.get("keywords", [])
        kind = str(body.get("kind", "need"))
        if not state.mutation_lock.acquire(blocking=False):
            return _error(409, "conflict", "another mutation is in progress")
        try:
            try:
                SeedLexicon._check_label(label)
            except LexiconError as exc:
                return _error(400, "bad_label", str(exc))
            from .lexicon import LexiconEntry

            entry = state.lexicon.entries.get(label)
            before = entry.to_dict() if entry else None
            if entry is None:
                entry = LexiconEntry(kind=kind)
                state.lexicon.entries[label] = entry
            entry.keywords.update(str(kw).lower() for kw in keywords)
            state.audit.append("expert", "post_lexicon", before, entry.to_dict())
            save_lexicon(state.lexicon, state.pipeline.path("lexicon"))
            return state.lexicon.to_dict()
        finally:
            state.mutation_lock.release()

    @app.get("/api/graph/snapshot")
    def graph_snapshot(wave: str = "all"):
        obj = state.read_artifact("graph", "extract")
        graph = NeedGraph.from_dict(obj)
        if wave not in ("all", ""):
            if wave not in WAVES and wave != "T0":
                return _error(400, "bad_wave", f"unknown wave {wave!r}")
            try:
                graph = graph.snapshot(wave)
            except Exception as exc:
                return _error(400, "bad_wave", str(exc))
        return graph.to_dict()

    @app.get("/api/graph/node/{node_id:path}")
    def graph_node(node_id: str):
        obj = state.read_artifact("graph", "extract")
        graph = NeedGraph.from_dict(obj)
        node = graph.nodes.get(node_id)
        if node is None:
            return _error(404, "unknown_node", f"no node {node_id!r}")
        edges = [
            {"src": e.src, "dst": e.dst, "relation": e.relation, "first_seen": e.first_seen}
            for e in graph.edges.values()
            if e.src == node_id or e.dst == node_id
        ]
        return {
            "node_id": node.node_id,
            "layer": node.layer,
            "label": node.label,
            "first_seen": node.first_seen,
            "edges": sorted(edges, key=lambda e: (e["src"], e["dst"], e["relation"])),
        }

    @app.get("/api/analytics/prevalence")
    def analytics_prevalence(wave: str = "all"):
        dash = state.read_artifact("dashboard", "analyze")
        rows = dash["prevalence"]
        if wave not in ("all", ""):
            rows = [r for r in rows if r["wave"] == wave]
        return {"prevalence": rows, "waves": dash["waves"], "unmapped": dash["unmapped"]}

    @app.get("/api/analytics/strata")
    def analytics_strata(dim: str = "gender"):
        dash = state.read_artifact("dashboard", "analyze")
        rows = [r for r in dash["strata"] if r["dim"] == dim]
        return {"strata": rows, "disparities": [d for d in dash["disparities"] if d["dimension"] == dim]}

    @app.get("/api/analytics/sentiment")
    def analytics_sentiment():
        dash = state.read_artifact("dashboard", "analyze")
        return {"sentiment": dash["sentiment"]}

    @app.get("/api/report")
    def get_report():
        p = state.pipeline.path("report")
        if not p.exists():
            return _error(404, "missing_report", "run `needlens report` first")
        return {"markdown": p.read_text(encoding="utf-8")}

    @app.post("/api/runs/extract")
    def run_extract():
        if not state.start_reextract():
            return _error(409, "conflict", "a run is already in progress")
        return {"reextract": "started"}

    @app.get("/api/runs/status")
    def run_status():
        return state.run_status

    return app
