"""Stage functions behind the CLI and the HTTP service. Each stage reads
its upstream artifacts from the output directory, writes versioned JSON
artifacts and records digests in the run manifest."""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

from . import analytics, extraction, ingestion, topic_model
from .config import PipelineConfig
from .graph import NeedGraph, init_scaffold
from .lexicon import SeedLexicon, load_lexicon, save_lexicon
from .llm import LlmClient
from .manifest import RunManifest, StageTimer, sha256_file, sha256_obj
from .ontology import load_ontology
from .sentiment import ValenceLexicon, ValenceScorer


class StageError(Exception):
    """A stage was invoked before its upstream artifacts exist."""


ART = {
    "registry": "registry.json",
    "corpus": "corpus.json",
    "ingest_report": "ingest_report.json",
    "model": "model.json",
    "perplexity": "perplexity.json",
    "tags": "tags.json",
    "lexicon": "lexicon.json",
    "graph": "graph.json",
    "deltas": "deltas.json",
    "assignments": "assignments.json",
    "dashboard": "dashboard.json",
    "report": "report.md",
}


def _config_hash(cfg: PipelineConfig) -> str:
    return sha256_obj(dataclasses.asdict(cfg))


class Pipeline:
    def __init__(self, cfg: PipelineConfig, use_llm: bool = True):
        self.cfg = cfg
        self.out = Path(cfg.output_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.manifest = RunManifest(self.out / "manifest.json", _config_hash(cfg))
        self.llm = LlmClient(cfg.llm_url) if (use_llm and cfg.llm_url) else None

    # -- artifact helpers ---------------------------------------------------

    def path(self, name: str) -> Path:
        return self.out / ART[name]

    def _write_json(self, name: str, obj) -> Path:
        p = self.path(name)
        with open(p, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, sort_keys=True, separators=(",", ":"))
        return p

    def _read_json(self, name: str, needed_by: str, produced_by: str):
        p = self.path(name)
        if not p.exists():
            raise StageError(
                f"{needed_by}: {p.name} missing; run `needlens {produced_by}` first"
            )
        with open(p, encoding="utf-8") as fh:
            return json.load(fh)

    # -- stages -------------------------------------------------------------

    def ingest(self) -> dict:
        cfg = self.cfg
        cfg.validate_inputs()
        stopwords = ingestion.load_stopwords(cfg.stopwords_path)
        with StageTimer() as t:
            registry_bytes = Path(cfg.registry_path).read_bytes()
            feedback_bytes = Path(cfg.feedback_path).read_bytes()
            registry, reg_report = ingestion.ingest_registry(registry_bytes)
            corpus, doc_report = ingestion.link_and_stamp(
                feedback_bytes,
                registry,
                stopwords,
                tuple(cfg.boilerplate),
                cfg.min_df,
                cfg.max_df_frac,
            )
            report = {
                "registry": reg_report.to_dict(),
                "feedback": doc_report.to_dict(),
            }
            outputs = {
                "registry": self._write_json("registry", ingestion.registry_to_dict(registry)),
                "corpus": self._write_json("corpus", ingestion.corpus_to_dict(corpus)),
                "ingest_report": self._write_json("ingest_report", report),
            }
        self.manifest.record_stage(
            "ingest",
            {
                "registry_csv": sha256_file(cfg.registry_path),
                "feedback_jsonl": sha256_file(cfg.feedback_path),
            },
            {k: sha256_file(p) for k, p in outputs.items()},
            t.seconds,
        )
        return report

    def _load_corpus(self, needed_by: str):
        return ingestion.corpus_from_dict(self._read_json("corpus", needed_by, "ingest"))

    def _load_registry(self, needed_by: str):
        return ingestion.registry_from_dict(self._read_json("registry", needed_by, "ingest"))

    def train(self) -> dict:
        cfg = self.cfg
        corpus = self._load_corpus("train")
        tm_cfg = topic_model.TopicModelConfig(
            K=cfg.topics,
            alpha=cfg.alpha,
            beta=cfg.beta,
            iterations=cfg.iterations,
            burn_in=cfg.burn_in,
            sample_lag=cfg.sample_lag,
            seed=cfg.seed,
            heldout_fraction=cfg.heldout_fraction,
        )
        with StageTimer() as t:
            outputs = {}
            if cfg.select_topics:
                report, _models = topic_model.select_k(corpus, cfg.topic_candidates, tm_cfg)
                outputs["perplexity"] = self._write_json("perplexity", report.to_dict())
                tm_cfg = tm_cfg.with_k(report.selected_K)
            model = topic_model.fit(corpus, tm_cfg)
            outputs["model"] = self._write_json("model", topic_model.model_to_dict(model))
        self.manifest.record_stage(
            "train",
            {"corpus": sha256_file(self.path("corpus"))},
            {k: sha256_file(p) for k, p in outputs.items()},
            t.seconds,
        )
        return {"K": model.K, "perplexity_trace": model.perplexity_trace}

    def auto_label(self, n_terms: int = 10) -> dict:
        """Heuristic topic labeling by top-term overlap with lexicon
        keywords; stands in for expert labeling in the demo pipeline."""
        model = topic_model.model_from_dict(self._read_json("model", "auto_label", "train"))
        lexicon_path = self.path("lexicon")
        if lexicon_path.exists():
            lexicon = SeedLexicon.from_dict(self._read_json("lexicon", "auto_label", "extract"))
        else:
            lexicon = load_lexicon(self.cfg.lexicon_path)
        assigned = {}
        for k in range(model.K):
            terms = {t for t, _w in topic_model.top_terms(model, k, n_terms)}
            scores = {
                label: len(terms & entry.keywords)
                for label, entry in lexicon.entries.items()
            }
            best = min(scores, key=lambda l: (-scores[l], l))
            if scores[best] > 0:
                entry = lexicon.entries[best]
                lexicon.apply_expert_label(k, best, kind=entry.kind, n_topics=model.K, actor="auto")
                assigned[k] = best
        save_lexicon(lexicon, lexicon_path)
        return {"assigned": assigned}

    def extract(self) -> dict:
        cfg = self.cfg
        corpus = self._load_corpus("extract")
        model = topic_model.model_from_dict(self._read_json("model", "extract", "train"))
        ontology = load_ontology(cfg.ontology_path)
        lexicon_path = self.path("lexicon")
        if lexicon_path.exists():
            lexicon = SeedLexicon.from_dict(self._read_json("lexicon", "extract", "extract"))
        else:
            lexicon = load_lexicon(cfg.lexicon_path)
        with StageTimer() as t:
            scaffold = init_scaffold(ontology)
            run = extraction.extract_all(
                corpus, model, lexicon, ontology, scaffold, cfg.tau, self.llm
            )
            outputs = {
                "tags": self._write_json(
                    "tags", {"version": "tags/1", "tags": [x.to_dict() for x in run.tags]}
                ),
                "graph": self.path("graph"),
                "deltas": self._write_json(
                    "deltas",
                    {
                        "version": "deltas/1",
                        "deltas": [
                            {
                                "wave": d.wave,
                                "add_nodes": [dataclasses.asdict(n) for n in d.add_nodes],
                                "add_edges": [
                                    {
                                        "src": e.src,
                                        "dst": e.dst,
                                        "relation": e.relation,
                                        "first_seen": e.first_seen,
                                        "provenance": sorted(e.provenance),
                                    }
                                    for e in d.add_edges
                                ],
                            }
                            for d in run.deltas
                        ],
                    },
                ),
            }
            self.path("graph").write_text(run.graph.canonical_json(), encoding="utf-8")
            save_lexicon(run.lexicon, lexicon_path)
            outputs["lexicon"] = lexicon_path
        self.manifest.record_stage(
            "extract",
            {
                "corpus": sha256_file(self.path("corpus")),
                "model": sha256_file(self.path("model")),
            },
            {k: sha256_file(p) for k, p in outputs.items()},
            t.seconds,
        )
        return {"tags": len(run.tags), "graph_nodes": len(run.graph.nodes)}

    def analyze(self) -> dict:
        cfg = self.cfg
        corpus = self._load_corpus("analyze")
        registry = self._load_registry("analyze")
        lexicon_obj = self._read_json("lexicon", "analyze", "extract")
        lexicon = SeedLexicon.from_dict(lexicon_obj)
        scorer = ValenceScorer(ValenceLexicon.load(cfg.valence_path))
        with StageTimer() as t:
            assignments = analytics.assign_needs(corpus, lexicon, llm=self.llm)
            report = analytics.build_report(
                assignments,
                registry,
                corpus,
                lexicon,
                cfg.disparity_threshold,
                llm=self.llm,
                scorer=scorer,
            )
            outputs = {
                "assignments": self._write_json(
                    "assignments",
                    {
                        "version": "assign/1",
                        "assignments": [
                            {
                                "doc_id": a.doc_id,
                                "user_id": a.user_id,
                                "wave": a.wave,
                                "need_label": a.need_label,
                            }
                            for a in assignments
                        ],
                    },
                ),
                "dashboard": self._write_json("dashboard", report.dashboard),
            }
        self.manifest.record_stage(
            "analyze",
            {
                "corpus": sha256_file(self.path("corpus")),
                "lexicon": sha256_file(self.path("lexicon")),
            },
            {k: sha256_file(p) for k, p in outputs.items()},
            t.seconds,
        )
        return {"waves": report.dashboard["waves"], "disparities": len(report.disparities)}

    def report(self) -> dict:
        cfg = self.cfg
        corpus = self._load_corpus("report")
        registry = self._load_registry("report")
        # dashboard is required upstream even though the report recomputes
        # from the same inputs; this keeps stage ordering explicit
        self._read_json("dashboard", "report", "analyze")
        lexicon = SeedLexicon.from_dict(self._read_json("lexicon", "report", "extract"))
        scorer = ValenceScorer(ValenceLexicon.load(cfg.valence_path))
        with StageTimer() as t:
            assignments = analytics.assign_needs(corpus, lexicon, llm=self.llm)
            report = analytics.build_report(
                assignments,
                registry,
                corpus,
                lexicon,
                cfg.disparity_threshold,
                llm=self.llm,
                scorer=scorer,
            )
            markdown = analytics.render_report_markdown(report)
            self.path("report").write_text(markdown, encoding="utf-8")
        self.manifest.record_stage(
            "report",
            {"dashboard": sha256_file(self.path("dashboard"))},
            {"report": sha256_file(self.path("report"))},
            t.seconds,
        )
        return {"narrative_source": report.narrative_source}

    def run_all(self, auto_label: bool = False) -> None:
        self.ingest()
        self.train()
        if auto_label:
            self.auto_label()
        self.extract()
        self.analyze()
        self.report()

    def artifact_digests(self) -> dict[str, str]:
        out = {}
        for name, filename in ART.items():
            p = self.out / filename
            if p.exists():
                out[name] = sha256_file(p)
        return out
