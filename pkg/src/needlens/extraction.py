"""Need recognition from topic mixtures, MoA alignment and per-wave
extraction that feeds the need graph."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import GraphDelta, NeedGraph, build_wave_delta
from .lexicon import AuditLog, LexiconError, SeedLexicon
from .llm import LlmClient, align_moa_via_llm
from .ontology import Ontology, OntologyError, label_tokens
from .topic_model import TopicModel
from .waves import WAVES, wave_order

UNMAPPED = "UNMAPPED"

DEFAULT_TAU = 0.25


@dataclass(frozen=True)
class NeedTag:
    doc_id: str
    need_label: str  # a lexicon label or UNMAPPED
    score: float
    source: str  # rule | llm | expert
    wave: str

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "need_label": self.need_label,
            "score": self.score,
            "source": self.source,
            "wave": self.wave,
        }


def recognize_needs(
    doc_id: str,
    wave: str,
    theta_d: np.ndarray,
    lexicon: SeedLexicon,
    tau: float = DEFAULT_TAU,
) -> NeedTag:
    """Additive-theta rule: a need's score is the total mixture weight of its
    mapped topics; tag the argmax when it clears tau, else UNMAPPED."""
    if not lexicon.entries:
        raise LexiconError("lexicon is empty")
    scores: dict[str, float] = {}
    for label, entry in lexicon.entries.items():
        if entry.topic_ids:
            scores[label] = float(sum(theta_d[k] for k in entry.topic_ids))
    if not scores:
        return NeedTag(doc_id, UNMAPPED, 0.0, "rule", wave)
    best_label = min(scores, key=lambda l: (-scores[l], l))
    best = scores[best_label]
    if best >= tau:
        return NeedTag(doc_id, best_label, best, "rule", wave)
    return NeedTag(doc_id, UNMAPPED, best, "rule", wave)


def align_moa(
    need_label: str,
    lexicon: SeedLexicon,
    ontology: Ontology,
    llm: LlmClient | None = None,
) -> str | None:
    """Resolve a need's MoA concept. Existing resolutions are retained; new
    ones come from the LLM when configured, else from a Jaccard match of the
    need's keywords against MoA concept labels."""
    entry = lexicon.entries.get(need_label)
    if entry is None:
        raise LexiconError(f"unknown need label {need_label!r}")
    if not ontology.nodes:
        raise OntologyError("ontology is empty")
    if entry.moa_concept is not None:
        return entry.moa_concept

    if llm is not None:
        node_id = align_moa_via_llm(llm, need_label, entry.keywords, ontology)
        if node_id is not None:
            entry.moa_concept = node_id
            return node_id

    keywords = frozenset(entry.keywords) or label_tokens(need_label)
    best_id = None
    best_score = 0.0
    for node in ontology.by_layer("moa_concept"):
        tokens = label_tokens(node.label)
        union = keywords | tokens
        score = len(keywords & tokens) / len(union) if union else 0.0
        if score > best_score:
            best_score = score
            best_id = node.id
    if best_id is None:
        return None
    entry.moa_concept = best_id
    return best_id


@dataclass
class WaveExtraction:
    wave: str
    tags: list[NeedTag]
    lexicon: SeedLexicon
    delta: GraphDelta
    unmapped_count: int = 0


def extract_wave(
    corpus,
    wave: str,
    model: TopicModel,
    lexicon: SeedLexicon,
    ontology: Ontology,
    graph: NeedGraph,
    tau: float = DEFAULT_TAU,
    llm: LlmClient | None = None,
) -> WaveExtraction:
    """Tag every document of a wave, align any newly tagged needs and build
    the incremental graph delta. The input lexicon is not mutated."""
    lexicon = lexicon.copy()
    theta_index = {doc_id: i for i, doc_id in enumerate(model.doc_ids)}
    docs = sorted(
        (d for d in corpus.documents if d.wave == wave), key=lambda d: d.doc_id
    )
    tags: list[NeedTag] = []
    need_docs: dict[str, list[str]] = {}
    for doc in docs:
        idx = theta_index.get(doc.doc_id)
        if idx is None:
            tags.append(NeedTag(doc.doc_id, UNMAPPED, 0.0, "rule", wave))
            continue
        tag = recognize_needs(doc.doc_id, wave, model.theta[idx], lexicon, tau)
        tags.append(tag)
        if tag.need_label != UNMAPPED:
            need_docs.setdefault(tag.need_label, []).append(doc.doc_id)

    for label in sorted(need_docs):
        align_moa(label, lexicon, ontology, llm)

    delta = build_wave_delta(wave, need_docs, lexicon, ontology, graph)
    unmapped = sum(1 for t in tags if t.need_label == UNMAPPED)
    return WaveExtraction(wave=wave, tags=tags, lexicon=lexicon, delta=delta, unmapped_count=unmapped)


@dataclass
class ExtractionRun:
    tags: list[NeedTag] = field(default_factory=list)
    lexicon: SeedLexicon | None = None
    graph: NeedGraph | None = None
    deltas: list[GraphDelta] = field(default_factory=list)


def extract_all(
    corpus,
    model: TopicModel,
    lexicon: SeedLexicon,
    ontology: Ontology,
    scaffold: NeedGraph,
    tau: float = DEFAULT_TAU,
    llm: LlmClient | None = None,
    waves: tuple[str, ...] = WAVES,
) -> ExtractionRun:
    """Run wave extraction in wave order, applying each delta as it lands."""
    run = ExtractionRun(lexicon=lexicon, graph=scaffold)
    for wave in sorted(waves, key=wave_order):
        result = extract_wave(
            corpus, wave, model, run.lexicon, ontology, run.graph, tau, llm
        )
        run.lexicon = result.lexicon
        run.graph.apply_delta(result.delta)
        run.deltas.append(result.delta)
        run.tags.extend(result.tags)
    return run
