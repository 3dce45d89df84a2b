"""Temporal and demographic need analytics: per-document need scoring,
prevalence series, demographic stratification, sentiment trajectories and
the insight report / dashboard dataset."""

from __future__ import annotations

from dataclasses import dataclass, field

from .extraction import UNMAPPED
from .ingestion import FeedbackDocument, Registry
from .lexicon import SeedLexicon
from .llm import LlmClient, score_needs_via_llm, write_report_via_llm
from .sentiment import ValenceScorer
from .waves import WAVES, wave_order

STRATUM_DIMENSIONS = ("age_band", "gender", "imd_band")

DEFAULT_DISPARITY_THRESHOLD = 1.25


class AnalyticsError(Exception):
    pass


@dataclass(frozen=True)
class NeedAssignment:
    doc_id: str
    user_id: str
    wave: str
    need_label: str  # lexicon label or UNMAPPED
    scores: dict[str, float] = field(default_factory=dict, hash=False, compare=False)


def score_needs(
    doc: FeedbackDocument,
    lexicon: SeedLexicon,
    graph_context: str = "",
    llm: LlmClient | None = None,
) -> dict[str, float] | None:
    """Normalized per-need score vector for one document, or None when no
    need has any support (the document is then counted as UNMAPPED)."""
    labels = sorted(l for l, e in lexicon.entries.items() if e.kind == "need")
    if not labels:
        raise AnalyticsError("lexicon has no needs")
    if llm is not None:
        scores = score_needs_via_llm(llm, doc.clean_text, graph_context, labels)
        if scores is not None:
            return scores
    tokens = set(doc.tokens)
    raw = {
        label: len(tokens & lexicon.entries[label].keywords)
        / max(1, len(lexicon.entries[label].keywords))
        for label in labels
    }
    total = sum(raw.values())
    if total == 0.0:
        return None
    return {label: v / total for label, v in raw.items()}


def argmax_need(scores: dict[str, float]) -> str:
    """Highest-scoring need; ties break to the lexicographically smaller label."""
    return min(scores, key=lambda l: (-scores[l], l))


def assign_needs(
    corpus,
    lexicon: SeedLexicon,
    graph=None,
    llm: LlmClient | None = None,
) -> list[NeedAssignment]:
    """Score every document (deterministic doc_id order) and record the
    argmax need per document."""
    out: list[NeedAssignment] = []
    for doc in sorted(corpus.documents, key=lambda d: d.doc_id):
        scores = score_needs(doc, lexicon, llm=llm)
        if scores is None:
            out.append(NeedAssignment(doc.doc_id, doc.user_id, doc.wave, UNMAPPED))
        else:
            out.append(
                NeedAssignment(doc.doc_id, doc.user_id, doc.wave, argmax_need(scores), scores)
            )
    return out


def count_needs(assignments: list[NeedAssignment], wave: str) -> dict[str, int]:
    """count(n, t): documents whose highest-scoring need is n at wave t.
    UNMAPPED documents are excluded (reported separately)."""
    counts: dict[str, int] = {}
    for a in assignments:
        if a.wave == wave and a.need_label != UNMAPPED:
            counts[a.need_label] = counts.get(a.need_label, 0) + 1
    return counts


def prevalence(counts: dict[str, int], all_needs=None) -> dict[str, float]:
    """P_{n,t} = count(n,t) / sum_{n'} count(n',t); zero-count needs from
    all_needs are included with P = 0."""
    total = sum(counts.values())
    if total == 0:
        raise AnalyticsError("no scored documents in window")
    out = {n: c / total for n, c in counts.items()}
    for n in all_needs or ():
        out.setdefault(n, 0.0)
    return out


@dataclass
class StratifiedPrevalence:
    dimension: str
    wave: str
    by_subgroup: dict[str, dict[str, float]]  # subgroup -> need -> P
    counts: dict[str, dict[str, int]]  # subgroup -> need -> count
    empty_subgroups: list[str] = field(default_factory=list)


def stratified_prevalence(
    assignments: list[NeedAssignment],
    registry: Registry,
    dimension: str,
    wave: str,
) -> StratifiedPrevalence:
    """Prevalence per demographic subgroup; empty subgroups are omitted and
    listed in metadata."""
    if dimension not in STRATUM_DIMENSIONS:
        raise AnalyticsError(f"unknown stratum dimension {dimension!r}")
    by_subgroup: dict[str, dict[str, int]] = {}
    for a in assignments:
        if a.wave != wave or a.need_label == UNMAPPED:
            continue
        record = registry.lookup(a.user_id)
        subgroup = getattr(record, dimension)
        counts = by_subgroup.setdefault(subgroup, {})
        counts[a.need_label] = counts.get(a.need_label, 0) + 1
    prevalences = {d: prevalence(c) for d, c in by_subgroup.items() if c}
    known = {getattr(r, dimension) for r in registry.records}
    return StratifiedPrevalence(
        dimension=dimension,
        wave=wave,
        by_subgroup=prevalences,
        counts=by_subgroup,
        empty_subgroups=sorted(known - set(by_subgroup)),
    )


def sentiment_trajectory(corpus, scorer: ValenceScorer | None = None) -> dict[str, dict]:
    """Per-wave mean valence and class counts, in deterministic order."""
    scorer = scorer or ValenceScorer()
    by_wave: dict[str, list] = {}
    for doc in sorted(corpus.documents, key=lambda d: d.doc_id):
        by_wave.setdefault(doc.wave, []).append(scorer.score(doc))
    out = {}
    for wave in sorted(by_wave, key=wave_order):
        points = by_wave[wave]
        counts = {"negative": 0, "neutral": 0, "positive": 0}
        for p in points:
            counts[p.label] += 1
        out[wave] = {
            "mean_valence": sum(p.valence for p in points) / len(points),
            "class_counts": counts,
            "points": [p.to_dict() for p in points],
        }
    return out


def find_disparities(
    strata: dict[str, dict[str, StratifiedPrevalence]],
    threshold: float = DEFAULT_DISPARITY_THRESHOLD,
) -> list[dict]:
    """Subgroup pairs whose prevalence ratio for a need meets the threshold.

    strata: dimension -> wave -> StratifiedPrevalence.
    """
    found = []
    for dim in sorted(strata):
        for wave in sorted(strata[dim], key=wave_order):
            sp = strata[dim][wave]
            subgroups = sorted(sp.by_subgroup)
            needs = sorted({n for p in sp.by_subgroup.values() for n in p})
            for need in needs:
                for i, a in enumerate(subgroups):
                    for b in subgroups[i + 1:]:
                        pa = sp.by_subgroup[a].get(need, 0.0)
                        pb = sp.by_subgroup[b].get(need, 0.0)
                        if pa == 0.0 or pb == 0.0:
                            continue
                        ratio = max(pa, pb) / min(pa, pb)
                        if ratio >= threshold:
                            hi, lo = (a, b) if pa >= pb else (b, a)
                            found.append(
                                {
                                    "need": need,
                                    "dimension": dim,
                                    "wave": wave,
                                    "higher": hi,
                                    "lower": lo,
                                    "ratio": ratio,
                                }
                            )
    return found


@dataclass
class InsightReport:
    top_needs: dict[str, list[tuple[str, float]]]  # wave -> [(need, P)]
    disparities: list[dict]
    sentiment: dict[str, dict]
    narrative: dict[str, str]
    narrative_source: str  # llm | template
    unmapped: dict[str, int]
    dashboard: dict


def _template_narrative(top_needs, disparities, sentiment) -> dict[str, str]:
    waves = sorted(top_needs, key=wave_order)
    need_lines = []
    for wave in waves:
        ranked = ", ".join(f"{n} ({p:.0%})" for n, p in top_needs[wave])
        need_lines.append(f"{wave}: {ranked}")
    causes = []
    for d in disparities:
        causes.append(
            f"{d['need']} is reported {d['ratio']:.2f}x more by {d['higher']} than "
            f"{d['lower']} ({d['dimension']}, {d['wave']})"
        )
    if not causes:
        causes.append("no subgroup disparity above threshold")
    trend = "; ".join(
        f"{w}: mean valence {sentiment[w]['mean_valence']:+.2f}" for w in sorted(sentiment, key=wave_order)
    )
    return {
        "needs": "Top needs per wave. " + " | ".join(need_lines),
        "causes": "Observed disparities. " + " | ".join(causes),
        "solutions": "Prioritize the highest-prevalence needs and the subgroups "
        "named in the disparity list; sentiment trend: " + (trend or "none"),
    }


def build_report(
    assignments: list[NeedAssignment],
    registry: Registry,
    corpus,
    lexicon: SeedLexicon,
    disparity_threshold: float = DEFAULT_DISPARITY_THRESHOLD,
    llm: LlmClient | None = None,
    scorer: ValenceScorer | None = None,
) -> InsightReport:
    """Aggregate everything into the report plus the dashboard dataset."""
    need_labels = sorted(l for l, e in lexicon.entries.items() if e.kind == "need")
    waves = sorted({a.wave for a in assignments}, key=wave_order)
    if not waves:
        raise AnalyticsError("no analyzed waves")

    series: dict[str, dict[str, float]] = {}
    unmapped: dict[str, int] = {}
    top_needs: dict[str, list[tuple[str, float]]] = {}
    for wave in waves:
        counts = count_needs(assignments, wave)
        unmapped[wave] = sum(
            1 for a in assignments if a.wave == wave and a.need_label == UNMAPPED
        )
        if counts:
            p = prevalence(counts, need_labels)
            series[wave] = p
            ranked = sorted(p.items(), key=lambda kv: (-kv[1], kv[0]))
            top_needs[wave] = [(n, v) for n, v in ranked[:3] if v > 0]

    strata: dict[str, dict[str, StratifiedPrevalence]] = {}
    for dim in STRATUM_DIMENSIONS:
        strata[dim] = {}
        for wave in series:
            strata[dim][wave] = stratified_prevalence(assignments, registry, dim, wave)

    disparities = find_disparities(strata, disparity_threshold)
    sentiment = sentiment_trajectory(corpus, scorer)

    narrative_source = "template"
    narrative = None
    if llm is not None:
        facts = _template_narrative(top_needs, disparities, sentiment)
        narrative = write_report_via_llm(llm, facts=str(facts))
        if narrative is not None:
            narrative_source = "llm"
    if narrative is None:
        narrative = _template_narrative(top_needs, disparities, sentiment)

    dashboard = {
        "version": "dash/1",
        "waves": waves,
        "prevalence": [
            {"need": n, "wave": w, "p": series[w][n]}
            for w in series
            for n in sorted(series[w])
        ],
        "strata": [
            {"need": n, "dim": dim, "subgroup": sg, "wave": w, "p": p}
            for dim in sorted(strata)
            for w in sorted(strata[dim], key=wave_order)
            for sg in sorted(strata[dim][w].by_subgroup)
            for n, p in sorted(strata[dim][w].by_subgroup[sg].items())
        ],
        "sentiment": [
            {
                "wave": w,
                "mean_valence": sentiment[w]["mean_valence"],
                "class_counts": sentiment[w]["class_counts"],
            }
            for w in sorted(sentiment, key=wave_order)
        ],
        "disparities": disparities,
        "unmapped": unmapped,
    }
    return InsightReport(
        top_needs=top_needs,
        disparities=disparities,
        sentiment=sentiment,
        narrative=narrative,
        narrative_source=narrative_source,
        unmapped=unmapped,
        dashboard=dashboard,
    )


def render_report_markdown(report: InsightReport) -> str:
    """Markdown report with a machine-readable JSON front block."""
    import json

    front = {
        "narrative_source": report.narrative_source,
        "waves": report.dashboard["waves"],
        "top_needs": {w: report.top_needs[w] for w in report.top_needs},
        "disparities": report.disparities,
        "unmapped": report.unmapped,
    }
    lines = [
        "```json",
        json.dumps(front, sort_keys=True, indent=2),
        "```",
        "",
        "# Need analysis report",
        "",
        "## Needs",
        report.narrative["needs"],
        "",
        "## Underlying causes",
        report.narrative["causes"],
        "",
        "## Suggested solutions",
        report.narrative["solutions"],
        "",
    ]
    return "\n".join(lines)
