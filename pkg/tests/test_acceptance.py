"""Acceptance suite: one test per shipped guarantee, each printing a single
PASS/FAIL line and enforcing its runtime budget.

Run with `pytest tests/test_acceptance.py -v` for the per-criterion lines.
"""

import itertools
import json
import math
import random
import time
from dataclasses import replace

import numpy as np
import pytest

from needlens.analytics import (
    NeedAssignment,
    assign_needs,
    count_needs,
    prevalence,
    stratified_prevalence,
)
from needlens.config import PipelineConfig
from needlens.fixtures import make_demo, make_scale
from needlens.graph import (
    CATEGORY_NEED,
    GraphDelta,
    GraphEdge,
    GraphError,
    GraphNode,
    NeedGraph,
    build_wave_delta,
    init_scaffold,
    need_node_id,
)
from needlens.ingestion import ingest_registry, link_and_stamp, load_stopwords
from needlens.lexicon import load_lexicon
from needlens.ontology import load_ontology
from needlens.pipeline import Pipeline
from needlens.topic_model import TopicModelConfig, fit, select_k
from needlens.waves import WAVES

from conftest import make_corpus


def check(name: str, ok: bool, detail: str = "") -> None:
    line = f"[ACCEPTANCE] {name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


class Budget:
    """Context manager asserting a wall-clock runtime budget."""

    def __init__(self, seconds: float):
        self.limit = seconds

    def __enter__(self):
        self.start = time.monotonic()
        return self

    def __exit__(self, *exc):
        self.seconds = time.monotonic() - self.start
        if exc[0] is None:
            assert self.seconds < self.limit, (
                f"runtime {self.seconds:.1f}s exceeds budget {self.limit}s"
            )


# ---------------------------------------------------------------------------
# 1. Gibbs oracle equivalence
# ---------------------------------------------------------------------------


def _exact_token_marginals(docs, V, K, alpha, beta):
    """Exact per-token posterior P(z_i = k | w) by enumerating every
    assignment vector, weighted by the collapsed LDA joint."""
    positions = [(d, i) for d, doc in enumerate(docs) for i in range(len(doc))]
    n_tokens = len(positions)
    log_weights = []
    assignments = list(itertools.product(range(K), repeat=n_tokens))
    for z in assignments:
        n_dk = [[0] * K for _ in docs]
        n_kw = [[0] * V for _ in range(K)]
        n_k = [0] * K
        for (d, i), k in zip(positions, z):
            n_dk[d][k] += 1
            n_kw[k][docs[d][i]] += 1
            n_k[k] += 1
        logw = 0.0
        for d in range(len(docs)):
            for k in range(K):
                logw += math.lgamma(n_dk[d][k] + alpha)
        for k in range(K):
            logw -= math.lgamma(n_k[k] + V * beta)
            for w in range(V):
                logw += math.lgamma(n_kw[k][w] + beta)
        log_weights.append(logw)
    m = max(log_weights)
    weights = [math.exp(lw - m) for lw in log_weights]
    total = sum(weights)
    marginals = [np.zeros((len(doc), K)) for doc in docs]
    for z, w in zip(assignments, weights):
        for (d, i), k in zip(positions, z):
            marginals[d][i, k] += w
    return [m / total for m in marginals]


def test_gibbs_sampler_matches_exact_posterior():
    corpus = make_corpus(
        [
            ("d1", "u1", "M3", ["a", "b", "a"]),
            ("d2", "u1", "M3", ["c", "d", "c"]),
        ]
    )
    docs = [corpus.doc_term["d1"], corpus.doc_term["d2"]]
    exact = _exact_token_marginals(docs, V=4, K=2, alpha=0.5, beta=0.5)
    cfg = TopicModelConfig(
        K=2,
        alpha=0.5,
        beta=0.5,
        iterations=60_500,  # 60,000 post-burn-in samples per token
        burn_in=500,
        sample_lag=100,
        seed=99,
        track_assignment_marginals=True,
    )
    with Budget(30) as b:
        model = fit(corpus, cfg)
    worst = max(
        float(np.abs(model.assignment_marginals[d] - exact[d]).max()) for d in range(2)
    )
    check(
        "gibbs oracle equivalence",
        worst <= 0.05,
        f"max marginal error {worst:.4f}, {b.seconds:.1f}s",
    )


# ---------------------------------------------------------------------------
# 2-3. Topic recovery and model selection on a known generative model
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def synthetic_lda():
    """500 documents drawn from a known K=5, V=100 LDA model."""
    K, V, D, length = 5, 100, 500, 40
    rng = np.random.default_rng(20_260_823)
    true_phi = rng.dirichlet(np.full(V, 0.08), size=K)
    docs = []
    for d in range(D):
        theta = rng.dirichlet(np.full(K, 0.4))
        topics = rng.choice(K, size=length, p=theta)
        words = [int(rng.choice(V, p=true_phi[k])) for k in topics]
        docs.append((f"d{d:03d}", "u1", "M3", [f"w{w:03d}" for w in words]))
    return make_corpus(docs), true_phi


def _tv(p, q):
    return 0.5 * float(np.abs(p - q).sum())


def _aligned_recovered_phi(model, corpus, V):
    """Model phi re-indexed to generator word ids; unseen words get 0."""
    out = np.zeros((model.phi.shape[0], V))
    index = corpus.vocab_index
    for v in range(V):
        tok = f"w{v:03d}"
        if tok in index:
            out[:, v] = model.phi[:, index[tok]]
    return out


def _greedy_match_tv(recovered, true_phi):
    K = true_phi.shape[0]
    pairs = sorted(
        ((_tv(recovered[i], true_phi[j]), i, j) for i in range(K) for j in range(K))
    )
    used_i, used_j, dists = set(), set(), []
    for d, i, j in pairs:
        if i in used_i or j in used_j:
            continue
        used_i.add(i)
        used_j.add(j)
        dists.append(d)
    return sum(dists) / K


def test_topic_recovery_from_known_model(synthetic_lda):
    corpus, true_phi = synthetic_lda
    cfg = TopicModelConfig(
        K=5, alpha=0.1, beta=0.01, iterations=200, burn_in=80, sample_lag=6, seed=5
    )
    with Budget(300) as b:
        model = fit(corpus, cfg)
    recovered = _aligned_recovered_phi(model, corpus, true_phi.shape[1])
    mean_tv = _greedy_match_tv(recovered, true_phi)
    check(
        "topic recovery",
        mean_tv < 0.15,
        f"mean TV {mean_tv:.3f}, {b.seconds:.1f}s",
    )


def test_model_selection_finds_true_k(synthetic_lda):
    corpus, _ = synthetic_lda
    cfg = TopicModelConfig(
        K=5,
        alpha=2.5,  # shared across candidates so only K varies
        iterations=150,
        burn_in=60,
        sample_lag=6,
        seed=5,
        heldout_fraction=0.1,
    )
    with Budget(600) as b:
        report, _models = select_k(corpus, [2, 5, 10], cfg)
    perp = {r["K"]: r["perplexity"] for r in report.results}
    check(
        "model selection",
        report.selected_K == 5,
        f"selected K={report.selected_K}, perplexities {perp}, {b.seconds:.1f}s",
    )


# ---------------------------------------------------------------------------
# 4. Prevalence normalization and partition conservation
# ---------------------------------------------------------------------------


def test_prevalence_normalization_and_conservation():
    rng = random.Random(17)
    needs = [f"need {c}" for c in "abcde"]
    with Budget(5):
        for trial in range(100):
            wave = rng.choice(WAVES)
            assignments = [
                NeedAssignment(f"d{i}", f"u{rng.randint(0, 9)}", wave, rng.choice(needs))
                for i in range(rng.randint(1, 80))
            ]
            counts = count_needs(assignments, wave)
            p = prevalence(counts)
            assert abs(sum(p.values()) - 1.0) <= 1e-9, f"trial {trial} not normalized"
            per_doc = {}
            for a in assignments:
                per_doc[a.need_label] = per_doc.get(a.need_label, 0) + 1
            assert per_doc == counts, f"trial {trial} counts not conserved"
    check("prevalence normalization + conservation", True, "100 randomized trials")


# ---------------------------------------------------------------------------
# 5. Engineered gender-ratio fixture
# ---------------------------------------------------------------------------


def test_gender_ratio_fixture():
    """Equal-size gender strata where women's mental-health documents
    outnumber men's 14:10 over a common denominator of 25 documents each."""
    mental = "Feeling anxious and stressed, really need counselling or therapy."
    food = "Getting food and groceries delivery has been the main worry, meals and supplies."
    registry_rows = [f"w{i},34,female,{1 + i % 10}" for i in range(25)] + [
        f"m{i},34,male,{1 + i % 10}" for i in range(25)
    ]
    feedback_rows = []
    for i in range(25):
        feedback_rows.append({"user_id": f"w{i}", "wave": "6m", "text": mental if i < 14 else food})
        feedback_rows.append({"user_id": f"m{i}", "wave": "6m", "text": mental if i < 10 else food})
    csv_bytes = ("user_id,age,gender,imd_decile\n" + "\n".join(registry_rows)).encode()
    jsonl_bytes = "\n".join(json.dumps(r) for r in feedback_rows).encode()

    with Budget(60) as b:
        registry, _ = ingest_registry(csv_bytes)
        corpus, _ = link_and_stamp(jsonl_bytes, registry, load_stopwords(), min_df=1)
        assignments = assign_needs(corpus, load_lexicon())
        sp = stratified_prevalence(assignments, registry, "gender", "M6")
    ratio = (
        sp.by_subgroup["female"]["mental-health support"]
        / sp.by_subgroup["male"]["mental-health support"]
    )
    check(
        "gender prevalence ratio fixture",
        abs(ratio - 1.4) <= 0.01,
        f"ratio {ratio:.3f}, {b.seconds:.1f}s",
    )


# ---------------------------------------------------------------------------
# 6. Incremental graph build equals batch build
# ---------------------------------------------------------------------------


def test_incremental_equals_batch_graph():
    ontology = load_ontology()
    lexicon = load_lexicon()
    per_wave = {
        "M3": {"food needs": ["d1", "d2"]},
        "M6": {"food needs": ["d3"], "mental-health support": ["d4"]},
        "M12": {"movement restrictions": ["d5"]},
        "M24": {"social connection": ["d6"], "food needs": ["d7"]},
    }
    with Budget(10):
        incremental = init_scaffold(ontology)
        for wave in WAVES:
            delta = build_wave_delta(wave, per_wave[wave], lexicon, ontology, incremental)
            incremental.apply_delta(delta)

        # batch: per-wave deltas computed against the bare scaffold, merged
        # into one delta applied at the final wave
        scaffold = init_scaffold(ontology)
        merged = GraphDelta(wave="M24")
        for wave in WAVES:
            delta = build_wave_delta(wave, per_wave[wave], lexicon, ontology, scaffold)
            merged.add_nodes.extend(delta.add_nodes)
            merged.add_edges.extend(delta.add_edges)
        batch = init_scaffold(ontology).apply_delta(merged)
    check(
        "incremental = batch graph",
        incremental.canonical_json() == batch.canonical_json(),
        "byte-identical canonical serialization",
    )


# ---------------------------------------------------------------------------
# 7. Monotone growth and layer typing under randomized deltas
# ---------------------------------------------------------------------------


def test_randomized_deltas_monotone_and_typed():
    ontology = load_ontology()
    rng = random.Random(2024)
    cases = 0
    with Budget(30):
        while cases < 1000:
            g = init_scaffold(ontology)
            bcio_ids = [n.node_id for n in g.nodes.values() if n.layer == "BcioClass"]
            for wave in WAVES:
                if cases >= 1000:
                    break
                nodes, edges = [], []
                for _ in range(rng.randint(0, 4)):
                    label = f"need {rng.randint(0, 9)}"
                    nid = need_node_id(label)
                    prov = frozenset({f"d{rng.randint(0, 999)}"})
                    nodes.append(GraphNode(nid, "Need", label, wave))
                    edges.append(GraphEdge(nid, CATEGORY_NEED, "belongs_to", wave, prov))
                    if rng.random() < 0.5:
                        edges.append(GraphEdge(nid, rng.choice(bcio_ids), "is_a", wave, prov))
                before_nodes, before_edges = set(g.nodes), set(g.edges)
                before_prov = {k: e.provenance for k, e in g.edges.items()}
                g.apply_delta(GraphDelta(wave=wave, add_nodes=nodes, add_edges=edges))
                cases += 1
                assert before_nodes <= set(g.nodes), "node set shrank"
                assert before_edges <= set(g.edges), "edge set shrank"
                for k, prov in before_prov.items():
                    assert prov <= g.edges[k].provenance, "provenance shrank"
                for e in g.edges.values():
                    g._check_edge_typing(e, {})
            # ill-typed injections are always rejected
            bad = GraphEdge(rng.choice(bcio_ids), CATEGORY_NEED, "belongs_to", "M24")
            with pytest.raises(GraphError):
                NeedGraph.from_dict(init_scaffold(ontology).to_dict()).apply_delta(
                    GraphDelta(wave="M3", add_edges=[bad])
                )
    check("monotone growth + layer typing", True, f"{cases} randomized deltas")


# ---------------------------------------------------------------------------
# 8. End-to-end determinism
# ---------------------------------------------------------------------------


def _demo_config(data_dir, out_dir):
    return PipelineConfig(
        registry_path=str(data_dir / "registry.csv"),
        feedback_path=str(data_dir / "feedback.jsonl"),
        output_dir=str(out_dir),
        topics=5,
        iterations=150,
        burn_in=60,
        sample_lag=5,
        seed=7,
    )


def test_end_to_end_determinism(tmp_path):
    data = tmp_path / "data"
    make_demo(data, seed=7)
    with Budget(120) as b:
        digests = []
        for run in ("run1", "run2"):
            cfg = _demo_config(data, tmp_path / run)
            pipe = Pipeline(cfg, use_llm=False)
            pipe.run_all(auto_label=True)
            digests.append(pipe.artifact_digests())
    assert set(digests[0]) >= {"corpus", "model", "graph", "dashboard", "report"}
    check(
        "end-to-end determinism",
        digests[0] == digests[1],
        f"{len(digests[0])} artifact digests identical, {b.seconds:.1f}s",
    )


# ---------------------------------------------------------------------------
# 9. Scale smoke test
# ---------------------------------------------------------------------------


def test_scale_smoke(tmp_path):
    data = tmp_path / "data"
    users, docs = make_scale(data, seed=3)
    assert users == 1045 and docs == 3812
    cfg = _demo_config(data, tmp_path / "out")
    cfg = replace(cfg, topics=6, iterations=120, burn_in=60, sample_lag=6, seed=3)
    with Budget(600) as b:
        pipe = Pipeline(cfg, use_llm=False)
        pipe.run_all(auto_label=True)
    dash = json.loads((tmp_path / "out" / "dashboard.json").read_text())
    check(
        "scale smoke (1045 users / 3812 docs)",
        set(dash["waves"]) == set(WAVES),
        f"full pipeline in {b.seconds:.1f}s",
    )
