"""Topic modelling by collapsed Gibbs sampling with held-out model selection.

The sampler runs sequentially over tokens in document order so that a fixed
seed gives bit-identical results across runs and platforms. The RNG is
Python's Mersenne Twister (``random.Random``), which is seedable and
portable; this choice is part of the reproducibility contract.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field

import numpy as np

from .ingestion import Corpus


class TopicModelError(Exception):
    pass


@dataclass
class TopicModelConfig:
    K: int = 10
    alpha: float | None = None  # defaults to 50/K
    beta: float = 0.01
    iterations: int = 2000
    burn_in: int = 500
    sample_lag: int = 10
    seed: int = 0
    heldout_fraction: float = 0.1
    track_assignment_marginals: bool = False

    def __post_init__(self):
        if self.K < 1:
            raise TopicModelError("K must be >= 1")
        self._alpha_given = self.alpha is not None
        if self.alpha is None:
            self.alpha = 50.0 / self.K
        if self.alpha <= 0 or self.beta <= 0:
            raise TopicModelError("alpha and beta must be positive")
        if self.burn_in >= self.iterations:
            raise TopicModelError("burn_in must be < iterations")
        if self.sample_lag < 1:
            raise TopicModelError("sample_lag must be >= 1")
        if self.iterations < self.burn_in + self.sample_lag:
            raise TopicModelError("iterations too small to take any posterior sample")
        if not 0.0 < self.heldout_fraction < 1.0:
            raise TopicModelError("heldout_fraction must be in (0, 1)")

    def with_k(self, K: int) -> "TopicModelConfig":
        # an explicitly configured alpha is shared by every candidate K;
        # otherwise each candidate gets the 50/K heuristic
        return TopicModelConfig(
            K=K,
            alpha=self.alpha if self._alpha_given else None,
            beta=self.beta,
            iterations=self.iterations,
            burn_in=self.burn_in,
            sample_lag=self.sample_lag,
            seed=self.seed,
            heldout_fraction=self.heldout_fraction,
            track_assignment_marginals=self.track_assignment_marginals,
        )


@dataclass
class TopicModel:
    config: TopicModelConfig
    vocabulary: list[str]
    doc_ids: list[str]
    phi: np.ndarray  # K x V, posterior-mean
    theta: np.ndarray  # D x K, posterior-mean
    z: list[list[int]]  # final assignments, per doc per token
    n_kw: np.ndarray
    n_dk: np.ndarray
    n_k: np.ndarray
    perplexity_trace: list[tuple[int, float]] = field(default_factory=list)
    assignment_marginals: list[np.ndarray] | None = None  # per doc: N_d x K

    @property
    def K(self) -> int:
        return self.config.K

    @property
    def V(self) -> int:
        return len(self.vocabulary)

    def theta_for(self, doc_id: str) -> np.ndarray:
        return self.theta[self.doc_ids.index(doc_id)]


@dataclass
class PerplexityReport:
    results: list[dict]  # {"K": int, "perplexity": float} or {"K": int, "error": str}
    selected_K: int
    traces: dict[int, list[tuple[int, float]]]

    def to_dict(self) -> dict:
        return {
            "results": self.results,
            "selected_K": self.selected_K,
            "traces": {str(k): [list(p) for p in v] for k, v in self.traces.items()},
        }


def _training_perplexity(docs, n_kw, n_dk, n_k, alpha, beta, K, V) -> float:
    phi = (n_kw + beta) / (n_k[:, None] + V * beta)
    log_lik = 0.0
    n_tokens = 0
    for d, doc in enumerate(docs):
        nd = len(doc)
        theta = (n_dk[d] + alpha) / (nd + K * alpha)
        pw = theta @ phi  # V
        for w in doc:
            log_lik += math.log(pw[w])
        n_tokens += nd
    return math.exp(-log_lik / n_tokens)


def fit(corpus: Corpus, cfg: TopicModelConfig) -> TopicModel:
    """Collapsed Gibbs sampling over the non-empty documents of the corpus."""
    doc_ids = corpus.nonempty_doc_ids()
    docs = [corpus.doc_term[i] for i in doc_ids]
    V = len(corpus.vocabulary)
    if not docs:
        raise TopicModelError("corpus has no non-empty documents")
    if V < 2:
        raise TopicModelError("vocabulary must contain at least 2 terms")

    K = cfg.K
    alpha = cfg.alpha
    beta = cfg.beta
    Vbeta = V * beta
    rng = random.Random(cfg.seed)

    D = len(docs)
    n_dk = [[0] * K for _ in range(D)]
    n_kw = [[0] * V for _ in range(K)]
    n_k = [0] * K
    z = []
    for d, doc in enumerate(docs):
        zs = []
        for w in doc:
            k = rng.randrange(K)
            zs.append(k)
            n_dk[d][k] += 1
            n_kw[k][w] += 1
            n_k[k] += 1
        z.append(zs)

    phi_acc = np.zeros((K, V))
    theta_acc = np.zeros((D, K))
    n_samples = 0
    marginals = None
    if cfg.track_assignment_marginals:
        marginals = [np.zeros((len(doc), K)) for doc in docs]

    checkpoints = sorted(
        {max(1, cfg.iterations // 10), max(1, cfg.iterations // 2), cfg.iterations}
    )
    trace: list[tuple[int, float]] = []

    probs = [0.0] * K
    for sweep in range(1, cfg.iterations + 1):
        for d, doc in enumerate(docs):
            zd = z[d]
            ndk = n_dk[d]
            for i, w in enumerate(doc):
                k = zd[i]
                ndk[k] -= 1
                n_kw[k][w] -= 1
                n_k[k] -= 1
                total = 0.0
                for k2 in range(K):
                    total += (ndk[k2] + alpha) * (n_kw[k2][w] + beta) / (n_k[k2] + Vbeta)
                    probs[k2] = total
                u = rng.random() * total
                k = 0
                while probs[k] < u:
                    k += 1
                zd[i] = k
                ndk[k] += 1
                n_kw[k][w] += 1
                n_k[k] += 1
        if sweep > cfg.burn_in:
            if marginals is not None:
                for d, zd in enumerate(z):
                    md = marginals[d]
                    for i, k in enumerate(zd):
                        md[i, k] += 1
            if (sweep - cfg.burn_in) % cfg.sample_lag == 0:
                nkw = np.asarray(n_kw, dtype=float)
                nk = np.asarray(n_k, dtype=float)
                ndk_arr = np.asarray(n_dk, dtype=float)
                lengths = np.array([len(doc) for doc in docs], dtype=float)
                phi_acc += (nkw + beta) / (nk[:, None] + Vbeta)
                theta_acc += (ndk_arr + alpha) / (lengths[:, None] + K * alpha)
                n_samples += 1
        if sweep in checkpoints:
            trace.append(
                (
                    sweep,
                    _training_perplexity(
                        docs,
                        np.asarray(n_kw, dtype=float),
                        np.asarray(n_dk, dtype=float),
                        np.asarray(n_k, dtype=float),
                        alpha,
                        beta,
                        K,
                        V,
                    ),
                )
            )

    phi = phi_acc / n_samples
    theta = theta_acc / n_samples
    if marginals is not None:
        total_post = cfg.iterations - cfg.burn_in
        marginals = [m / total_post for m in marginals]

    return TopicModel(
        config=cfg,
        vocabulary=list(corpus.vocabulary),
        doc_ids=doc_ids,
        phi=phi,
        theta=theta,
        z=z,
        n_kw=np.asarray(n_kw),
        n_dk=np.asarray(n_dk),
        n_k=np.asarray(n_k),
        perplexity_trace=trace,
        assignment_marginals=marginals,
    )


def fold_in(
    model: TopicModel,
    token_ids: list[int],
    rng: random.Random,
    sweeps: int = 100,
    average_last: int = 50,
) -> np.ndarray:
    """Estimate a document-topic mixture for an unseen document with phi frozen."""
    K = model.K
    alpha = model.config.alpha
    phi = model.phi
    ndk = [0] * K
    zs = []
    for _ in token_ids:
        k = rng.randrange(K)
        zs.append(k)
        ndk[k] += 1

    theta_acc = np.zeros(K)
    n_avg = 0
    probs = [0.0] * K
    for sweep in range(1, sweeps + 1):
        for i, w in enumerate(token_ids):
            k = zs[i]
            ndk[k] -= 1
            total = 0.0
            for k2 in range(K):
                total += (ndk[k2] + alpha) * phi[k2, w]
                probs[k2] = total
            u = rng.random() * total
            k = 0
            while probs[k] < u:
                k += 1
            zs[i] = k
            ndk[k] += 1
        if sweep > sweeps - average_last:
            nd = len(token_ids)
            theta_acc += (np.asarray(ndk, dtype=float) + alpha) / (nd + K * alpha)
            n_avg += 1
    return theta_acc / n_avg


def heldout_perplexity(model: TopicModel, heldout: Corpus) -> float:
    """Held-out perplexity via fold-in estimation of document mixtures."""
    index = {tok: i for i, tok in enumerate(model.vocabulary)}
    docs: list[list[int]] = []
    oov = 0
    for d in heldout.documents:
        ids = []
        for tok in d.tokens:
            wid = index.get(tok)
            if wid is None:
                oov += 1
            else:
                ids.append(wid)
        if ids:
            docs.append(ids)
    if not docs:
        raise TopicModelError("held-out set is empty or entirely out-of-vocabulary")

    log_lik = 0.0
    n_tokens = 0
    for i, ids in enumerate(docs):
        rng = random.Random(f"{model.config.seed}:heldout:{i}")
        theta_hat = fold_in(model, ids, rng)
        pw = theta_hat @ model.phi
        for w in ids:
            log_lik += math.log(pw[w])
        n_tokens += len(ids)
    return math.exp(-log_lik / n_tokens)


def _split_corpus(corpus: Corpus, heldout_fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Seeded document-level split; both halves share the full vocabulary."""
    from .ingestion import Corpus as C

    nonempty = [d for d in corpus.documents if not d.empty]
    order = list(range(len(nonempty)))
    random.Random(seed).shuffle(order)
    n_held = max(1, int(round(heldout_fraction * len(nonempty))))
    if n_held >= len(nonempty):
        raise TopicModelError("heldout_fraction leaves no training documents")
    held_idx = set(order[:n_held])
    train_docs = [d for i, d in enumerate(nonempty) if i not in held_idx]
    held_docs = [d for i, d in enumerate(nonempty) if i in held_idx]
    train = C(
        documents=train_docs,
        vocabulary=corpus.vocabulary,
        doc_term={d.doc_id: corpus.doc_term[d.doc_id] for d in train_docs},
    )
    held = C(
        documents=held_docs,
        vocabulary=corpus.vocabulary,
        doc_term={d.doc_id: corpus.doc_term[d.doc_id] for d in held_docs},
    )
    return train, held


TIE_TOLERANCE = 1e-6


def select_k(
    corpus: Corpus,
    candidates: list[int],
    cfg_template: TopicModelConfig,
) -> tuple[PerplexityReport, dict[int, TopicModel]]:
    """Fit every candidate K on a seeded train split and pick the held-out
    perplexity argmin; ties within tolerance go to the smaller K."""
    if len(candidates) < 2:
        raise TopicModelError("need >= 2 candidate K values")
    train, held = _split_corpus(corpus, cfg_template.heldout_fraction, cfg_template.seed)

    results: list[dict] = []
    traces: dict[int, list[tuple[int, float]]] = {}
    models: dict[int, TopicModel] = {}
    for K in candidates:
        try:
            model = fit(train, cfg_template.with_k(K))
            ppl = heldout_perplexity(model, held)
            results.append({"K": K, "perplexity": ppl})
            traces[K] = model.perplexity_trace
            models[K] = model
        except TopicModelError as exc:
            results.append({"K": K, "error": str(exc)})
    scored = [r for r in results if "perplexity" in r]
    if not scored:
        raise TopicModelError("every candidate K failed to fit")
    best = min(scored, key=lambda r: (r["perplexity"], r["K"]))
    selected = min(
        (r["K"] for r in scored if r["perplexity"] <= best["perplexity"] + TIE_TOLERANCE)
    )
    return PerplexityReport(results=results, selected_K=selected, traces=traces), models


def top_terms(model: TopicModel, k: int, m: int) -> list[tuple[str, float]]:
    """The m highest-weight terms of topic k; ties break by token id."""
    if not 0 <= k < model.K:
        raise TopicModelError(f"topic id {k} out of range 0..{model.K - 1}")
    if m < 1:
        raise TopicModelError("m must be >= 1")
    row = model.phi[k]
    order = sorted(range(model.V), key=lambda w: (-row[w], w))
    return [(model.vocabulary[w], float(row[w])) for w in order[:m]]


def vocabulary_hash(vocabulary: list[str]) -> str:
    h = hashlib.sha256("\n".join(vocabulary).encode("utf-8"))
    return h.hexdigest()


def model_to_dict(model: TopicModel) -> dict:
    return {
        "version": "tm/1",
        "config": {
            "K": model.config.K,
            "alpha": model.config.alpha,
            "beta": model.config.beta,
            "iterations": model.config.iterations,
            "burn_in": model.config.burn_in,
            "sample_lag": model.config.sample_lag,
            "seed": model.config.seed,
            "heldout_fraction": model.config.heldout_fraction,
        },
        "vocabulary_hash": vocabulary_hash(model.vocabulary),
        "vocabulary": model.vocabulary,
        "doc_ids": model.doc_ids,
        "phi": model.phi.tolist(),
        "theta": model.theta.tolist(),
        "perplexity_trace": [list(p) for p in model.perplexity_trace],
        "seed": model.config.seed,
    }


def model_from_dict(obj: dict) -> TopicModel:
    if obj.get("version") != "tm/1":
        raise TopicModelError(f"unsupported model version {obj.get('version')!r}")
    cfg = TopicModelConfig(**obj["config"])
    phi = np.asarray(obj["phi"], dtype=float)
    theta = np.asarray(obj["theta"], dtype=float)
    return TopicModel(
        config=cfg,
        vocabulary=list(obj["vocabulary"]),
        doc_ids=list(obj["doc_ids"]),
        phi=phi,
        theta=theta,
        z=[],
        n_kw=np.zeros_like(phi, dtype=int),
        n_dk=np.zeros_like(theta, dtype=int),
        n_k=np.zeros(phi.shape[0], dtype=int),
        perplexity_trace=[tuple(p) for p in obj.get("perplexity_trace", [])],
    )


def save_model(model: TopicModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh)


def load_model(path) -> TopicModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
