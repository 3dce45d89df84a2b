import json

import pytest

from needlens.ingestion import Corpus, FeedbackDocument
from needlens.lexicon import load_lexicon
from needlens.ontology import load_ontology


@pytest.fixture(scope="session")
def ontology():
    return load_ontology()


@pytest.fixture
def seed_lexicon():
    return load_lexicon()


def make_corpus(docs):
    """Corpus from (doc_id, user_id, wave, tokens) tuples with an unfiltered
    vocabulary in first-seen order."""
    vocab = []
    index = {}
    documents = []
    doc_term = {}
    for doc_id, user_id, wave, tokens in docs:
        for t in tokens:
            if t not in index:
                index[t] = len(vocab)
                vocab.append(t)
        d = FeedbackDocument(
            doc_id=doc_id,
            user_id=user_id,
            wave=wave,
            raw_text=" ".join(tokens),
            clean_text=" ".join(tokens),
            tokens=list(tokens),
            sentences=[(0, len(" ".join(tokens)))],
        )
        if tokens:
            doc_term[doc_id] = [index[t] for t in tokens]
        else:
            d.empty = True
        documents.append(d)
    return Corpus(documents=documents, vocabulary=vocab, doc_term=doc_term)


@pytest.fixture(scope="session")
def demo_artifacts(tmp_path_factory):
    """Full demo pipeline run shared by CLI/server tests."""
    from needlens.config import PipelineConfig
    from needlens.fixtures import make_demo
    from needlens.pipeline import Pipeline

    root = tmp_path_factory.mktemp("demo")
    data = root / "data"
    make_demo(data, seed=7)
    cfg = PipelineConfig(
        registry_path=str(data / "registry.csv"),
        feedback_path=str(data / "feedback.jsonl"),
        output_dir=str(root / "out"),
        topics=5,
        iterations=200,
        burn_in=80,
        sample_lag=5,
        seed=7,
    )
    pipe = Pipeline(cfg, use_llm=False)
    pipe.run_all(auto_label=True)
    return cfg


def write_dataset(path, registry_rows, feedback_rows):
    path.mkdir(parents=True, exist_ok=True)
    reg = path / "registry.csv"
    reg.write_text(
        "user_id,age,gender,imd_decile\n"
        + "\n".join(",".join(r) for r in registry_rows)
        + "\n",
        encoding="utf-8",
    )
    fb = path / "feedback.jsonl"
    with open(fb, "w", encoding="utf-8") as fh:
        for row in feedback_rows:
            fh.write(json.dumps(row) + "\n")
    return reg, fb
