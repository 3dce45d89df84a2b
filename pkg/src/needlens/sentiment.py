"""Rule-based valence scoring over the shipped lexicon, with a pluggable
classifier interface so an external model service can be substituted."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

NEGATIVE_THRESHOLD = -0.05
POSITIVE_THRESHOLD = 0.05
NEGATION_WINDOW = 2


@dataclass(frozen=True)
class SentimentPoint:
    doc_id: str
    valence: float
    label: str  # negative | neutral | positive

    def to_dict(self) -> dict:
        return {"doc_id": self.doc_id, "valence": self.valence, "class": self.label}


def classify(valence: float) -> str:
    if valence < NEGATIVE_THRESHOLD:
        return "negative"
    if valence > POSITIVE_THRESHOLD:
        return "positive"
    return "neutral"


class ValenceLexicon:
    def __init__(self, entries: dict[str, float], negators: set[str]):
        for tok, v in entries.items():
            if not -1.0 <= v <= 1.0:
                raise ValueError(f"valence for {tok!r} outside [-1, 1]: {v}")
        self.entries = entries
        self.negators = negators

    @classmethod
    def load(cls, path=None) -> "ValenceLexicon":
        if path is None:
            text = (
                resources.files("needlens.data")
                .joinpath("valence_lexicon.json")
                .read_text("utf-8")
            )
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        obj = json.loads(text)
        return cls(dict(obj["entries"]), set(obj.get("negators", [])))


class ValenceScorer:
    """Mean signed valence of lexicon hits; a negator within the preceding
    two tokens flips the sign of the hit."""

    def __init__(self, lexicon: ValenceLexicon | None = None):
        self.lexicon = lexicon or ValenceLexicon.load()

    def score_tokens(self, doc_id: str, tokens: list[str]) -> SentimentPoint:
        hits: list[float] = []
        for i, tok in enumerate(tokens):
            value = self.lexicon.entries.get(tok)
            if value is None:
                continue
            window = tokens[max(0, i - NEGATION_WINDOW):i]
            if any(t in self.lexicon.negators for t in window):
                value = -value
            hits.append(value)
        valence = sum(hits) / len(hits) if hits else 0.0
        return SentimentPoint(doc_id=doc_id, valence=valence, label=classify(valence))

    def score(self, doc) -> SentimentPoint:
        return self.score_tokens(doc.doc_id, doc.tokens)
