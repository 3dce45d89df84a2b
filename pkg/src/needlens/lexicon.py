"""The evolving seed lexicon: need labels, trigger keywords, topic mappings
and MoA alignments, with an append-only audit trail for expert edits."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from importlib import resources


class LexiconError(Exception):
    pass


@dataclass
class LexiconEntry:
    keywords: set[str] = field(default_factory=set)
    topic_ids: set[int] = field(default_factory=set)
    moa_concept: str | None = None
    kind: str = "need"  # need | obstacle
    created_at: str = "seed"

    def to_dict(self) -> dict:
        return {
            "keywords": sorted(self.keywords),
            "topic_ids": sorted(self.topic_ids),
            "moa_concept": self.moa_concept,
            "kind": self.kind,
            "created_at": self.created_at,
        }


class AuditLog:
    """Append-only JSON-lines log of lexicon mutations."""

    def __init__(self, path=None):
        self.path = path
        self.events: list[dict] = []

    def append(self, actor: str, action: str, before, after) -> None:
        event = {
            "time": time.time(),
            "actor": actor,
            "action": action,
            "before": before,
            "after": after,
        }
        self.events.append(event)
        if self.path is not None:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event) + "\n")


class SeedLexicon:
    def __init__(self, entries: dict[str, LexiconEntry] | None = None):
        self.entries: dict[str, LexiconEntry] = entries or {}
        for label in self.entries:
            self._check_label(label)
        self._check_single_owner()

    @staticmethod
    def _check_label(label: str) -> None:
        if not label or label != label.lower():
            raise LexiconError(f"need label must be non-empty lowercase: {label!r}")

    def _check_single_owner(self) -> None:
        seen: dict[int, str] = {}
        for label, entry in self.entries.items():
            for tid in entry.topic_ids:
                if tid in seen:
                    raise LexiconError(
                        f"topic {tid} mapped to both {seen[tid]!r} and {label!r}"
                    )
                seen[tid] = label

    def owner_of(self, topic_id: int) -> str | None:
        for label, entry in self.entries.items():
            if topic_id in entry.topic_ids:
                return label
        return None

    def apply_expert_label(
        self,
        topic_id: int,
        need_label: str,
        kind: str = "need",
        wave: str = "seed",
        n_topics: int | None = None,
        audit: AuditLog | None = None,
        actor: str = "expert",
    ) -> None:
        """(Re)assign a topic to a need label, creating the entry if new."""
        self._check_label(need_label)
        if kind not in ("need", "obstacle"):
            raise LexiconError(f"unknown kind {kind!r}")
        if topic_id < 0 or (n_topics is not None and topic_id >= n_topics):
            raise LexiconError(f"unknown topic id {topic_id}")
        prior_owner = self.owner_of(topic_id)
        before = {
            "topic_id": topic_id,
            "owner": prior_owner,
        }
        if prior_owner is not None and prior_owner != need_label:
            self.entries[prior_owner].topic_ids.discard(topic_id)
        if need_label not in self.entries:
            self.entries[need_label] = LexiconEntry(kind=kind, created_at=wave)
        self.entries[need_label].topic_ids.add(topic_id)
        if audit is not None:
            audit.append(
                actor,
                "apply_expert_label",
                before,
                {"topic_id": topic_id, "owner": need_label},
            )

    def topic_map(self) -> dict[int, str]:
        return {
            tid: label
            for label, entry in self.entries.items()
            for tid in entry.topic_ids
        }

    def to_dict(self) -> dict:
        return {
            "version": "lex/1",
            "entries": {label: e.to_dict() for label, e in sorted(self.entries.items())},
        }

    def copy(self) -> "SeedLexicon":
        return SeedLexicon(
            {
                label: LexiconEntry(
                    keywords=set(e.keywords),
                    topic_ids=set(e.topic_ids),
                    moa_concept=e.moa_concept,
                    kind=e.kind,
                    created_at=e.created_at,
                )
                for label, e in self.entries.items()
            }
        )

    @classmethod
    def from_dict(cls, obj: dict) -> "SeedLexicon":
        if obj.get("version") != "lex/1":
            raise LexiconError(f"unsupported lexicon version {obj.get('version')!r}")
        entries = {}
        for label, e in obj["entries"].items():
            entries[label] = LexiconEntry(
                keywords=set(e.get("keywords", [])),
                topic_ids=set(e.get("topic_ids", [])),
                moa_concept=e.get("moa_concept"),
                kind=e.get("kind", "need"),
                created_at=e.get("created_at", "seed"),
            )
        return cls(entries)


def load_lexicon(path=None) -> SeedLexicon:
    """Load a lexicon file, or the shipped seed lexicon when path is None."""
    if path is None:
        text = resources.files("needlens.data").joinpath("seed_lexicon.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return SeedLexicon.from_dict(json.loads(text))


def save_lexicon(lexicon: SeedLexicon, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(lexicon.to_dict(), fh, indent=2, sort_keys=True)
