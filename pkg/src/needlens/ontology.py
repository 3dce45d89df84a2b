"""Declarative behaviour-science ontology: COM-B components, BCIO classes
and the MoA concepts that needs are aligned to."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources

LAYERS = ("moa_concept", "comb_component", "bcio_class")

COMB_COMPONENTS = (
    "capability-physical",
    "capability-psychological",
    "opportunity-physical",
    "opportunity-social",
    "motivation-reflective",
    "motivation-automatic",
)


class OntologyError(Exception):
    pass


@dataclass(frozen=True)
class OntologyNode:
    id: str
    label: str
    layer: str
    parent_id: str | None = None


class Ontology:
    def __init__(self, nodes: list[OntologyNode]):
        if not nodes:
            raise OntologyError("ontology is empty")
        self.nodes = {n.id: n for n in nodes}
        if len(self.nodes) != len(nodes):
            raise OntologyError("duplicate ontology node ids")
        self._validate()

    def _validate(self) -> None:
        for n in self.nodes.values():
            if n.layer not in LAYERS:
                raise OntologyError(f"node {n.id}: unknown layer {n.layer!r}")
            if n.parent_id is not None and n.parent_id not in self.nodes:
                raise OntologyError(f"node {n.id}: missing parent {n.parent_id!r}")
        present = {
            n.id.split(":", 1)[1]
            for n in self.nodes.values()
            if n.layer == "comb_component" and ":" in n.id
        }
        missing = set(COMB_COMPONENTS) - present
        if missing:
            raise OntologyError(f"missing COM-B components: {sorted(missing)}")
        # parent links must be acyclic
        for n in self.nodes.values():
            seen = {n.id}
            cur = n.parent_id
            while cur is not None:
                if cur in seen:
                    raise OntologyError(f"cyclic parent chain at {n.id}")
                seen.add(cur)
                cur = self.nodes[cur].parent_id

    def get(self, node_id: str) -> OntologyNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise OntologyError(f"unknown ontology node {node_id!r}") from None

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.nodes

    def by_layer(self, layer: str) -> list[OntologyNode]:
        return sorted(
            (n for n in self.nodes.values() if n.layer == layer), key=lambda n: n.id
        )

    def ancestor_in_layer(self, node_id: str, layer: str) -> OntologyNode | None:
        cur = self.get(node_id)
        while cur is not None:
            if cur.layer == layer:
                return cur
            cur = self.nodes.get(cur.parent_id) if cur.parent_id else None
        return None

    def bcio_for(self, moa_id: str) -> OntologyNode | None:
        """Nearest BCIO-class ancestor of a MoA concept (or itself)."""
        return self.ancestor_in_layer(moa_id, "bcio_class")

    def comb_for(self, node_id: str) -> OntologyNode | None:
        return self.ancestor_in_layer(node_id, "comb_component")

    def to_dict(self) -> dict:
        return {
            "version": "onto/1",
            "nodes": [
                {"id": n.id, "label": n.label, "layer": n.layer, "parent_id": n.parent_id}
                for n in sorted(self.nodes.values(), key=lambda n: n.id)
            ],
        }


def label_tokens(label: str) -> frozenset[str]:
    return frozenset(t for t in re.findall(r"[a-z0-9]+", label.lower()) if t)


def load_ontology_dict(obj: dict) -> Ontology:
    if obj.get("version") != "onto/1":
        raise OntologyError(f"unsupported ontology version {obj.get('version')!r}")
    nodes = [
        OntologyNode(
            id=n["id"],
            label=n["label"],
            layer=n["layer"],
            parent_id=n.get("parent_id"),
        )
        for n in obj["nodes"]
    ]
    return Ontology(nodes)


def load_ontology(path=None) -> Ontology:
    """Load an ontology file, or the shipped desk-scale sample when path is None."""
    if path is None:
        text = resources.files("needlens.data").joinpath("ontology.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return load_ontology_dict(json.loads(text))
