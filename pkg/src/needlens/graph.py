"""Five-layer timestamped need graph with additive delta-union updates.

Layers: Category, Need, Obstacle, ComB, BcioClass. Nodes and edges carry a
first_seen timestamp (T0 for the static scaffold, otherwise a wave); deltas
only ever add elements, and re-adding merges provenance while keeping the
earliest timestamp.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .ontology import Ontology
from .waves import T0, earliest, wave_order

LAYERS = ("Category", "Need", "Obstacle", "ComB", "BcioClass")
RELATIONS = ("is_a", "belongs_to")

CATEGORY_NEED = "category:need"
CATEGORY_OBSTACLE = "category:obstacle"

# allowed (src layer, dst layer) -> allowed relations
_EDGE_TABLE = {
    ("Need", "Category"): ("belongs_to",),
    ("Obstacle", "Category"): ("belongs_to",),
    ("Obstacle", "ComB"): ("belongs_to",),
    ("Need", "BcioClass"): ("is_a", "belongs_to"),
    ("Obstacle", "BcioClass"): ("is_a", "belongs_to"),
    ("BcioClass", "ComB"): ("belongs_to",),
}


class GraphError(Exception):
    pass


def slugify(label: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", label.lower()).strip("-")


def need_node_id(label: str) -> str:
    return f"need:{slugify(label)}"


def obstacle_node_id(label: str) -> str:
    return f"obstacle:{slugify(label)}"


@dataclass(frozen=True)
class GraphNode:
    node_id: str
    layer: str
    label: str
    first_seen: str


@dataclass(frozen=True)
class GraphEdge:
    src: str
    dst: str
    relation: str
    first_seen: str
    provenance: frozenset[str] = frozenset()

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.src, self.dst, self.relation)


@dataclass
class GraphDelta:
    wave: str
    add_nodes: list[GraphNode] = field(default_factory=list)
    add_edges: list[GraphEdge] = field(default_factory=list)


class NeedGraph:
    def __init__(self):
        self.nodes: dict[str, GraphNode] = {}
        self.edges: dict[tuple[str, str, str], GraphEdge] = {}
        self.as_of: str = T0

    # -- validation ---------------------------------------------------------

    def _check_edge_typing(self, edge: GraphEdge, nodes: dict[str, GraphNode]) -> None:
        src = nodes.get(edge.src) or self.nodes.get(edge.src)
        dst = nodes.get(edge.dst) or self.nodes.get(edge.dst)
        if src is None or dst is None:
            raise GraphError(f"edge {edge.key} has a dangling endpoint")
        allowed = _EDGE_TABLE.get((src.layer, dst.layer))
        if allowed is None or edge.relation not in allowed:
            raise GraphError(
                f"ill-typed edge {src.layer} -[{edge.relation}]-> {dst.layer}"
            )

    # -- updates ------------------------------------------------------------

    def apply_delta(self, delta: GraphDelta) -> "NeedGraph":
        """Set-union update; returns self for chaining."""
        if wave_order(delta.wave) <= wave_order(self.as_of):
            raise GraphError(
                f"delta wave {delta.wave} is not after graph as_of {self.as_of}"
            )
        staged = {n.node_id: n for n in delta.add_nodes}
        for edge in delta.add_edges:
            self._check_edge_typing(edge, staged)
        for node in delta.add_nodes:
            existing = self.nodes.get(node.node_id)
            if existing is None:
                self.nodes[node.node_id] = node
            elif wave_order(node.first_seen) < wave_order(existing.first_seen):
                self.nodes[node.node_id] = GraphNode(
                    node_id=existing.node_id,
                    layer=existing.layer,
                    label=existing.label,
                    first_seen=node.first_seen,
                )
        for edge in delta.add_edges:
            existing = self.edges.get(edge.key)
            if existing is None:
                self.edges[edge.key] = edge
            else:
                first = min((existing.first_seen, edge.first_seen), key=wave_order)
                self.edges[edge.key] = GraphEdge(
                    src=edge.src,
                    dst=edge.dst,
                    relation=edge.relation,
                    first_seen=first,
                    provenance=existing.provenance | edge.provenance,
                )
        self.as_of = delta.wave
        return self

    def snapshot(self, t: str) -> "NeedGraph":
        """Subgraph of elements first seen at or before t."""
        if wave_order(t) > wave_order(self.as_of):
            raise GraphError(f"snapshot wave {t} is beyond as_of {self.as_of}")
        g = NeedGraph()
        g.nodes = {
            nid: n for nid, n in self.nodes.items() if wave_order(n.first_seen) <= wave_order(t)
        }
        g.edges = {
            key: e for key, e in self.edges.items() if wave_order(e.first_seen) <= wave_order(t)
        }
        g.as_of = t
        return g

    # -- queries ------------------------------------------------------------

    def neighbors(self, node_id: str) -> list[str]:
        out = set()
        for (src, dst, _), _e in self.edges.items():
            if src == node_id:
                out.add(dst)
            elif dst == node_id:
                out.add(src)
        return sorted(out)

    def context_for(self, need_label: str, radius: int) -> str:
        """Breadth-first neighborhood rendered as sorted fact lines."""
        center = need_node_id(need_label)
        if center not in self.nodes:
            center = obstacle_node_id(need_label)
        if center not in self.nodes:
            raise GraphError(f"unknown need: {need_label!r}")
        reach = {center}
        frontier = {center}
        for _ in range(radius):
            nxt = set()
            for nid in frontier:
                nxt.update(self.neighbors(nid))
            frontier = nxt - reach
            reach |= nxt
        node = self.nodes[center]
        lines = [f"{node.node_id} [{node.layer}] {node.label}"]
        edge_lines = sorted(
            f"{e.src} {e.relation} {e.dst}"
            for e in self.edges.values()
            if e.src in reach and e.dst in reach
        )
        return "\n".join(lines + edge_lines)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        nodes = sorted(self.nodes.values(), key=lambda n: n.node_id)
        edges = sorted(self.edges.values(), key=lambda e: e.key)
        return {
            "version": "ng/1",
            "as_of": self.as_of,
            "nodes": [
                {
                    "node_id": n.node_id,
                    "layer": n.layer,
                    "label": n.label,
                    "first_seen": n.first_seen,
                }
                for n in nodes
            ],
            "edges": [
                {
                    "src": e.src,
                    "dst": e.dst,
                    "relation": e.relation,
                    "first_seen": e.first_seen,
                    "provenance": sorted(e.provenance),
                }
                for e in edges
            ],
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, obj: dict) -> "NeedGraph":
        if obj.get("version") != "ng/1":
            raise GraphError(f"unsupported graph version {obj.get('version')!r}")
        g = cls()
        for n in obj["nodes"]:
            g.nodes[n["node_id"]] = GraphNode(
                node_id=n["node_id"],
                layer=n["layer"],
                label=n["label"],
                first_seen=n["first_seen"],
            )
        for e in obj["edges"]:
            edge = GraphEdge(
                src=e["src"],
                dst=e["dst"],
                relation=e["relation"],
                first_seen=e["first_seen"],
                provenance=frozenset(e.get("provenance", [])),
            )
            g.edges[edge.key] = edge
        g.as_of = obj["as_of"]
        return g

    def to_dot(self) -> str:
        shapes = {
            "Category": "box",
            "Need": "ellipse",
            "Obstacle": "hexagon",
            "ComB": "diamond",
            "BcioClass": "octagon",
        }
        lines = ["digraph needgraph {"]
        for n in sorted(self.nodes.values(), key=lambda n: n.node_id):
            lines.append(
                f'  "{n.node_id}" [label="{n.label}", shape={shapes[n.layer]}];'
            )
        for e in sorted(self.edges.values(), key=lambda e: e.key):
            lines.append(f'  "{e.src}" -> "{e.dst}" [label="{e.relation}"];')
        lines.append("}")
        return "\n".join(lines)


def init_scaffold(ontology: Ontology) -> NeedGraph:
    """Static T0 graph: the two category nodes, the six COM-B components,
    every BCIO class and their belongs_to edges into COM-B."""
    g = NeedGraph()
    g.nodes[CATEGORY_NEED] = GraphNode(CATEGORY_NEED, "Category", "Need", T0)
    g.nodes[CATEGORY_OBSTACLE] = GraphNode(CATEGORY_OBSTACLE, "Category", "Obstacle", T0)
    for node in ontology.by_layer("comb_component"):
        g.nodes[node.id] = GraphNode(node.id, "ComB", node.label, T0)
    for node in ontology.by_layer("bcio_class"):
        g.nodes[node.id] = GraphNode(node.id, "BcioClass", node.label, T0)
        if node.parent_id:
            parent = ontology.get(node.parent_id)
            if parent.layer != "comb_component":
                raise GraphError(
                    f"BCIO class {node.id} must hang under a COM-B component"
                )
            edge = GraphEdge(node.id, parent.id, "belongs_to", T0)
            g.edges[edge.key] = edge
    return g


def build_wave_delta(
    wave: str,
    need_docs: dict[str, list[str]],
    lexicon,
    ontology: Ontology,
    existing: NeedGraph,
) -> GraphDelta:
    """Node/edge increments for one wave given the documents tagged per need.

    Only emits elements absent from `existing`, so re-running a wave yields
    an empty incremental delta (union idempotence).
    """
    delta = GraphDelta(wave=wave)
    seen_nodes: set[str] = set()
    for label in sorted(need_docs):
        docs = need_docs[label]
        if not docs:
            continue
        entry = lexicon.entries[label]
        if entry.kind == "obstacle":
            nid = obstacle_node_id(label)
            layer = "Obstacle"
            category = CATEGORY_OBSTACLE
        else:
            nid = need_node_id(label)
            layer = "Need"
            category = CATEGORY_NEED
        prov = frozenset(docs)
        new_edges = [GraphEdge(nid, category, "belongs_to", wave, prov)]
        if entry.moa_concept:
            bcio = ontology.bcio_for(entry.moa_concept)
            if bcio is not None:
                new_edges.append(GraphEdge(nid, bcio.id, "is_a", wave, prov))
                if layer == "Obstacle" and bcio.parent_id:
                    new_edges.append(
                        GraphEdge(nid, bcio.parent_id, "belongs_to", wave, prov)
                    )
        if nid not in existing.nodes and nid not in seen_nodes:
            delta.add_nodes.append(GraphNode(nid, layer, label, wave))
            seen_nodes.add(nid)
        for edge in new_edges:
            prior = existing.edges.get(edge.key)
            if prior is None or not (prov <= prior.provenance):
                if prior is None:
                    delta.add_edges.append(edge)
                # edges fully covered by prior provenance are skipped; partial
                # overlap still needs a merge
                elif prov - prior.provenance:
                    delta.add_edges.append(edge)
    return delta
