import random

import pytest

from needlens.graph import (
    CATEGORY_NEED,
    CATEGORY_OBSTACLE,
    GraphDelta,
    GraphEdge,
    GraphError,
    GraphNode,
    NeedGraph,
    init_scaffold,
    need_node_id,
)
from needlens.ontology import Ontology, OntologyError, OntologyNode

from test_extraction import comb_nodes


def need_delta(wave, label, doc_ids, first_seen=None):
    first_seen = first_seen or wave
    nid = need_node_id(label)
    return GraphDelta(
        wave=wave,
        add_nodes=[GraphNode(nid, "Need", label, first_seen)],
        add_edges=[
            GraphEdge(nid, CATEGORY_NEED, "belongs_to", first_seen, frozenset(doc_ids))
        ],
    )


class TestScaffold:
    def test_shipped_ontology_counts(self, ontology):
        g = init_scaffold(ontology)
        layers = {}
        for n in g.nodes.values():
            layers[n.layer] = layers.get(n.layer, 0) + 1
        assert layers["Category"] == 2
        assert layers["ComB"] == 6
        assert layers["BcioClass"] == 9
        assert all(n.first_seen == "T0" for n in g.nodes.values())

    def test_empty_bcio_minimal_scaffold(self):
        g = init_scaffold(Ontology(comb_nodes()))
        assert len(g.nodes) == 8
        assert len(g.edges) == 0

    def test_cyclic_parents_rejected(self):
        nodes = comb_nodes() + [
            OntologyNode("bcio:a", "a", "bcio_class", "bcio:b"),
            OntologyNode("bcio:b", "b", "bcio_class", "bcio:a"),
        ]
        with pytest.raises(OntologyError, match="cyclic"):
            Ontology(nodes)


class TestApplyDelta:
    def test_empty_delta_only_advances_as_of(self, ontology):
        g = init_scaffold(ontology)
        before = g.canonical_json()
        g.apply_delta(GraphDelta(wave="M3"))
        assert g.as_of == "M3"
        after = NeedGraph.from_dict(g.to_dict())
        after.as_of = "T0"
        assert after.canonical_json() == before

    def test_add_need_node_and_edge(self, ontology):
        g = init_scaffold(ontology)
        n0, e0 = len(g.nodes), len(g.edges)
        g.apply_delta(need_delta("M3", "food needs", ["d1"]))
        assert len(g.nodes) == n0 + 1
        assert len(g.edges) == e0 + 1

    def test_readd_merges_provenance_keeps_first_seen(self, ontology):
        g = init_scaffold(ontology)
        g.apply_delta(need_delta("M3", "food needs", ["d1"]))
        n0 = len(g.nodes)
        g.apply_delta(need_delta("M6", "food needs", ["d2"]))
        assert len(g.nodes) == n0
        edge = g.edges[(need_node_id("food needs"), CATEGORY_NEED, "belongs_to")]
        assert edge.provenance == {"d1", "d2"}
        assert edge.first_seen == "M3"
        assert g.nodes[need_node_id("food needs")].first_seen == "M3"

    def test_out_of_order_wave_rejected(self, ontology):
        g = init_scaffold(ontology)
        g.apply_delta(need_delta("M6", "food needs", ["d1"]))
        with pytest.raises(GraphError, match="not after"):
            g.apply_delta(need_delta("M3", "late needs", ["d2"]))

    def test_dangling_edge_rejected(self, ontology):
        g = init_scaffold(ontology)
        delta = GraphDelta(
            wave="M3",
            add_edges=[GraphEdge("need:ghost", CATEGORY_NEED, "belongs_to", "M3")],
        )
        with pytest.raises(GraphError, match="dangling"):
            g.apply_delta(delta)

    def test_ill_typed_edge_rejected(self, ontology):
        g = init_scaffold(ontology)
        delta = GraphDelta(
            wave="M3",
            add_edges=[GraphEdge(CATEGORY_NEED, CATEGORY_OBSTACLE, "belongs_to", "M3")],
        )
        with pytest.raises(GraphError, match="ill-typed"):
            g.apply_delta(delta)


class TestSnapshot:
    def _graph(self, ontology):
        g = init_scaffold(ontology)
        g.apply_delta(need_delta("M3", "early need", ["d1"]))
        g.apply_delta(GraphDelta(wave="M6"))
        g.apply_delta(need_delta("M12", "late need", ["d9"]))
        return g

    def test_t0_is_scaffold(self, ontology):
        g = self._graph(ontology)
        snap = g.snapshot("T0")
        assert snap.canonical_json() == init_scaffold(ontology).canonical_json()

    def test_intermediate_wave_filters(self, ontology):
        g = self._graph(ontology)
        snap = g.snapshot("M6")
        assert need_node_id("early need") in snap.nodes
        assert need_node_id("late need") not in snap.nodes

    def test_full_snapshot_is_identity(self, ontology):
        g = self._graph(ontology)
        snap = g.snapshot(g.as_of)
        assert snap.canonical_json() == g.canonical_json()

    def test_beyond_as_of_rejected(self, ontology):
        g = init_scaffold(ontology)
        with pytest.raises(GraphError):
            g.snapshot("M3")

    def test_snapshot_edges_have_endpoints(self, ontology):
        g = self._graph(ontology)
        snap = g.snapshot("M6")
        for e in snap.edges.values():
            assert e.src in snap.nodes and e.dst in snap.nodes


class TestContextFor:
    def test_radius_zero_single_line(self, ontology):
        g = init_scaffold(ontology)
        g.apply_delta(need_delta("M3", "food needs", ["d1"]))
        out = g.context_for("food needs", 0)
        assert out == "need:food-needs [Need] food needs"

    def test_radius_one_two_lines(self, ontology):
        g = init_scaffold(ontology)
        g.apply_delta(need_delta("M3", "food needs", ["d1"]))
        lines = g.context_for("food needs", 1).splitlines()
        assert len(lines) == 2
        assert lines[1] == "need:food-needs belongs_to category:need"

    def test_deterministic(self, ontology):
        g = init_scaffold(ontology)
        g.apply_delta(need_delta("M3", "food needs", ["d1"]))
        assert g.context_for("food needs", 2) == g.context_for("food needs", 2)

    def test_unknown_need_errors(self, ontology):
        with pytest.raises(GraphError):
            init_scaffold(ontology).context_for("ghost", 1)


class TestRandomizedDeltas:
    def test_monotone_growth_and_typing(self, ontology):
        rng = random.Random(42)
        waves = ["M3", "M6", "M12", "M24"]
        for _trial in range(50):
            g = init_scaffold(ontology)
            bcio_ids = [n.node_id for n in g.nodes.values() if n.layer == "BcioClass"]
            for wave in waves:
                nodes, edges = [], []
                for j in range(rng.randint(0, 3)):
                    label = f"need {rng.randint(0, 5)}"
                    nid = need_node_id(label)
                    nodes.append(GraphNode(nid, "Need", label, wave))
                    prov = frozenset({f"d{rng.randint(0, 99)}"})
                    edges.append(GraphEdge(nid, CATEGORY_NEED, "belongs_to", wave, prov))
                    if rng.random() < 0.5:
                        edges.append(
                            GraphEdge(nid, rng.choice(bcio_ids), "is_a", wave, prov)
                        )
                before_nodes = set(g.nodes)
                before_edges = set(g.edges)
                g.apply_delta(GraphDelta(wave=wave, add_nodes=nodes, add_edges=edges))
                assert before_nodes <= set(g.nodes)
                assert before_edges <= set(g.edges)
                for e in g.edges.values():
                    g._check_edge_typing(e, {})

    def test_ill_typed_random_edges_always_rejected(self, ontology):
        rng = random.Random(43)
        g = init_scaffold(ontology)
        comb_ids = [n.node_id for n in g.nodes.values() if n.layer == "ComB"]
        for _ in range(25):
            src = rng.choice(comb_ids)
            dst = rng.choice([CATEGORY_NEED, rng.choice(comb_ids)])
            delta = GraphDelta(
                wave="M3", add_edges=[GraphEdge(src, dst, "belongs_to", "M3")]
            )
            with pytest.raises(GraphError):
                NeedGraph.from_dict(g.to_dict()).apply_delta(delta)


class TestSerialization:
    def test_round_trip_canonical(self, ontology):
        g = init_scaffold(ontology)
        g.apply_delta(need_delta("M3", "food needs", ["d2", "d1"]))
        back = NeedGraph.from_dict(g.to_dict())
        assert back.canonical_json() == g.canonical_json()

    def test_dot_export_mentions_layers(self, ontology):
        g = init_scaffold(ontology)
        dot = g.to_dot()
        assert dot.startswith("digraph")
        assert "shape=diamond" in dot  # ComB styling
