"""Character graphs: paragraph co-occurrence, dialogue turn-taking, and the
directed discussion network, plus bit-stable GraphML round-tripping."""

from __future__ import annotations

import csv
import xml.etree.ElementTree as ET
from collections import defaultdict
from pathlib import Path

from .annotations import AnnotationBundle, Character
from .components import UNATTRIBUTED_CHAR_ID, TaggedSpan
from .errors import GraphImportError

GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"


class CharGraph:
    """Weighted character network.

    Undirected graphs store each edge once under (min(u,v), max(u,v));
    self-loops are rejected and weights must stay positive.
    """

    def __init__(self, directed: bool = False):
        self.directed = directed
        self.node_attrs: dict[int, dict] = {}
        self._weights: dict[tuple[int, int], float] = {}

    def _key(self, u: int, v: int) -> tuple[int, int]:
        if self.directed or u <= v:
            return (u, v)
        return (v, u)

    def add_node(self, node: int, **attrs) -> None:
        self.node_attrs.setdefault(node, {}).update(attrs)

    def add_edge(self, u: int, v: int, weight: float) -> None:
        if u == v:
            raise ValueError(f"self-loop on node {u}")
        if weight <= 0:
            raise ValueError(f"non-positive edge weight {weight} on ({u}, {v})")
        self.add_node(u)
        self.add_node(v)
        self._weights[self._key(u, v)] = float(weight)

    def increment_edge(self, u: int, v: int, amount: float = 1.0) -> None:
        if u == v:
            raise ValueError(f"self-loop on node {u}")
        self.add_node(u)
        self.add_node(v)
        key = self._key(u, v)
        self._weights[key] = self._weights.get(key, 0.0) + amount

    def nodes(self) -> list[int]:
        return sorted(self.node_attrs)

    def edges(self) -> list[tuple[int, int, float]]:
        return sorted((u, v, w) for (u, v), w in self._weights.items())

    def num_nodes(self) -> int:
        return len(self.node_attrs)

    def num_edges(self) -> int:
        return len(self._weights)

    def weight(self, u: int, v: int) -> float:
        return self._weights[self._key(u, v)]

    def has_edge(self, u: int, v: int) -> bool:
        return self._key(u, v) in self._weights

    def neighbors(self, v: int) -> dict[int, float]:
        """Outgoing neighbors (all neighbors when undirected) with weights."""
        out: dict[int, float] = {}
        for (a, b), w in self._weights.items():
            if a == v:
                out[b] = out.get(b, 0.0) + w
            elif not self.directed and b == v:
                out[a] = out.get(a, 0.0) + w
        return out

    def undirected_view(self) -> "CharGraph":
        """Collapse direction, summing weights of antiparallel edges."""
        if not self.directed:
            return self
        g = CharGraph(directed=False)
        for node, attrs in self.node_attrs.items():
            g.add_node(node, **attrs)
        for (u, v), w in self._weights.items():
            g.increment_edge(u, v, w)
        return g


def _seed_nodes(graph: CharGraph, registry: list[Character]) -> None:
    # The full registry joins the node set so rankings share one index even
    # for isolated characters.
    for c in registry:
        graph.add_node(c.char_id, name=c.canonical_name, gender=c.gender)


def build_cooccurrence(bundle: AnnotationBundle, registry: list[Character]) -> CharGraph:
    """Undirected edges: +1 per paragraph for each unordered pair of distinct
    characters with at least one mention (of any type) in that paragraph."""
    graph = CharGraph(directed=False)
    _seed_nodes(graph, registry)
    char_of_cluster = {cl: c.char_id for c in registry for cl in c.cluster_ids}
    present: dict[int, set[int]] = defaultdict(set)
    for m in bundle.mentions:
        char_id = char_of_cluster.get(m.cluster_id)
        if char_id is None:
            continue
        present[bundle.token(m.start_token).paragraph_id].add(char_id)
    for _pid, chars in sorted(present.items()):
        ordered = sorted(chars)
        for i, u in enumerate(ordered):
            for v in ordered[i + 1 :]:
                graph.increment_edge(u, v)
    return graph


def build_dialogue(
    bundle: AnnotationBundle, registry: list[Character], max_gap_paragraphs: int = 1
) -> CharGraph:
    """Undirected edges: +1 per consecutive quote pair with different known
    speakers at most ``max_gap_paragraphs`` paragraphs apart."""
    graph = CharGraph(directed=False)
    _seed_nodes(graph, registry)
    char_of_cluster = {cl: c.char_id for c in registry for cl in c.cluster_ids}

    quotes = sorted(bundle.quotes, key=lambda q: q.start_token)
    resolved = []
    for q in quotes:
        speaker = char_of_cluster.get(q.speaker_cluster)
        paragraph = bundle.token(q.start_token).paragraph_id
        resolved.append((speaker, paragraph))
    for (u, pu), (v, pv) in zip(resolved, resolved[1:]):
        if u is None or v is None or u == v:
            continue
        if abs(pv - pu) > max_gap_paragraphs:
            continue
        graph.increment_edge(u, v)
    return graph


def build_discussion(dc_spans: list[TaggedSpan], registry: list[Character]) -> CharGraph:
    """Directed edges u -> v weighted by DC spans with speaker u, target v;
    spans from unattributed speakers are dropped."""
    graph = CharGraph(directed=True)
    _seed_nodes(graph, registry)
    known = {c.char_id for c in registry}
    for span in dc_spans:
        if span.component != "DC":
            continue
        u = span.speaker_char_id
        v = span.char_id
        if u is None or u == UNATTRIBUTED_CHAR_ID or u not in known or v not in known:
            continue
        graph.increment_edge(u, v)
    return graph


_INT_ATTRS = {"N", "A", "C", "I", "DC", "DN", "total"}


def attach_component_totals(graph: CharGraph, totals: dict[int, dict[str, int]]) -> None:
    """Store per-character component totals as node attributes."""
    for node, tags in totals.items():
        if node in graph.node_attrs:
            graph.add_node(node, **{k: int(v) for k, v in tags.items()})


def export_graphml(graph: CharGraph, path) -> None:
    """Bit-stable GraphML: nodes sorted by id, edges sorted lexicographically,
    weights serialized with repr() so round trips are exact."""
    attr_names: list[str] = []
    for attrs in graph.node_attrs.values():
        for name in attrs:
            if name not in attr_names:
                attr_names.append(name)
    attr_names.sort()

    lines = ['<?xml version="1.0" encoding="utf-8"?>']
    lines.append(f'<graphml xmlns="{GRAPHML_NS}">')
    key_ids = {}
    for i, name in enumerate(attr_names):
        key_ids[name] = f"d{i}"
        attr_type = "long" if name in _INT_ATTRS else "string"
        lines.append(
            f'  <key id="d{i}" for="node" attr.name="{name}" attr.type="{attr_type}"/>'
        )
    weight_key = f"d{len(attr_names)}"
    lines.append(
        f'  <key id="{weight_key}" for="edge" attr.name="weight" attr.type="double"/>'
    )
    edgedefault = "directed" if graph.directed else "undirected"
    lines.append(f'  <graph edgedefault="{edgedefault}">')
    for node in graph.nodes():
        attrs = graph.node_attrs[node]
        if attrs:
            lines.append(f'    <node id="{node}">')
            for name in attr_names:
                if name in attrs:
                    value = _xml_escape(str(attrs[name]))
                    lines.append(f'      <data key="{key_ids[name]}">{value}</data>')
            lines.append("    </node>")
        else:
            lines.append(f'    <node id="{node}"/>')
    for u, v, w in graph.edges():
        lines.append(f'    <edge source="{u}" target="{v}">')
        lines.append(f'      <data key="{weight_key}">{w!r}</data>')
        lines.append("    </edge>")
    lines.append("  </graph>")
    lines.append("</graphml>")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _xml_escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


def import_graphml(path) -> CharGraph:
    try:
        tree = ET.parse(path)
    except ET.ParseError as exc:
        raise GraphImportError(f"malformed GraphML in {path}: {exc}")
    root = tree.getroot()
    ns = {"g": GRAPHML_NS}
    keys = {}
    for key in root.findall("g:key", ns):
        keys[key.get("id")] = (key.get("attr.name"), key.get("attr.type"), key.get("for"))
    graph_el = root.find("g:graph", ns)
    if graph_el is None:
        raise GraphImportError(f"no <graph> element in {path}")
    directed = graph_el.get("edgedefault") == "directed"
    graph = CharGraph(directed=directed)
    for node_el in graph_el.findall("g:node", ns):
        node = int(node_el.get("id"))
        attrs = {}
        for data in node_el.findall("g:data", ns):
            name, attr_type, _target = keys.get(data.get("key"), (None, None, None))
            if name is None:
                raise GraphImportError(f"undeclared data key {data.get('key')!r} in {path}")
            value = data.text or ""
            attrs[name] = int(value) if attr_type in ("long", "int") else value
        graph.add_node(node, **attrs)
    for edge_el in graph_el.findall("g:edge", ns):
        u = int(edge_el.get("source"))
        v = int(edge_el.get("target"))
        weight = None
        for data in edge_el.findall("g:data", ns):
            name, _attr_type, _target = keys.get(data.get("key"), (None, None, None))
            if name == "weight":
                weight = float(data.text)
        if weight is None:
            raise GraphImportError(f"edge ({u}, {v}) missing weight attribute in {path}")
        graph.add_edge(u, v, weight)
    return graph


def export_adjacency_csv(graph: CharGraph, path) -> None:
    """Edge list CSV (source, target, weight) for spreadsheet use."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["source", "target", "weight"])
        for u, v, w in graph.edges():
            writer.writerow([u, v, repr(w)])
