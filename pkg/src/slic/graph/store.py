"""Embedded labeled property multigraph with set-semantics merge.

Nodes are keyed by (label, canonical key); an edge exists at most once per
(head, relation, tail). Triplets can be appended to a write-ahead log and
reloaded, so the store needs no external database service.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

LABELS = (
    "Document",
    "Author",
    "Event",
    "Person",
    "Location",
    "Product",
    "Organization",
    "GeopoliticalEntity",
    "Publisher",
    "Acronym",
    "Keyword",
    "Affiliation",
    "Country",
    "Year",
    "Topic",
    "TopicKeyword",
)

NER_LABEL_MAP = {
    "event": "Event",
    "person": "Person",
    "location": "Location",
    "product": "Product",
    "organization": "Organization",
    "geopolitical_entity": "GeopoliticalEntity",
}

# Properties a query may address, per label.
PROPERTY_SCHEMA = {
    "Document": ("doi", "title", "abstract", "source_ids"),
    "Author": ("name",),
    "Event": ("name",),
    "Person": ("name",),
    "Location": ("name",),
    "Product": ("name",),
    "Organization": ("name",),
    "GeopoliticalEntity": ("name",),
    "Publisher": ("name",),
    "Acronym": ("term",),
    "Keyword": ("term", "kind"),
    "Affiliation": ("name",),
    "Country": ("name",),
    "Year": ("year",),
    "Topic": ("topic_id", "label"),
    "TopicKeyword": ("term",),
}


@dataclass(frozen=True, order=True)
class NodeKey:
    label: str
    key: str

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown node label {self.label!r}")
        if not self.key:
            raise ValueError("node key must be non-empty")

    def __str__(self) -> str:
        return f"{self.label}:{self.key}"


def node(label: str, surface: str) -> NodeKey:
    """Canonicalize a surface form into a NodeKey."""
    if label == "Document":
        key = surface.strip()
    elif label == "Year":
        key = f"{int(surface):04d}"
    elif label == "Topic":
        key = str(int(surface))
    else:
        key = surface.strip().lower()
    return NodeKey(label, key)


@dataclass(frozen=True, order=True)
class Triplet:
    head: NodeKey
    relation: str
    tail: NodeKey

    def __post_init__(self):
        if not self.relation:
            raise ValueError("relation must be non-empty")
        if self.head == self.tail:
            raise ValueError(f"reflexive triplet on {self.head}")

    def to_dict(self) -> dict:
        return {
            "head": {"label": self.head.label, "key": self.head.key},
            "relation": self.relation,
            "tail": {"label": self.tail.label, "key": self.tail.key},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Triplet":
        return cls(
            head=NodeKey(d["head"]["label"], d["head"]["key"]),
            relation=d["relation"],
            tail=NodeKey(d["tail"]["label"], d["tail"]["key"]),
        )


def _default_properties(key: NodeKey) -> dict:
    if key.label == "Document":
        return {"doi": key.key}
    if key.label == "Year":
        return {"year": key.key}
    if key.label == "Topic":
        return {"topic_id": key.key}
    if key.label in ("Keyword", "TopicKeyword", "Acronym"):
        return {"term": key.key}
    return {"name": key.key}


class GraphStore:
    """In-memory multigraph; optional append-only triplet log for durability."""

    def __init__(self, wal_path=None):
        self.nodes: dict[NodeKey, dict] = {}
        self.edges: set[tuple[NodeKey, str, NodeKey]] = set()
        self.adjacency: dict[NodeKey, list[tuple[str, NodeKey, str]]] = {}
        self.label_counts: dict[str, int] = {}
        self.relation_counts: dict[str, int] = {}
        self._wal_path = wal_path

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def add_node(self, key: NodeKey) -> bool:
        if key in self.nodes:
            return False
        self.nodes[key] = _default_properties(key)
        self.adjacency[key] = []
        self.label_counts[key.label] = self.label_counts.get(key.label, 0) + 1
        return True

    def set_properties(self, key: NodeKey, props: dict) -> None:
        self.add_node(key)
        self.nodes[key].update(props)

    def add_triplet(self, triplet: Triplet) -> bool:
        edge = (triplet.head, triplet.relation, triplet.tail)
        if edge in self.edges:
            return False
        self.add_node(triplet.head)
        self.add_node(triplet.tail)
        self.edges.add(edge)
        self.adjacency[triplet.head].append((triplet.relation, triplet.tail, "out"))
        self.adjacency[triplet.tail].append((triplet.relation, triplet.head, "in"))
        self.relation_counts[triplet.relation] = self.relation_counts.get(triplet.relation, 0) + 1
        if self._wal_path is not None:
            with open(self._wal_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(triplet.to_dict()) + "\n")
        return True

    def neighbors(self, key: NodeKey, relation: Optional[str] = None):
        """Incident edges in deterministic order, both directions."""
        out = [
            (rel, other, direction)
            for rel, other, direction in self.adjacency.get(key, [])
            if relation is None or rel == relation
        ]
        out.sort(key=lambda e: (e[0], e[1], e[2]))
        return out

    def nodes_with_label(self, label: str) -> list[NodeKey]:
        return sorted(k for k in self.nodes if k.label == label)

    def schema_text(self) -> str:
        lines = ["Node labels:"]
        for label in LABELS:
            count = self.label_counts.get(label, 0)
            props = ", ".join(PROPERTY_SCHEMA[label])
            lines.append(f"  {label} ({count} nodes; properties: {props})")
        lines.append("Relationship types:")
        for rel in sorted(self.relation_counts):
            lines.append(f"  {rel} ({self.relation_counts[rel]} edges)")
        return "\n".join(lines)

    def dump_triplets(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for head, relation, tail in sorted(self.edges):
                fh.write(json.dumps(Triplet(head, relation, tail).to_dict()) + "\n")

    @classmethod
    def load_triplets(cls, path) -> "GraphStore":
        store = cls()
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    store.add_triplet(Triplet.from_dict(json.loads(line)))
        return store


def merge_triplets(store: GraphStore, triplets: Iterable[Triplet]) -> GraphStore:
    """Insert triplets with set semantics; duplicates change nothing."""
    for triplet in triplets:
        store.add_triplet(triplet)
    return store


def emit_triplets(corpus, topics=()) -> Iterator[Triplet]:
    """Map documents plus topic summaries into the graph's triplet stream.

    Absent metadata emits nothing. For citations the citing work is the
    head, so (A)-CITES->(B) always reads "A cites B".
    """
    for doc in corpus.documents:
        d = node("Document", doc.doi)
        for author in doc.authors:
            if author.name:
                yield Triplet(d, "AUTHORED_BY", node("Author", author.name))
        if doc.year is not None:
            yield Triplet(d, "PUBLISHED_IN_YEAR", node("Year", str(doc.year)))
        if doc.publisher:
            yield Triplet(d, "PUBLISHED_BY", node("Publisher", doc.publisher))
        for category in doc.categories:
            yield Triplet(d, "HAS_CATEGORY", node("Keyword", category))
        for keyword in doc.sme_keywords:
            yield Triplet(d, "HAS_SME_KEYWORD", node("Keyword", keyword))
        for acronym in doc.acronyms:
            yield Triplet(d, "HAS_ACRONYM", node("Acronym", acronym))
        for i, affiliation in enumerate(doc.affiliations):
            aff = node("Affiliation", affiliation)
            yield Triplet(d, "AFFILIATED_WITH", aff)
            if i < len(doc.affiliation_countries) and doc.affiliation_countries[i]:
                yield Triplet(aff, "LOCATED_IN", node("Country", doc.affiliation_countries[i]))
        for label, surface in doc.ner_entities:
            if label in NER_LABEL_MAP and surface:
                yield Triplet(d, "MENTIONS", node(NER_LABEL_MAP[label], surface))
        for citing in doc.citations:
            yield Triplet(node("Document", citing), "CITES", d)
        for referenced in doc.references:
            yield Triplet(d, "REFERENCES", node("Document", referenced))
        if doc.topic_id is not None:
            yield Triplet(d, "HAS_TOPIC", node("Topic", str(doc.topic_id)))
    for topic in topics:
        t = node("Topic", str(topic.topic_id))
        for term, _weight in topic.top_terms:
            yield Triplet(t, "HAS_KEYWORD", node("TopicKeyword", term))


def build_graph(corpus, topics=(), wal_path=None) -> GraphStore:
    """Merge the triplet stream and attach document/topic node properties."""
    store = GraphStore(wal_path=wal_path)
    merge_triplets(store, emit_triplets(corpus, topics))

    keyword_kinds: dict[str, set[str]] = {}
    for doc in corpus.documents:
        # Every corpus document gets a node even if it emitted no triplets.
        store.set_properties(
            node("Document", doc.doi),
            {
                "doi": doc.doi,
                "title": doc.title,
                "abstract": doc.abstract,
                "source_ids": dict(sorted(doc.source_ids.items())),
            },
        )
        for category in doc.categories:
            keyword_kinds.setdefault(category.strip().lower(), set()).add("category")
        for keyword in doc.sme_keywords:
            keyword_kinds.setdefault(keyword.strip().lower(), set()).add("sme")
    for term, kinds in keyword_kinds.items():
        key = node("Keyword", term)
        if key in store.nodes:
            store.set_properties(key, {"kind": "both" if len(kinds) > 1 else next(iter(kinds))})
    for topic in topics:
        key = node("Topic", str(topic.topic_id))
        if key in store.nodes:
            store.set_properties(key, {"label": topic.label})
    return store
