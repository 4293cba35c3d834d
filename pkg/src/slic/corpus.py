"""Canonical document/corpus data model and multi-source record unification.

Every downstream stage (cleaning, factorization, graph, vector store) works
on the `Document` and `Corpus` values defined here. Records arriving from
the scholarly sources are unified into a single `Document` per identity.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from .errors import IdentityMismatch

SOURCES = ("osti", "scopus", "s2")

# Scalar conflicts are resolved by this precedence, highest first.
SOURCE_PRECEDENCE = ("scopus", "s2", "osti")

NER_LABELS = (
    "event",
    "person",
    "location",
    "product",
    "organization",
    "geopolitical_entity",
)


@dataclass(frozen=True)
class Author:
    name: str
    affiliation: Optional[str] = None
    country: Optional[str] = None


@dataclass(frozen=True)
class SourceRecord:
    """One publication record as returned by a single scholarly source."""

    source: str
    source_id: str
    doi: Optional[str] = None
    title: Optional[str] = None
    abstract: Optional[str] = None
    authors: tuple[Author, ...] = ()
    year: Optional[int] = None
    publisher: Optional[str] = None
    categories: tuple[str, ...] = ()
    acronyms: tuple[str, ...] = ()
    citations: tuple[str, ...] = ()
    references: tuple[str, ...] = ()
    full_text: Optional[str] = None

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        if not self.source_id:
            raise ValueError("source_id must be non-empty")
        if self.year is not None and not (1800 <= self.year <= 2100):
            raise ValueError(f"year {self.year} outside [1800, 2100]")

    @property
    def identity(self) -> str:
        """DOI when present, else a stable surrogate key."""
        return self.doi if self.doi else surrogate_doi(self.source, self.source_id)


def surrogate_doi(source: str, source_id: str) -> str:
    return f"src:{source}:{source_id}"


@dataclass(frozen=True)
class Document:
    """A unified publication record keyed by DOI (or surrogate)."""

    doi: str
    title: str = ""
    abstract: str = ""
    authors: tuple[Author, ...] = ()
    year: Optional[int] = None
    publisher: Optional[str] = None
    categories: tuple[str, ...] = ()
    affiliations: tuple[str, ...] = ()
    affiliation_countries: tuple[str, ...] = ()
    acronyms: tuple[str, ...] = ()
    sme_keywords: tuple[str, ...] = ()
    ner_entities: tuple[tuple[str, str], ...] = ()
    source_ids: dict = field(default_factory=dict)
    citations: tuple[str, ...] = ()
    references: tuple[str, ...] = ()
    full_text: Optional[str] = None
    is_core: bool = False
    topic_id: Optional[int] = None

    def text(self) -> str:
        """Title and abstract joined, the unit most stages operate on."""
        return f"{self.title} {self.abstract}".strip()

    def to_json(self) -> str:
        d = {
            "doi": self.doi,
            "title": self.title,
            "abstract": self.abstract,
            "authors": [
                {"name": a.name, "affiliation": a.affiliation, "country": a.country}
                for a in self.authors
            ],
            "year": self.year,
            "publisher": self.publisher,
            "categories": list(self.categories),
            "affiliations": list(self.affiliations),
            "affiliation_countries": list(self.affiliation_countries),
            "acronyms": list(self.acronyms),
            "sme_keywords": list(self.sme_keywords),
            "ner_entities": [list(e) for e in self.ner_entities],
            "source_ids": dict(sorted(self.source_ids.items())),
            "citations": list(self.citations),
            "references": list(self.references),
            "full_text": self.full_text,
            "is_core": self.is_core,
            "topic_id": self.topic_id,
        }
        return json.dumps(d, ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> "Document":
        d = json.loads(line)
        return cls(
            doi=d["doi"],
            title=d.get("title", ""),
            abstract=d.get("abstract", ""),
            authors=tuple(
                Author(a["name"], a.get("affiliation"), a.get("country"))
                for a in d.get("authors", [])
            ),
            year=d.get("year"),
            publisher=d.get("publisher"),
            categories=tuple(d.get("categories", [])),
            affiliations=tuple(d.get("affiliations", [])),
            affiliation_countries=tuple(d.get("affiliation_countries", [])),
            acronyms=tuple(d.get("acronyms", [])),
            sme_keywords=tuple(d.get("sme_keywords", [])),
            ner_entities=tuple(tuple(e) for e in d.get("ner_entities", [])),
            source_ids=dict(d.get("source_ids", {})),
            citations=tuple(d.get("citations", [])),
            references=tuple(d.get("references", [])),
            full_text=d.get("full_text"),
            is_core=d.get("is_core", False),
            topic_id=d.get("topic_id"),
        )


@dataclass(frozen=True)
class PipelineEvent:
    stage: str
    timestamp: str
    count_before: int
    count_after: int


@dataclass
class Corpus:
    """An ordered collection of documents plus an append-only provenance log."""

    documents: list[Document] = field(default_factory=list)
    vocabulary: Optional[list[str]] = None
    provenance: list[PipelineEvent] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def dois(self) -> set[str]:
        return {d.doi for d in self.documents}

    def get(self, doi: str) -> Optional[Document]:
        for d in self.documents:
            if d.doi == doi:
                return d
        return None

    def record(self, stage: str, count_before: int, count_after: int, timestamp: str = ""):
        self.provenance.append(PipelineEvent(stage, timestamp, count_before, count_after))

    def link_report(self) -> dict:
        """Classify every cited/referenced DOI as internal or external."""
        known = self.dois()
        internal: set[str] = set()
        external: set[str] = set()
        for doc in self.documents:
            for ref in (*doc.citations, *doc.references):
                (internal if ref in known else external).add(ref)
        return {"internal": internal, "external": external}

    def save_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for doc in self.documents:
                fh.write(doc.to_json())
                fh.write("\n")

    @classmethod
    def load_jsonl(cls, path) -> "Corpus":
        docs = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    docs.append(Document.from_json(line))
        return cls(documents=docs)


def _precedence_key(source: str) -> int:
    return SOURCE_PRECEDENCE.index(source)


def _canonical_order(records: Sequence[SourceRecord]) -> list[SourceRecord]:
    # Precedence order, then source_id, so the merge result is independent of
    # the order records arrive in.
    return sorted(records, key=lambda r: (_precedence_key(r.source), r.source_id))


def _first_scalar(ordered: Iterable[SourceRecord], attr: str):
    for rec in ordered:
        value = getattr(rec, attr)
        if value not in (None, ""):
            return value
    return None


def _union(ordered: Iterable[Sequence], exclude=()) -> tuple:
    seen: list = []
    for values in ordered:
        for v in values:
            if v not in seen and v not in exclude:
                seen.append(v)
    return tuple(seen)


def merge_source_records(records: Sequence[SourceRecord]) -> Document:
    """Unify records that describe one publication into a single Document.

    Scalar conflicts are resolved by source precedence (scopus > s2 > osti);
    list fields are set-unioned with a deterministic, order-insensitive
    ordering. All source ids are retained.
    """
    if not records:
        raise ValueError("merge_source_records needs at least one record")
    dois = {r.doi for r in records if r.doi}
    if len(dois) > 1:
        raise IdentityMismatch(f"records carry distinct DOIs: {sorted(dois)}")

    ordered = _canonical_order(records)
    doi = next(iter(dois)) if dois else ordered[0].identity

    source_ids: dict[str, str] = {}
    for rec in ordered:
        source_ids.setdefault(rec.source, rec.source_id)

    authors = _union([r.authors for r in ordered])
    affiliations: list[str] = []
    countries: list[str] = []
    for a in authors:
        if a.affiliation and a.affiliation not in affiliations:
            affiliations.append(a.affiliation)
            countries.append(a.country or "")

    return Document(
        doi=doi,
        title=_first_scalar(ordered, "title") or "",
        abstract=_first_scalar(ordered, "abstract") or "",
        authors=authors,
        year=_first_scalar(ordered, "year"),
        publisher=_first_scalar(ordered, "publisher"),
        categories=_union([r.categories for r in ordered]),
        affiliations=tuple(affiliations),
        affiliation_countries=tuple(countries),
        acronyms=_union([r.acronyms for r in ordered]),
        source_ids=source_ids,
        citations=_union([r.citations for r in ordered], exclude={doi, *source_ids.values()}),
        references=_union([r.references for r in ordered], exclude={doi, *source_ids.values()}),
        full_text=_first_scalar(ordered, "full_text"),
    )


def document_as_record(doc: Document) -> SourceRecord:
    """Re-wrap a Document as a record of its highest-precedence source.

    Used to show merge idempotence: merging this record back with the
    originals reproduces the Document.
    """
    source = next((s for s in SOURCE_PRECEDENCE if s in doc.source_ids), "scopus")
    return SourceRecord(
        source=source,
        source_id=doc.source_ids.get(source, doc.doi),
        doi=doc.doi if not doc.doi.startswith("src:") else None,
        title=doc.title or None,
        abstract=doc.abstract or None,
        authors=doc.authors,
        year=doc.year,
        publisher=doc.publisher,
        categories=doc.categories,
        acronyms=doc.acronyms,
        citations=doc.citations,
        references=doc.references,
        full_text=doc.full_text,
    )


@dataclass(frozen=True)
class Violation:
    field: str
    rule: str


def validate_document(doc: Document) -> list[Violation]:
    """Check Document invariants; returns an empty list iff all hold."""
    violations: list[Violation] = []
    if not doc.doi:
        violations.append(Violation("doi", "missing doi"))
    if not doc.text():
        violations.append(Violation("title", "empty title and abstract"))
    if doc.year is not None and not (1800 <= doc.year <= 2100):
        violations.append(Violation("year", "year range [1800, 2100]"))
    for label, _surface in doc.ner_entities:
        if label not in NER_LABELS:
            violations.append(Violation("ner_entities", f"unknown ner label {label!r}"))
    if doc.doi in doc.citations:
        violations.append(Violation("citations", "self-citation"))
    if doc.doi in doc.references:
        violations.append(Violation("references", "self-reference"))
    for source in doc.source_ids:
        if source not in SOURCES:
            violations.append(Violation("source_ids", f"unknown source {source!r}"))
    return violations


def validate_corpus(corpus: Corpus) -> list[Violation]:
    """Corpus-level invariants: unique DOIs plus per-document checks."""
    violations: list[Violation] = []
    seen: set[str] = set()
    for doc in corpus.documents:
        if doc.doi in seen:
            violations.append(Violation("doi", f"duplicate doi {doc.doi}"))
        seen.add(doc.doi)
        violations.extend(validate_document(doc))
    return violations


def with_topic(doc: Document, topic_id: int) -> Document:
    return replace(doc, topic_id=topic_id)
