"""Corpus expansion over pluggable scholarly sources.

The default source replays recorded fixture files so every build is
reproducible offline; live HTTP clients implement the same interface
behind configuration.
"""
from __future__ import annotations

import json
import re
import time
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Protocol, Sequence

from .cleaning import CleaningConfig, clean_corpus, extract_bigrams
from .corpus import Author, Corpus, Document, SourceRecord, merge_source_records
from .errors import SourceUnavailable


class ScholarlySource(Protocol):
    def lookup(self, doi: str) -> Optional[SourceRecord]: ...

    def cited_by(self, doi: str) -> list[SourceRecord]: ...

    def references(self, doi: str) -> list[SourceRecord]: ...

    def search(self, query: str, limit: int) -> list[SourceRecord]: ...


@dataclass
class ExpansionConfig:
    hops: int = 2
    per_hop_limit: int = 50
    bigram_query_count: int = 5
    bigram_result_limit: int = 20

    def __post_init__(self):
        if self.hops < 0:
            raise ValueError("hops must be >= 0")
        if self.hops > 4:
            raise ValueError("hops > 4 would risk an expansion explosion")


def _record_from_dict(d: dict) -> SourceRecord:
    return SourceRecord(
        source=d["source"],
        source_id=d["source_id"],
        doi=d.get("doi"),
        title=d.get("title"),
        abstract=d.get("abstract"),
        authors=tuple(
            Author(a["name"], a.get("affiliation"), a.get("country"))
            for a in d.get("authors", [])
        ),
        year=d.get("year"),
        publisher=d.get("publisher"),
        categories=tuple(d.get("categories", [])),
        acronyms=tuple(d.get("acronyms", [])),
        citations=tuple(d.get("citations", [])),
        references=tuple(d.get("references", [])),
        full_text=d.get("full_text"),
    )


def record_to_dict(rec: SourceRecord) -> dict:
    return {
        "source": rec.source,
        "source_id": rec.source_id,
        "doi": rec.doi,
        "title": rec.title,
        "abstract": rec.abstract,
        "authors": [
            {"name": a.name, "affiliation": a.affiliation, "country": a.country}
            for a in rec.authors
        ],
        "year": rec.year,
        "publisher": rec.publisher,
        "categories": list(rec.categories),
        "acronyms": list(rec.acronyms),
        "citations": list(rec.citations),
        "references": list(rec.references),
        "full_text": rec.full_text,
    }


def fixture_key(raw: str) -> str:
    """Filename-safe key for fixture lookups."""
    return re.sub(r"[^A-Za-z0-9._-]", "_", raw)


class FixtureSource:
    """Replays recorded responses from fixtures/<source>/<kind>/<key>.json."""

    def __init__(self, root, source: str):
        self.root = Path(root) / source
        self.source = source

    def _read(self, kind: str, key: str):
        path = self.root / kind / f"{fixture_key(key)}.json"
        if not path.exists():
            return None
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)

    def lookup(self, doi: str) -> Optional[SourceRecord]:
        data = self._read("lookup", doi)
        return _record_from_dict(data) if data else None

    def cited_by(self, doi: str) -> list[SourceRecord]:
        data = self._read("cited_by", doi) or []
        return [_record_from_dict(d) for d in data]

    def references(self, doi: str) -> list[SourceRecord]:
        data = self._read("references", doi) or []
        return [_record_from_dict(d) for d in data]

    def search(self, query: str, limit: int) -> list[SourceRecord]:
        data = self._read("search", query) or []
        return [_record_from_dict(d) for d in data[:limit]]


class CompositeSource:
    """Fans a request out to several sources and concatenates the results."""

    def __init__(self, sources: Sequence[ScholarlySource]):
        self.sources = list(sources)

    def lookup(self, doi: str) -> Optional[SourceRecord]:
        for src in self.sources:
            rec = src.lookup(doi)
            if rec is not None:
                return rec
        return None

    def lookup_all(self, doi: str) -> list[SourceRecord]:
        return [rec for src in self.sources if (rec := src.lookup(doi)) is not None]

    def cited_by(self, doi: str) -> list[SourceRecord]:
        return [rec for src in self.sources for rec in src.cited_by(doi)]

    def references(self, doi: str) -> list[SourceRecord]:
        return [rec for src in self.sources for rec in src.references(doi)]

    def search(self, query: str, limit: int) -> list[SourceRecord]:
        return [rec for src in self.sources for rec in src.search(query, limit)]


class HttpSource:
    """Live client skeleton: bearer token from SLIC_<SOURCE>_TOKEN, <= 3 req/s.

    Endpoint layout mirrors the fixture kinds; a deployment points base_url
    at a service that serves SourceRecord JSON.
    """

    def __init__(self, base_url: str, source: str, token: Optional[str] = None, session=None):
        import os

        self.base_url = base_url.rstrip("/")
        self.source = source
        self.token = token or os.environ.get(f"SLIC_{source.upper()}_TOKEN", "")
        self._session = session
        self._last_request = 0.0

    def _get(self, path: str):
        if self._session is None:
            import urllib.request

            self._throttle()
            req = urllib.request.Request(
                f"{self.base_url}/{path}",
                headers={"Authorization": f"Bearer {self.token}"},
            )
            try:
                with urllib.request.urlopen(req, timeout=30) as resp:
                    return json.loads(resp.read().decode("utf-8"))
            except Exception as exc:
                raise SourceUnavailable(f"{self.source}: {exc}") from exc
        self._throttle()
        resp = self._session.get(
            f"{self.base_url}/{path}", headers={"Authorization": f"Bearer {self.token}"}
        )
        if getattr(resp, "status_code", 200) >= 400:
            raise SourceUnavailable(f"{self.source}: HTTP {resp.status_code}")
        return resp.json()

    def _throttle(self):
        wait = self._last_request + 1.0 / 3.0 - time.monotonic()
        if wait > 0:
            time.sleep(wait)
        self._last_request = time.monotonic()

    def lookup(self, doi: str) -> Optional[SourceRecord]:
        data = self._get(f"lookup/{doi}")
        return _record_from_dict(data) if data else None

    def cited_by(self, doi: str) -> list[SourceRecord]:
        return [_record_from_dict(d) for d in self._get(f"cited_by/{doi}")]

    def references(self, doi: str) -> list[SourceRecord]:
        return [_record_from_dict(d) for d in self._get(f"references/{doi}")]

    def search(self, query: str, limit: int) -> list[SourceRecord]:
        return [_record_from_dict(d) for d in self._get(f"search/{query}")][:limit]


def _group_by_identity(records: Sequence[SourceRecord]) -> list[list[SourceRecord]]:
    groups: dict[str, list[SourceRecord]] = defaultdict(list)
    for rec in records:
        groups[rec.identity].append(rec)
    return [groups[key] for key in groups]


def expand_citations(
    core: Sequence[Document], src: ScholarlySource, cfg: ExpansionConfig
) -> Corpus:
    """Breadth-first expansion over citations and references.

    Each hop fetches the neighbors of the current frontier; a visited set
    prevents re-fetching. Core documents are flagged.
    """
    if not core:
        raise ValueError("core documents must be non-empty")
    from dataclasses import replace

    documents: list[Document] = [replace(doc, is_core=True) for doc in core]
    visited: set[str] = {doc.doi for doc in documents}
    frontier: list[str] = [doc.doi for doc in documents]

    for _hop in range(cfg.hops):
        fetched: list[SourceRecord] = []
        for doi in frontier:
            try:
                neighbors = list(src.cited_by(doi)) + list(src.references(doi))
            except SourceUnavailable as exc:
                exc.partial = Corpus(documents=documents)
                raise
            fetched.extend(neighbors[: cfg.per_hop_limit])
        next_frontier: list[str] = []
        for group in _group_by_identity(fetched):
            doc = merge_source_records(group)
            if doc.doi in visited:
                continue
            visited.add(doc.doi)
            documents.append(doc)
            next_frontier.append(doc.doi)
        frontier = next_frontier
        if not frontier:
            break
    return Corpus(documents=documents)


def search_by_bigrams(
    corpus: Corpus, src: ScholarlySource, cfg: ExpansionConfig
) -> list[Document]:
    """Issue the corpus's top bigrams as quoted queries; dedupe by identity."""
    found: list[Document] = []
    known = corpus.dois()
    if cfg.bigram_query_count <= 0:
        return found
    core = Corpus(documents=[d for d in corpus.documents if d.is_core] or corpus.documents)
    for stat in extract_bigrams(core, cfg.bigram_query_count):
        query = f'"{stat.terms[0]} {stat.terms[1]}"'
        results = src.search(query, cfg.bigram_result_limit)
        for group in _group_by_identity(results):
            doc = merge_source_records(group)
            if doc.doi in known:
                continue
            known.add(doc.doi)
            found.append(doc)
    return found


def assemble_corpus(
    core: Sequence[Document],
    src: ScholarlySource,
    cfg: ExpansionConfig,
    cleaning: Optional[CleaningConfig] = None,
    recognizer=None,
) -> Corpus:
    """expand -> bigram search -> clean, with a provenance event per stage.

    Entity annotation, when a recognizer is given, happens on the raw text
    because cleaning destroys the casing the recognizer relies on.
    """
    from dataclasses import replace

    cleaning = cleaning or CleaningConfig()

    corpus = expand_citations(core, src, cfg)
    corpus.record("expand_citations", len(core), len(corpus))

    # Bigram queries run over the cleaned core text.
    cleaned_view = clean_corpus(corpus, cleaning)
    searched = search_by_bigrams(cleaned_view, src, cfg)
    before = len(corpus)
    corpus.documents.extend(searched)
    corpus.record("search_by_bigrams", before, len(corpus))

    if recognizer is not None:
        corpus.documents = [
            replace(doc, ner_entities=tuple(recognizer.entities(doc.text())))
            for doc in corpus.documents
        ]

    before = len(corpus)
    cleaned = clean_corpus(corpus, cleaning)
    cleaned.provenance = list(corpus.provenance)
    cleaned.record("clean_text", before, len(cleaned))
    return cleaned
