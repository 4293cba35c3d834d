"""Shared builders for synthetic corpora and graph fixtures."""
from __future__ import annotations

import numpy as np
import pytest

from slic.corpus import Corpus, Document, SourceRecord


def make_doc(doi="10.1000/x", title="a title", abstract="an abstract", **kwargs) -> Document:
    return Document(doi=doi, title=title, abstract=abstract, **kwargs)


def make_record(source="scopus", source_id="S1", doi="10.1000/x", **kwargs) -> SourceRecord:
    return SourceRecord(source=source, source_id=source_id, doi=doi, **kwargs)


def planted_corpus(n_topics: int, docs_per_topic: int, tvocab: int = 12, reps: int = 4) -> tuple[Corpus, list[int]]:
    """Disjoint per-topic vocabularies; documents within a topic are equal
    bags of the topic phrase, so the block structure is exact."""
    docs, labels = [], []
    for t in range(n_topics):
        phrase = " ".join(f"t{t}w{i}" for i in range(tvocab))
        for d in range(docs_per_topic):
            docs.append(
                Document(
                    doi=f"10.1000/t{t}.d{d:02d}",
                    title="",
                    abstract=" ".join([phrase] * reps),
                )
            )
            labels.append(t)
    return Corpus(documents=docs), labels


@pytest.fixture
def small_corpus() -> Corpus:
    return Corpus(
        documents=[
            make_doc(doi="10.1/a", title="tensor decomposition", abstract="tensor decomposition methods"),
            make_doc(doi="10.1/b", title="anomaly detection", abstract="network anomaly detection"),
            make_doc(doi="10.1/c", title="malware analysis", abstract="malware binary analysis"),
        ]
    )


def rng(seed: int = 0) -> np.random.Generator:
    return np.random.default_rng(seed)
