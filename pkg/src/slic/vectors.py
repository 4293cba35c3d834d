"""Embedding-backed store over documents and full-text paragraph chunks.

Search is exact: cosine KNN over unit vectors and a normalized Levenshtein
string lookup that serves as the entry point before semantic expansion.
"""
from __future__ import annotations

import base64
import hashlib
import json
import re
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .errors import EmbeddingDimensionMismatch, EmptyStore


class EmbeddingProvider(Protocol):
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


class DeterministicEmbedder:
    """Hash-bucketed token counts, L2-normalized.

    The vector depends only on the token multiset of the input, so equal
    cleaned texts embed identically across processes and platforms.
    """

    def __init__(self, dim: int = 256):
        self.dim = dim

    def _bucket(self, token: str) -> int:
        digest = hashlib.sha1(token.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little") % self.dim

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        for token in re.findall(r"[a-z0-9]+", text.lower()):
            vec[self._bucket(token)] += 1.0
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            vec[0] = 1.0
            return vec
        return vec / norm


@dataclass
class VectorRecord:
    doi: str
    chunk_id: int  # -1 for the title+abstract record, >=0 for paragraphs
    text: str
    vector: np.ndarray
    norm_title: str


@dataclass(frozen=True)
class Hit:
    doi: str
    chunk_id: int
    score: float
    text: str


def chunk_fulltext(text: str, max_chars: int = 1000) -> list[tuple[int, str]]:
    """Split a full text into paragraph chunks with position ids.

    Paragraphs are blank-line separated; over-long paragraphs are re-split
    at the last sentence boundary before the limit (hard split if none).
    """
    if max_chars < 200:
        raise ValueError("max_chars must be >= 200")
    pieces: list[str] = []
    for para in re.split(r"\n\s*\n", text):
        para = para.strip()
        if not para:
            continue
        while len(para) > max_chars:
            window = para[: max_chars + 1]
            boundary = max(window.rfind(". "), window.rfind("? "), window.rfind("! "))
            cut = boundary + 1 if boundary > 0 else max_chars
            pieces.append(para[:cut].strip())
            para = para[cut:].strip()
        if para:
            pieces.append(para)
    return list(enumerate(pieces))


class VectorStore:
    def __init__(self, dim: int):
        self.dim = dim
        self.records: list[VectorRecord] = []
        self.doc_count = 0
        self.chunk_count = 0

    def __len__(self) -> int:
        return len(self.records)

    def add(self, record: VectorRecord) -> None:
        if record.vector.shape != (self.dim,):
            raise EmbeddingDimensionMismatch(
                f"vector of dim {record.vector.shape} does not match store dim {self.dim}"
            )
        self.records.append(record)

    def records_for(self, doi: str) -> list[VectorRecord]:
        return [r for r in self.records if r.doi == doi]

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"d": self.dim, "count": len(self.records)}) + "\n")
            for r in self.records:
                raw = base64.b64encode(
                    r.vector.astype("<f4").tobytes()
                ).decode("ascii")
                fh.write(
                    json.dumps(
                        {
                            "doi": r.doi,
                            "chunk_id": r.chunk_id,
                            "text": r.text,
                            "vector": raw,
                            "norm_title": r.norm_title,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )

    @classmethod
    def load(cls, path) -> "VectorStore":
        with open(path, "r", encoding="utf-8") as fh:
            header = json.loads(fh.readline())
            store = cls(dim=header["d"])
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                d = json.loads(line)
                vec = np.frombuffer(base64.b64decode(d["vector"]), dtype="<f4").copy()
                store.add(
                    VectorRecord(
                        doi=d["doi"],
                        chunk_id=d["chunk_id"],
                        text=d["text"],
                        vector=vec,
                        norm_title=d["norm_title"],
                    )
                )
        store.doc_count = sum(1 for r in store.records if r.chunk_id == -1)
        store.chunk_count = len(store.records) - store.doc_count
        return store


def index_documents(corpus, provider: EmbeddingProvider, max_chars: int = 1000) -> VectorStore:
    """One title+abstract record per document plus chunk records per full text."""
    store = VectorStore(dim=provider.dim)
    for doc in corpus.documents:
        store.add(
            VectorRecord(
                doi=doc.doi,
                chunk_id=-1,
                text=doc.text(),
                vector=provider.embed(doc.text()),
                norm_title=doc.title.lower(),
            )
        )
        store.doc_count += 1
        if doc.full_text:
            for chunk_id, para in chunk_fulltext(doc.full_text, max_chars):
                store.add(
                    VectorRecord(
                        doi=doc.doi,
                        chunk_id=chunk_id,
                        text=para,
                        vector=provider.embed(para),
                        norm_title=doc.title.lower(),
                    )
                )
                store.chunk_count += 1
    return store


def knn_cosine(store: VectorStore, query_vector: np.ndarray, k: int) -> list[Hit]:
    """Exact top-k by cosine similarity (vectors are unit, so dot product)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not store.records:
        raise EmptyStore("vector store has no records")
    if query_vector.shape != (store.dim,):
        raise EmbeddingDimensionMismatch(
            f"query dim {query_vector.shape} does not match store dim {store.dim}"
        )
    hits = [
        Hit(r.doi, r.chunk_id, float(np.dot(r.vector, query_vector)), r.text)
        for r in store.records
    ]
    hits.sort(key=lambda h: (-h.score, h.doi, h.chunk_id))
    return hits[:k]


def edit_distance(a: str, b: str) -> int:
    """Classic Levenshtein DP with two rows."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[-1]


def normalized_levenshtein(a: str, b: str) -> float:
    """Edit distance over the longer length; in [0, 1], 0 iff equal."""
    if not a and not b:
        return 0.0
    return edit_distance(a, b) / max(len(a), len(b))


def knn_levenshtein(store: VectorStore, query: str, k: int, field: str = "title") -> list[Hit]:
    """Exact top-k by ascending normalized edit distance, score = -distance.

    With field="title" only the one title record per document competes;
    field="text" scans every record's text.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if field not in ("title", "text"):
        raise ValueError("field must be 'title' or 'text'")
    candidates = (
        [r for r in store.records if r.chunk_id == -1] if field == "title" else store.records
    )
    if not candidates:
        raise EmptyStore("vector store has no records")
    q = query.lower()
    hits = []
    for r in candidates:
        target = r.norm_title if field == "title" else r.text.lower()
        hits.append(Hit(r.doi, r.chunk_id, -normalized_levenshtein(q, target), r.text))
    hits.sort(key=lambda h: (-h.score, h.doi, h.chunk_id))
    return hits[:k]
