"""TF-IDF construction, 2-D projection for SME review, and pruning.

Human-in-the-loop review works on a deterministic rank-2 spectral
projection of the document columns; automatic pruning keeps documents
whose embedding lies within a cosine threshold of any anchor.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import Corpus
from .errors import EmptyVocabulary, IncompleteDecisions, ZeroVector


@dataclass
class TfidfMatrix:
    values: np.ndarray  # m terms x n documents, all entries >= 0
    vocabulary: list[str]
    doc_keys: list[str]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def build_tfidf(corpus: Corpus) -> TfidfMatrix:
    """tf * idf with idf = ln((1+n)/(1+df)) + 1 over cleaned documents."""
    doc_tokens = [doc.text().split() for doc in corpus.documents]
    n = len(doc_tokens)
    vocabulary = sorted({t for tokens in doc_tokens for t in tokens})
    if not vocabulary or n == 0:
        raise EmptyVocabulary("no tokens survive cleaning")
    index = {t: i for i, t in enumerate(vocabulary)}

    tf = np.zeros((len(vocabulary), n), dtype=np.float64)
    for j, tokens in enumerate(doc_tokens):
        for t in tokens:
            tf[index[t], j] += 1.0
    df = (tf > 0).sum(axis=1)
    idf = np.log((1.0 + n) / (1.0 + df)) + 1.0
    return TfidfMatrix(values=tf * idf[:, None], vocabulary=vocabulary, doc_keys=[d.doi for d in corpus.documents])


def project_2d(X: TfidfMatrix) -> list[tuple[str, float, float]]:
    """Rank-2 truncated SVD of the centered document columns.

    Sign convention: each component is flipped so its largest-magnitude
    term loading is positive, making the projection reproducible.
    """
    values = X.values.astype(np.float64)
    n = values.shape[1]
    centered = values - values.mean(axis=1, keepdims=True)
    if n == 1 or not np.any(centered):
        return [(doi, 0.0, 0.0) for doi in X.doc_keys]
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    coords = np.zeros((n, 2))
    ranks = min(2, len(s))
    for c in range(ranks):
        load = u[:, c]
        pivot = int(np.argmax(np.abs(load)))
        sign = 1.0 if load[pivot] >= 0 else -1.0
        coords[:, c] = sign * s[c] * vt[c, :]
    return [(doi, float(x), float(y)) for doi, (x, y) in zip(X.doc_keys, coords)]


@dataclass(frozen=True)
class ReviewCluster:
    cluster_id: int
    member_dois: tuple[str, ...]
    centroid_doi: str
    centroid_xy: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "cluster_id": self.cluster_id,
            "member_dois": list(self.member_dois),
            "centroid_doi": self.centroid_doi,
            "centroid_xy": list(self.centroid_xy),
        }


def _kmeans_pp_init(points: np.ndarray, c: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((c, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    dist2 = ((points - centers[0]) ** 2).sum(axis=1)
    for i in range(1, c):
        total = dist2.sum()
        if total <= 0:
            centers[i] = points[rng.integers(n)]
            continue
        probs = dist2 / total
        centers[i] = points[rng.choice(n, p=probs)]
        dist2 = np.minimum(dist2, ((points - centers[i]) ** 2).sum(axis=1))
    return centers


def _kmeans(points: np.ndarray, c: int, seed: int, iters: int = 100) -> np.ndarray:
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(points, c, rng)
    labels = np.zeros(len(points), dtype=int)
    for _ in range(iters):
        dists = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = dists.argmin(axis=1)
        for i in range(c):
            members = points[new_labels == i]
            if len(members):
                centers[i] = members.mean(axis=0)
            else:
                # Reseed an empty cluster at the point farthest from its center.
                far = int(dists.min(axis=1).argmax())
                centers[i] = points[far]
                new_labels[far] = i
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
    return labels


def propose_review_clusters(
    points: Sequence[tuple[str, float, float]], c: int, seed: int = 0
) -> list[ReviewCluster]:
    """Seeded k-means over the 2-D projection, one reviewable group each.

    The centroid document is the member nearest the cluster mean, ties
    broken by the lexicographically smallest DOI.
    """
    if c < 1 or c > len(points):
        raise ValueError("need 1 <= c <= number of documents")
    dois = [p[0] for p in points]
    xy = np.array([[p[1], p[2]] for p in points], dtype=np.float64)
    labels = _kmeans(xy, c, seed)

    clusters = []
    for cid in range(c):
        member_idx = [i for i, l in enumerate(labels) if l == cid]
        members = sorted(dois[i] for i in member_idx)
        mean = xy[member_idx].mean(axis=0)
        best = min(
            member_idx,
            key=lambda i: (float(((xy[i] - mean) ** 2).sum()), dois[i]),
        )
        clusters.append(
            ReviewCluster(
                cluster_id=cid,
                member_dois=tuple(members),
                centroid_doi=dois[best],
                centroid_xy=(float(mean[0]), float(mean[1])),
            )
        )
    return clusters


def prune_by_similarity(
    embeddings: dict[str, np.ndarray], anchors: set[str], tau: float
) -> tuple[set[str], set[str]]:
    """Keep anchors plus anything within cosine tau of the nearest anchor."""
    missing = anchors - embeddings.keys()
    if missing:
        raise KeyError(f"anchor DOIs missing from embeddings: {sorted(missing)}")
    norms = {}
    for doi, vec in embeddings.items():
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise ZeroVector(f"zero-norm embedding for {doi}")
        norms[doi] = np.asarray(vec, dtype=np.float64) / norm

    anchor_mat = np.array([norms[a] for a in sorted(anchors)])
    kept: set[str] = set()
    removed: set[str] = set()
    for doi, vec in norms.items():
        if doi in anchors:
            kept.add(doi)
            continue
        best = float((anchor_mat @ vec).max()) if len(anchor_mat) else -np.inf
        if best >= tau:
            kept.add(doi)
        else:
            removed.add(doi)
    return kept, removed


@dataclass(frozen=True)
class PruneDecision:
    cluster_id: int
    verdict: str  # "keep" | "remove"
    decided_by: str = "sme"  # "sme" | "auto"
    anchor_dois_added: tuple[str, ...] = ()

    def __post_init__(self):
        if self.verdict not in ("keep", "remove"):
            raise ValueError(f"verdict must be keep/remove, got {self.verdict!r}")
        if self.decided_by not in ("sme", "auto"):
            raise ValueError(f"decided_by must be sme/auto, got {self.decided_by!r}")

    def to_dict(self) -> dict:
        return {
            "cluster_id": self.cluster_id,
            "verdict": self.verdict,
            "decided_by": self.decided_by,
            "anchor_dois_added": list(self.anchor_dois_added),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PruneDecision":
        return cls(
            cluster_id=d["cluster_id"],
            verdict=d["verdict"],
            decided_by=d.get("decided_by", "sme"),
            anchor_dois_added=tuple(d.get("anchor_dois_added", [])),
        )


def load_decisions(path) -> list[PruneDecision]:
    decisions = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                decisions.append(PruneDecision.from_dict(json.loads(line)))
    return decisions


def save_decisions(decisions: Iterable[PruneDecision], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in decisions:
            fh.write(json.dumps(d.to_dict()) + "\n")


def apply_decisions(
    corpus: Corpus,
    decisions: Sequence[PruneDecision],
    clusters: Sequence[ReviewCluster],
) -> tuple[Corpus, set[str]]:
    """Drop remove-verdict clusters (core documents are never dropped).

    Returns the pruned corpus and the anchor set collected from decisions,
    which feeds the subsequent embedding-distance prune.
    """
    decided = {}
    for d in decisions:
        if d.cluster_id in decided:
            raise IncompleteDecisions(f"duplicate decision for cluster {d.cluster_id}")
        decided[d.cluster_id] = d
    missing = [c.cluster_id for c in clusters if c.cluster_id not in decided]
    if missing:
        raise IncompleteDecisions(f"no decision for clusters {missing}")

    to_remove: set[str] = set()
    anchors: set[str] = set()
    for cluster in clusters:
        decision = decided[cluster.cluster_id]
        anchors.update(decision.anchor_dois_added)
        if decision.verdict == "remove":
            to_remove.update(cluster.member_dois)

    before = len(corpus)
    docs = [d for d in corpus.documents if d.is_core or d.doi not in to_remove]
    pruned = Corpus(documents=docs, vocabulary=corpus.vocabulary, provenance=list(corpus.provenance))
    pruned.record("review_prune", before, len(docs))
    return pruned, anchors
