"""Nonnegative matrix factorization with automatic model selection.

The TF-IDF matrix X is factorized as X ~ W H with multiplicative updates;
the number of topics is chosen by a binary search over k that skips values
which can no longer be the largest k whose clustering clears the
silhouette threshold, while still probing higher k so no better
configuration is overlooked.
"""
from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DegenerateLabels, DimensionError

_EPS = 1e-12


@dataclass
class FactorPair:
    W: np.ndarray  # m x k term-topic loadings, >= 0
    H: np.ndarray  # k x n topic-document loadings, >= 0
    k: int
    objective_trace: list[float]
    seed: int


def nmf_factorize(
    X,
    k: int,
    seed: int = 0,
    max_iters: int = 500,
    tol: float = 1e-6,
) -> FactorPair:
    """Minimize ||X - WH||_F by multiplicative updates.

    W and H start as seeded uniform(0,1) scaled by sqrt(mean(X)/k); the
    loop stops at max_iters or when the relative objective change drops
    below tol.
    """
    values = X.values if hasattr(X, "values") else np.asarray(X, dtype=np.float64)
    if values.ndim != 2:
        raise DimensionError(f"X must be a matrix, got ndim={values.ndim}")
    m, n = values.shape
    if k < 1 or k > min(m, n):
        raise DimensionError(f"need 1 <= k <= min(m, n) = {min(m, n)}, got k={k}")
    if values.min() < 0:
        raise ValueError("X must be nonnegative")

    rng = np.random.default_rng(seed)
    scale = np.sqrt(values.mean() / k)
    W = rng.uniform(0.0, 1.0, size=(m, k)) * scale
    H = rng.uniform(0.0, 1.0, size=(k, n)) * scale

    def objective() -> float:
        return float(np.linalg.norm(values - W @ H))

    trace = [objective()]
    for _ in range(max_iters):
        H *= (W.T @ values) / (W.T @ W @ H + _EPS)
        W *= (values @ H.T) / (W @ H @ H.T + _EPS)
        trace.append(objective())
        prev, cur = trace[-2], trace[-1]
        if abs(prev - cur) < tol * max(prev, _EPS):
            break
    return FactorPair(W=W, H=H, k=k, objective_trace=trace, seed=seed)


def assign_clusters(H: np.ndarray) -> list[int]:
    """Predominant topic per document: argmax row per column, ties low."""
    return [int(i) for i in np.argmax(H, axis=0)]


def silhouette_score(points: Sequence[np.ndarray], labels: Sequence[int]) -> float:
    """Mean silhouette (b - a)/max(a, b) with Euclidean distances.

    Points in singleton clusters contribute 0.
    """
    pts = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels)
    if len(pts) < 2:
        raise DegenerateLabels("need at least 2 points")
    unique = np.unique(labels)
    if len(unique) < 2:
        raise DegenerateLabels("need at least 2 distinct labels")

    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    scores = np.zeros(len(pts))
    for i in range(len(pts)):
        same = labels == labels[i]
        n_same = same.sum()
        if n_same <= 1:
            continue
        a = dist[i][same].sum() / (n_same - 1)
        b = min(dist[i][labels == other].mean() for other in unique if other != labels[i])
        denom = max(a, b)
        scores[i] = 0.0 if denom == 0.0 else (b - a) / denom
    return float(scores.mean())


def _h_points(H: np.ndarray) -> np.ndarray:
    """Documents as their H column normalized to unit L1."""
    col_sums = H.sum(axis=0, keepdims=True)
    col_sums[col_sums == 0.0] = 1.0
    return (H / col_sums).T


@dataclass
class KSelection:
    k_min: int
    k_max: int
    threshold: float
    scores: dict[int, float] = field(default_factory=dict)
    visited: set[int] = field(default_factory=set)
    skipped: set[int] = field(default_factory=set)
    k_optimal: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "k_min": self.k_min,
            "k_max": self.k_max,
            "threshold": self.threshold,
            "scores": {str(k): v for k, v in sorted(self.scores.items())},
            "visited": sorted(self.visited),
            "skipped": sorted(self.skipped),
            "k_optimal": self.k_optimal,
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def evaluate_k(X, k: int, seed: int, max_iters: int = 500, tol: float = 1e-6) -> float:
    """Silhouette of the k-topic clustering of X, a pure function of (X, k, seed).

    A configuration whose argmax clustering uses fewer than k distinct
    clusters failed to sustain k topics and scores -1 (can never clear a
    threshold), which steers model selection away from over-fitting.
    """
    pair = nmf_factorize(X, k, seed=seed, max_iters=max_iters, tol=tol)
    labels = assign_clusters(pair.H)
    if len(set(labels)) != k:
        return -1.0
    return silhouette_score(_h_points(pair.H), labels)


def binary_bleed_search(
    X,
    k_max: int,
    threshold: float = 0.25,
    seed: int = 0,
    max_iters: int = 500,
    tol: float = 1e-6,
    workers: int = 1,
    evaluate: Optional[Callable[[int], float]] = None,
) -> KSelection:
    """Find max{k : S(f(k)) > T} without evaluating every k.

    Probes proceed by binary splitting over {2..k_max}. Once some k
    passes the threshold, every smaller unvisited k is skipped (it can no
    longer be the maximum passing value) while larger k are still visited.
    The result provably equals an exhaustive scan's.
    """
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    n_limit = min(X.values.shape) if hasattr(X, "values") else min(np.asarray(X).shape)

    selection = KSelection(k_min=1, k_max=k_max, threshold=threshold)
    # k=1 yields a single cluster, so its silhouette is undefined.
    selection.skipped.add(1)

    def default_evaluate(k: int) -> float:
        return evaluate_k(X, k, seed=seed, max_iters=max_iters, tol=tol)

    evaluate = evaluate or default_evaluate
    best: Optional[int] = None

    def mark_skipped(lo: int, hi: int) -> None:
        for k in range(lo, hi + 1):
            if k not in selection.visited:
                selection.skipped.add(k)

    def visit(k: int) -> bool:
        if k > n_limit:
            selection.skipped.add(k)
            return False
        score = evaluate(k)
        selection.visited.add(k)
        selection.scores[k] = score
        return score > threshold

    def apply_result(k: int, passed: bool) -> None:
        nonlocal best
        if passed and (best is None or k > best):
            best = k

    if workers <= 1:
        # Depth-first, upper halves first, so a passing mid prunes the
        # largest possible set of lower candidates.
        stack: list[tuple[int, int]] = [(2, k_max)]
        while stack:
            lo, hi = stack.pop()
            if lo > hi:
                continue
            if best is not None and hi <= best:
                mark_skipped(lo, hi)
                continue
            lo = max(lo, (best + 1) if best is not None else lo)
            mid = (lo + hi) // 2
            passed = visit(mid)
            apply_result(mid, passed)
            if passed:
                mark_skipped(2, mid - 1)
                stack.append((mid + 1, hi))
            else:
                # Lower half is explored after the upper half finishes.
                stack.append((lo, mid - 1))
                stack.append((mid + 1, hi))
    else:
        # Round-based frontier: each round evaluates all pending interval
        # midpoints concurrently, then applies results in deterministic
        # order. May evaluate more k than the sequential walk, never
        # different scores.
        frontier: list[tuple[int, int]] = [(2, k_max)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            while frontier:
                frontier = [iv for iv in frontier if iv[0] <= iv[1]]
                pending = []
                for lo, hi in frontier:
                    if best is not None and hi <= best:
                        mark_skipped(lo, hi)
                        continue
                    pending.append((lo, hi, (lo + hi) // 2))
                if not pending:
                    break
                mids = sorted({mid for _, _, mid in pending if mid <= n_limit})
                results = dict(zip(mids, pool.map(evaluate, mids)))
                next_frontier: list[tuple[int, int]] = []
                for lo, hi, mid in sorted(pending):
                    if mid > n_limit:
                        selection.skipped.add(mid)
                        continue
                    selection.visited.add(mid)
                    selection.scores[mid] = results[mid]
                    passed = results[mid] > threshold
                    apply_result(mid, passed)
                    if passed:
                        mark_skipped(2, mid - 1)
                        next_frontier.append((mid + 1, hi))
                    else:
                        next_frontier.append((mid + 1, hi))
                        next_frontier.append((lo, mid - 1))
                frontier = next_frontier

    selection.k_optimal = best
    if best is not None:
        mark_skipped(2, best - 1)
    return selection


def exhaustive_k_scan(
    X,
    k_max: int,
    threshold: float = 0.25,
    seed: int = 0,
    max_iters: int = 500,
    tol: float = 1e-6,
) -> KSelection:
    """Reference scan over every k in {2..k_max}; the oracle for the search."""
    n_limit = min(X.values.shape) if hasattr(X, "values") else min(np.asarray(X).shape)
    selection = KSelection(k_min=1, k_max=k_max, threshold=threshold)
    selection.skipped.add(1)
    best = None
    for k in range(2, k_max + 1):
        if k > n_limit:
            selection.skipped.add(k)
            continue
        score = evaluate_k(X, k, seed=seed, max_iters=max_iters, tol=tol)
        selection.visited.add(k)
        selection.scores[k] = score
        if score > threshold:
            best = k
    selection.k_optimal = best
    return selection


@dataclass(frozen=True)
class TopicSummary:
    topic_id: int
    label: str
    doc_count: int
    percent: float
    top_terms: tuple[tuple[str, float], ...]

    def to_dict(self) -> dict:
        return {
            "topic_id": self.topic_id,
            "label": self.label,
            "doc_count": self.doc_count,
            "percent": self.percent,
            "top_terms": [[t, w] for t, w in self.top_terms],
        }


def derive_topics(
    pair: FactorPair,
    vocabulary: Sequence[str],
    labels: Sequence[int],
    top_n: int = 10,
    label_overrides: Optional[dict[int, str]] = None,
) -> list[TopicSummary]:
    """Per-topic top terms, document counts and percentages.

    The default label joins the top three terms; an SME can override it.
    """
    n = len(labels)
    overrides = label_overrides or {}
    summaries = []
    for topic in range(pair.k):
        column = pair.W[:, topic]
        order = sorted(range(len(column)), key=lambda i: (-column[i], vocabulary[i]))
        top = tuple((vocabulary[i], float(column[i])) for i in order[:top_n])
        doc_count = sum(1 for l in labels if l == topic)
        percent = round(100.0 * doc_count / n, 2) if n else 0.0
        label = overrides.get(topic) or " ".join(t for t, _ in top[:3])
        summaries.append(
            TopicSummary(
                topic_id=topic,
                label=label,
                doc_count=doc_count,
                percent=percent,
                top_terms=top,
            )
        )
    return summaries


def save_factors(pair: FactorPair, out_dir) -> None:
    """Write W.csv and H.csv (row-major, headerless) under factors_k<k>/."""
    directory = Path(out_dir) / f"factors_k{pair.k}"
    directory.mkdir(parents=True, exist_ok=True)
    for name, matrix in (("W.csv", pair.W), ("H.csv", pair.H)):
        with open(directory / name, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            for row in matrix:
                writer.writerow([f"{v:.12g}" for v in row])
