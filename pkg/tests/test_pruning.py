import math

import numpy as np
import pytest

from slic.corpus import Corpus
from slic.errors import EmptyVocabulary, IncompleteDecisions, ZeroVector
from slic.pruning import (
    PruneDecision,
    ReviewCluster,
    apply_decisions,
    build_tfidf,
    project_2d,
    propose_review_clusters,
    prune_by_similarity,
)

from conftest import make_doc


class TestBuildTfidf:
    def test_hand_arithmetic(self):
        corpus = Corpus(
            documents=[
                make_doc(doi="10.1/d1", title="", abstract="x x y"),
                make_doc(doi="10.1/d2", title="", abstract="y z"),
            ]
        )
        X = build_tfidf(corpus)
        assert X.vocabulary == ["x", "y", "z"]
        ix = X.vocabulary.index("x")
        assert X.values[ix, 0] == pytest.approx(2 * (math.log(3 / 2) + 1), abs=1e-9)
        assert X.values[ix, 1] == 0.0

    def test_single_doc(self):
        X = build_tfidf(Corpus(documents=[make_doc(doi="10.1/a", title="", abstract="a b")]))
        assert np.allclose(X.values, [[1.0], [1.0]])

    def test_entries_nonneg_zero_iff_absent(self):
        corpus = Corpus(
            documents=[
                make_doc(doi="10.1/a", title="", abstract="alpha beta"),
                make_doc(doi="10.1/b", title="", abstract="beta gamma gamma"),
            ]
        )
        X = build_tfidf(corpus)
        assert X.values.min() >= 0
        counts = {(t, j) for j, doc in enumerate(corpus.documents) for t in doc.abstract.split()}
        for i, term in enumerate(X.vocabulary):
            for j in range(len(corpus)):
                assert (X.values[i, j] > 0) == ((term, j) in counts)

    def test_empty_vocabulary_raises(self):
        with pytest.raises(EmptyVocabulary):
            build_tfidf(Corpus(documents=[make_doc(doi="10.1/a", title="", abstract="")]))


class TestProject2d:
    def test_single_doc_is_origin(self):
        X = build_tfidf(Corpus(documents=[make_doc(doi="10.1/a", title="", abstract="a b")]))
        assert project_2d(X) == [("10.1/a", 0.0, 0.0)]

    def test_exact_rank2_preserves_distances(self):
        # Columns lie in a 2-D subspace by construction.
        rng = np.random.default_rng(3)
        basis = rng.uniform(0, 1, size=(6, 2))
        coeffs = rng.uniform(0, 1, size=(2, 8))
        values = basis @ coeffs
        X = type("T", (), {})()
        X.values = values
        X.doc_keys = [f"10.1/{j}" for j in range(8)]
        pts = project_2d(X)
        coords = np.array([[x, y] for _, x, y in pts])
        for a in range(8):
            for b in range(8):
                orig = np.linalg.norm(values[:, a] - values[:, b])
                proj = np.linalg.norm(coords[a] - coords[b])
                assert proj == pytest.approx(orig, rel=1e-9, abs=1e-9)

    def test_planted_clusters_separate(self):
        docs = []
        for t, word in enumerate(["alpha", "beta", "gamma"]):
            for d in range(8):
                docs.append(make_doc(doi=f"10.1/{t}.{d}", title="", abstract=" ".join([word] * 5)))
        X = build_tfidf(Corpus(documents=docs))
        pts = project_2d(X)
        coords = np.array([[x, y] for _, x, y in pts])
        labels = np.repeat(np.arange(3), 8)
        # silhouette oracle on the projection
        score = _silhouette_oracle(coords, labels)
        assert score > 0.5

    def test_deterministic(self):
        docs = [make_doc(doi=f"10.1/{i}", title="", abstract=f"w{i} w{(i+1)%5} shared") for i in range(5)]
        X = build_tfidf(Corpus(documents=docs))
        assert project_2d(X) == project_2d(X)


def _silhouette_oracle(points, labels):
    n = len(points)
    scores = []
    for i in range(n):
        same = [j for j in range(n) if labels[j] == labels[i] and j != i]
        if not same:
            scores.append(0.0)
            continue
        a = np.mean([np.linalg.norm(points[i] - points[j]) for j in same])
        b = min(
            np.mean([np.linalg.norm(points[i] - points[j]) for j in range(n) if labels[j] == other])
            for other in set(labels)
            if other != labels[i]
        )
        scores.append(0.0 if max(a, b) == 0 else (b - a) / max(a, b))
    return float(np.mean(scores))


class TestProposeReviewClusters:
    def test_single_cluster(self):
        points = [("10.1/a", 0.0, 0.0), ("10.1/b", 1.0, 0.0), ("10.1/c", 5.0, 0.0)]
        clusters = propose_review_clusters(points, 1, seed=0)
        assert len(clusters) == 1
        assert set(clusters[0].member_dois) == {"10.1/a", "10.1/b", "10.1/c"}
        assert clusters[0].centroid_doi == "10.1/b"  # nearest the global mean (2, 0)

    def test_two_well_separated_groups(self):
        points = [
            ("10.1/a", 0.0, 0.0),
            ("10.1/b", 0.0, 1.0),
            ("10.1/c", 10.0, 0.0),
            ("10.1/d", 10.0, 1.0),
        ]
        clusters = propose_review_clusters(points, 2, seed=0)
        groups = {frozenset(c.member_dois) for c in clusters}
        assert groups == {frozenset({"10.1/a", "10.1/b"}), frozenset({"10.1/c", "10.1/d"})}

    def test_c_equals_n_singletons(self):
        points = [(f"10.1/{i}", float(i), 0.0) for i in range(4)]
        clusters = propose_review_clusters(points, 4, seed=0)
        assert sorted(len(c.member_dois) for c in clusters) == [1, 1, 1, 1]
        for c in clusters:
            assert c.centroid_doi == c.member_dois[0]

    def test_partition_property(self):
        rng = np.random.default_rng(5)
        points = [(f"10.1/{i}", float(x), float(y)) for i, (x, y) in enumerate(rng.normal(size=(20, 2)))]
        clusters = propose_review_clusters(points, 5, seed=1)
        all_members = [doi for c in clusters for doi in c.member_dois]
        assert sorted(all_members) == sorted(p[0] for p in points)
        for c in clusters:
            assert c.centroid_doi in c.member_dois

    def test_bit_reproducible(self):
        rng = np.random.default_rng(9)
        points = [(f"10.1/{i}", float(x), float(y)) for i, (x, y) in enumerate(rng.normal(size=(30, 2)))]
        assert propose_review_clusters(points, 4, seed=7) == propose_review_clusters(points, 4, seed=7)


class TestPruneBySimilarity:
    def _embeddings(self):
        s = 1 / math.sqrt(2)
        return {
            "10.1/a": np.array([1.0, 0.0]),
            "10.1/b": np.array([s, s]),
            "10.1/c": np.array([0.0, 1.0]),
        }

    def test_hand_cosines(self):
        kept, removed = prune_by_similarity(self._embeddings(), {"10.1/a"}, 0.5)
        assert kept == {"10.1/a", "10.1/b"}
        assert removed == {"10.1/c"}

    def test_tau_minus_one_removes_nothing(self):
        kept, removed = prune_by_similarity(self._embeddings(), {"10.1/a"}, -1.0)
        assert removed == set()

    def test_tau_above_one_keeps_anchors_only(self):
        kept, removed = prune_by_similarity(self._embeddings(), {"10.1/a"}, 1.01)
        assert kept == {"10.1/a"}

    def test_monotone_in_tau(self):
        rng = np.random.default_rng(2)
        emb = {f"10.1/{i}": rng.normal(size=8) for i in range(30)}
        anchors = {"10.1/0", "10.1/1"}
        previous = None
        for tau in (-1.0, -0.5, 0.0, 0.3, 0.6, 0.9, 1.01):
            kept, removed = prune_by_similarity(emb, anchors, tau)
            assert kept | removed == set(emb)
            assert not (kept & removed)
            if previous is not None:
                assert kept <= previous
            previous = kept
            assert anchors <= kept

    def test_zero_vector_raises(self):
        with pytest.raises(ZeroVector):
            prune_by_similarity({"10.1/a": np.zeros(3)}, {"10.1/a"}, 0.0)


class TestApplyDecisions:
    def _setup(self):
        docs = [make_doc(doi=f"10.1/{i}", is_core=(i == 0)) for i in range(6)]
        corpus = Corpus(documents=docs)
        clusters = [
            ReviewCluster(0, ("10.1/0", "10.1/1"), "10.1/0", (0.0, 0.0)),
            ReviewCluster(1, ("10.1/2", "10.1/3", "10.1/4", "10.1/5"), "10.1/2", (1.0, 1.0)),
        ]
        return corpus, clusters

    def test_all_keep_changes_nothing_but_provenance(self):
        corpus, clusters = self._setup()
        decisions = [PruneDecision(0, "keep"), PruneDecision(1, "keep")]
        pruned, anchors = apply_decisions(corpus, decisions, clusters)
        assert pruned.dois() == corpus.dois()
        assert pruned.provenance[-1].stage == "review_prune"

    def test_remove_cluster_drops_members(self):
        corpus, clusters = self._setup()
        decisions = [PruneDecision(0, "keep"), PruneDecision(1, "remove")]
        pruned, _ = apply_decisions(corpus, decisions, clusters)
        assert len(pruned) == len(corpus) - 4

    def test_core_never_dropped(self):
        corpus, clusters = self._setup()
        decisions = [PruneDecision(0, "remove"), PruneDecision(1, "keep")]
        pruned, _ = apply_decisions(corpus, decisions, clusters)
        assert "10.1/0" in pruned.dois()  # core survives its remove verdict
        assert "10.1/1" not in pruned.dois()

    def test_anchors_collected(self):
        corpus, clusters = self._setup()
        decisions = [
            PruneDecision(0, "keep", anchor_dois_added=("10.1/1",)),
            PruneDecision(1, "keep"),
        ]
        _, anchors = apply_decisions(corpus, decisions, clusters)
        assert anchors == {"10.1/1"}

    def test_incomplete_decisions_raise(self):
        corpus, clusters = self._setup()
        with pytest.raises(IncompleteDecisions):
            apply_decisions(corpus, [PruneDecision(0, "keep")], clusters)

    def test_duplicate_decisions_raise(self):
        corpus, clusters = self._setup()
        with pytest.raises(IncompleteDecisions):
            apply_decisions(
                corpus,
                [PruneDecision(0, "keep"), PruneDecision(0, "remove"), PruneDecision(1, "keep")],
                clusters,
            )


class TestDecisionsFile:
    def test_round_trip(self, tmp_path):
        from slic.pruning import load_decisions, save_decisions

        decisions = [
            PruneDecision(0, "keep", decided_by="sme", anchor_dois_added=("10.1/a",)),
            PruneDecision(1, "remove", decided_by="auto"),
        ]
        path = tmp_path / "decisions.jsonl"
        save_decisions(decisions, path)
        assert load_decisions(path) == decisions

    def test_bad_verdict_rejected(self):
        with pytest.raises(ValueError):
            PruneDecision(0, "maybe")
