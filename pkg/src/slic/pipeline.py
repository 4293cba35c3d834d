"""Pipeline driver: assemble -> review/prune -> factorize -> graph -> index.

Every stage reads and writes files under the configured output directory,
so stages can run one at a time from the CLI or all at once via
run_pipeline. The manifest lists each artifact with a content hash;
identical inputs and seeds produce byte-identical manifests.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .cleaning import CleaningConfig, load_sme_rules
from .corpus import Corpus, merge_source_records
from .errors import ConfigError, OutputExists, SlicError
from .factorization import (
    assign_clusters,
    binary_bleed_search,
    derive_topics,
    nmf_factorize,
    save_factors,
)
from .graph.ner import GazetteerRecognizer
from .graph.store import build_graph
from .pruning import (
    PruneDecision,
    apply_decisions,
    build_tfidf,
    project_2d,
    propose_review_clusters,
    prune_by_similarity,
    save_decisions,
)
from .sources import CompositeSource, ExpansionConfig, FixtureSource, assemble_corpus
from .vectors import DeterministicEmbedder, index_documents

ARTIFACTS = (
    "corpus.jsonl",
    "selection.json",
    "W.csv",
    "H.csv",
    "topics.json",
    "triplets.jsonl",
    "vectors.jsonl",
)


@dataclass
class PipelineConfig:
    fixtures_dir: Path
    output_dir: Path
    core_dois: list[str]
    sources: list[str] = field(default_factory=lambda: ["scopus", "s2", "osti"])
    sme_rules: Optional[Path] = None
    sme_keywords: Optional[Path] = None
    gazetteer: Optional[Path] = None
    templates: Optional[Path] = None
    mock_script: Optional[Path] = None
    hops: int = 2
    per_hop_limit: int = 50
    bigram_query_count: int = 2
    bigram_result_limit: int = 20
    min_word_len: int = 3
    prune_tau: float = 0.35
    cluster_count: int = 4
    k_max: int = 8
    threshold: float = 0.25
    seed: int = 0
    max_iters: int = 500
    tol: float = 1e-6
    embed_dim: int = 256
    serve_host: str = "127.0.0.1"
    serve_port: int = 8420
    console_dir: Optional[Path] = None

    def expansion(self) -> ExpansionConfig:
        return ExpansionConfig(
            hops=self.hops,
            per_hop_limit=self.per_hop_limit,
            bigram_query_count=self.bigram_query_count,
            bigram_result_limit=self.bigram_result_limit,
        )

    def cleaning(self) -> CleaningConfig:
        rules = load_sme_rules(self.sme_rules) if self.sme_rules else ()
        return CleaningConfig(sme_substitutions=rules, min_word_len=self.min_word_len)

    def recognizer(self) -> Optional[GazetteerRecognizer]:
        if self.gazetteer:
            return GazetteerRecognizer.from_file(self.gazetteer)
        return None

    def embedder(self) -> DeterministicEmbedder:
        return DeterministicEmbedder(dim=self.embed_dim)


def load_config(path, seed: Optional[int] = None) -> PipelineConfig:
    """Read the JSON config; relative paths resolve against the config file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file does not exist: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    base = path.parent

    def resolve(p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else (base / p)

    def optional_path(key: str) -> Optional[Path]:
        if raw.get(key):
            resolved = resolve(raw[key])
            if not resolved.exists():
                raise ConfigError(f"{key} path does not exist: {resolved}")
            return resolved
        return None

    fixtures_dir = resolve(raw["fixtures_dir"])
    if not fixtures_dir.exists():
        raise ConfigError(f"fixtures_dir does not exist: {fixtures_dir}")

    core_dois = list(raw.get("core_dois", []))
    if raw.get("core_dois_file"):
        core_file = resolve(raw["core_dois_file"])
        if not core_file.exists():
            raise ConfigError(f"core_dois_file does not exist: {core_file}")
        with open(core_file, "r", encoding="utf-8") as fh:
            core_dois.extend(line.strip() for line in fh if line.strip())
    if not core_dois:
        raise ConfigError("no core DOIs configured")

    expansion = raw.get("expansion", {})
    cleaning = raw.get("cleaning", {})
    pruning = raw.get("pruning", {})
    factorization = raw.get("factorization", {})
    embedding = raw.get("embedding", {})
    serve = raw.get("serve", {})

    return PipelineConfig(
        fixtures_dir=fixtures_dir,
        output_dir=resolve(raw["output_dir"]),
        core_dois=core_dois,
        sources=list(raw.get("sources", ["scopus", "s2", "osti"])),
        sme_rules=optional_path("sme_rules"),
        sme_keywords=optional_path("sme_keywords"),
        gazetteer=optional_path("gazetteer"),
        templates=optional_path("templates"),
        mock_script=optional_path("mock_script"),
        hops=expansion.get("hops", 2),
        per_hop_limit=expansion.get("per_hop_limit", 50),
        bigram_query_count=expansion.get("bigram_query_count", 2),
        bigram_result_limit=expansion.get("bigram_result_limit", 20),
        min_word_len=cleaning.get("min_word_len", 3),
        prune_tau=pruning.get("tau", 0.35),
        cluster_count=pruning.get("cluster_count", 4),
        k_max=factorization.get("k_max", 8),
        threshold=factorization.get("threshold", 0.25),
        seed=seed if seed is not None else factorization.get("seed", 0),
        max_iters=factorization.get("max_iters", 500),
        tol=factorization.get("tol", 1e-6),
        embed_dim=embedding.get("dim", 256),
        serve_host=serve.get("host", "127.0.0.1"),
        serve_port=serve.get("port", 8420),
        console_dir=resolve(serve["console_dir"]) if serve.get("console_dir") else None,
    )


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(config: PipelineConfig) -> dict:
    """Hash whatever canonical artifacts exist; paths are output-relative."""
    out = config.output_dir
    entries = []
    factor_dir = next(iter(sorted(out.glob("factors_k*"))), None)
    for name in ARTIFACTS:
        if name in ("W.csv", "H.csv"):
            path = factor_dir / name if factor_dir else None
        else:
            path = out / name
        if path and path.exists():
            entries.append(
                {
                    "name": name,
                    "path": str(path.relative_to(out)),
                    "sha256": _sha256(path),
                }
            )
    manifest = {"artifacts": entries}
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


class StageError(SlicError):
    def __init__(self, stage: str, cause: Exception, partial_manifest: dict):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.partial_manifest = partial_manifest


class AwaitingDecisions(SlicError):
    """Raised when the review pause needs SME decisions before continuing."""

    def __init__(self, state_path: Path):
        super().__init__(
            f"awaiting review decisions; submit them via the review API or "
            f"write {state_path.parent / 'decisions.jsonl'} and rerun"
        )
        self.state_path = state_path


def _build_source(config: PipelineConfig) -> CompositeSource:
    return CompositeSource(
        [FixtureSource(config.fixtures_dir, name) for name in config.sources]
    )


def stage_ingest(config: PipelineConfig) -> Corpus:
    """Assemble, annotate entities, clean; writes corpus.assembled.jsonl."""
    source = _build_source(config)
    core = []
    for doi in config.core_dois:
        records = source.lookup_all(doi)
        if not records:
            raise ConfigError(f"core DOI {doi!r} not found in any source")
        core.append(merge_source_records(records))
    corpus = assemble_corpus(
        core,
        source,
        config.expansion(),
        config.cleaning(),
        recognizer=config.recognizer(),
    )
    if config.sme_keywords:
        with open(config.sme_keywords, "r", encoding="utf-8") as fh:
            by_keyword = json.load(fh)
        by_doi: dict[str, list[str]] = {}
        for keyword, dois in sorted(by_keyword.items()):
            for doi in dois:
                by_doi.setdefault(doi, []).append(keyword)
        corpus.documents = [
            replace(doc, sme_keywords=tuple(by_doi.get(doc.doi, ())))
            for doc in corpus.documents
        ]
    config.output_dir.mkdir(parents=True, exist_ok=True)
    corpus.save_jsonl(config.output_dir / "corpus.assembled.jsonl")
    return corpus


def _doc_embeddings(corpus: Corpus, embedder) -> dict[str, np.ndarray]:
    return {doc.doi: embedder.embed(doc.text()) for doc in corpus.documents}


def stage_prune(config: PipelineConfig, auto_keep: bool = False) -> Corpus:
    """Review clusters, apply decisions, prune by embedding similarity.

    Without auto_keep and without a decisions file, persists the review
    state and raises AwaitingDecisions so a UI can take over.
    """
    out = config.output_dir
    corpus = Corpus.load_jsonl(out / "corpus.assembled.jsonl")
    X = build_tfidf(corpus)
    points = project_2d(X)
    c = min(config.cluster_count, len(corpus))
    clusters = propose_review_clusters(points, c, seed=config.seed)

    state_path = out / "review_state.json"
    decisions_path = out / "decisions.jsonl"
    with open(state_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "status": "awaiting-decisions",
                "clusters": [cl.to_dict() for cl in clusters],
                "points": [[doi, x, y] for doi, x, y in points],
            },
            fh,
            indent=2,
            sort_keys=True,
        )

    if decisions_path.exists():
        decisions = [
            PruneDecision.from_dict(json.loads(line))
            for line in decisions_path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
    elif auto_keep:
        decisions = [PruneDecision(cl.cluster_id, "keep", decided_by="auto") for cl in clusters]
        save_decisions(decisions, decisions_path)
    else:
        raise AwaitingDecisions(state_path)

    pruned, anchors = apply_decisions(corpus, decisions, clusters)
    anchors = set(anchors) | {d.doi for d in pruned.documents if d.is_core}
    embeddings = _doc_embeddings(pruned, config.embedder())
    kept, _removed = prune_by_similarity(embeddings, anchors, config.prune_tau)
    before = len(pruned)
    docs = [d for d in pruned.documents if d.doi in kept]
    final = Corpus(documents=docs, provenance=list(pruned.provenance))
    final.record("similarity_prune", before, len(docs))
    final.save_jsonl(out / "corpus.pruned.jsonl")
    with open(state_path, "r+", encoding="utf-8") as fh:
        state = json.load(fh)
        state["status"] = "decided"
        fh.seek(0)
        json.dump(state, fh, indent=2, sort_keys=True)
        fh.truncate()
    return final


def stage_factorize(config: PipelineConfig) -> tuple[Corpus, list]:
    """Model selection, factorization at the chosen k, topic assignment."""
    out = config.output_dir
    pruned_path = out / "corpus.pruned.jsonl"
    corpus = Corpus.load_jsonl(pruned_path if pruned_path.exists() else out / "corpus.assembled.jsonl")
    X = build_tfidf(corpus)
    k_cap = min(config.k_max, min(X.shape))
    if k_cap >= 2:
        selection = binary_bleed_search(
            X,
            k_cap,
            threshold=config.threshold,
            seed=config.seed,
            max_iters=config.max_iters,
            tol=config.tol,
        )
    else:
        from .factorization import KSelection

        selection = KSelection(k_min=1, k_max=1, threshold=config.threshold)
    selection.save(out / "selection.json")
    k_use = selection.k_optimal
    if k_use is None:
        # No k cleared the threshold; fall back to the best-scoring one so
        # downstream stages still have a factorization to work with.
        k_use = (
            max(selection.scores, key=lambda k: (selection.scores[k], -k))
            if selection.scores
            else 1
        )
    pair = nmf_factorize(X, k_use, seed=config.seed, max_iters=config.max_iters, tol=config.tol)
    save_factors(pair, out)
    labels = assign_clusters(pair.H)
    topics = derive_topics(pair, X.vocabulary, labels)
    with open(out / "topics.json", "w", encoding="utf-8") as fh:
        json.dump([t.to_dict() for t in topics], fh, indent=2, sort_keys=True)
        fh.write("\n")

    by_doi = dict(zip(X.doc_keys, labels))
    docs = [replace(doc, topic_id=by_doi.get(doc.doi)) for doc in corpus.documents]
    final = Corpus(documents=docs, vocabulary=X.vocabulary, provenance=list(corpus.provenance))
    final.record("factorize", len(corpus), len(final))
    final.save_jsonl(out / "corpus.jsonl")
    return final, topics


def load_topics(path):
    from .factorization import TopicSummary

    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return [
        TopicSummary(
            topic_id=t["topic_id"],
            label=t["label"],
            doc_count=t["doc_count"],
            percent=t["percent"],
            top_terms=tuple((term, weight) for term, weight in t["top_terms"]),
        )
        for t in data
    ]


def stage_graph(config: PipelineConfig) -> None:
    out = config.output_dir
    corpus = Corpus.load_jsonl(out / "corpus.jsonl")
    topics = load_topics(out / "topics.json")
    store = build_graph(corpus, topics)
    store.dump_triplets(out / "triplets.jsonl")


def stage_index(config: PipelineConfig) -> None:
    out = config.output_dir
    corpus = Corpus.load_jsonl(out / "corpus.jsonl")
    store = index_documents(corpus, config.embedder())
    store.save(out / "vectors.jsonl")


_STAGES = ("ingest", "prune", "factorize", "graph", "index")


def run_pipeline(config: PipelineConfig, auto_keep: bool = False, force: bool = False) -> dict:
    """Run every stage and return the artifact manifest."""
    out = config.output_dir
    if (out / "manifest.json").exists() and not force:
        raise OutputExists(f"outputs already exist under {out}; use --force to overwrite")
    out.mkdir(parents=True, exist_ok=True)

    for stage in _STAGES:
        try:
            if stage == "ingest":
                stage_ingest(config)
            elif stage == "prune":
                stage_prune(config, auto_keep=auto_keep)
            elif stage == "factorize":
                stage_factorize(config)
            elif stage == "graph":
                stage_graph(config)
            elif stage == "index":
                stage_index(config)
        except (AwaitingDecisions, OutputExists):
            raise
        except Exception as exc:
            raise StageError(stage, exc, write_manifest(config)) from exc
    return write_manifest(config)
