"""HTTP API over the built artifacts, consumed by the SME console.

Endpoints are stateless over immutable stores except the review session,
whose decisions are applied to the on-disk corpus so the next pipeline
stage picks them up.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException

from .corpus import Corpus
from .errors import IncompleteDecisions, ParseError, SlicError
from .graph.cypher import parse_cypherlite
from .graph.engine import profile, render_plan
from .graph.store import build_graph
from .pipeline import PipelineConfig, load_topics, stage_prune
from .pruning import PruneDecision, ReviewCluster, save_decisions
from .rag.llm import MockLlmClient, load_mock_script
from .rag.orchestrator import Gazetteers, RagSystem, TemplateStore, answer_question
from .vectors import VectorStore, index_documents


class ServiceState:
    """Artifacts loaded once; review decisions mutate the on-disk corpus."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        out = config.output_dir
        # During a review pause only the assembled corpus exists yet.
        corpus_path = out / "corpus.jsonl"
        if not corpus_path.exists():
            corpus_path = out / "corpus.assembled.jsonl"
        self.corpus = Corpus.load_jsonl(corpus_path)
        self.topics = load_topics(out / "topics.json") if (out / "topics.json").exists() else []
        # The triplet dump carries no node properties, so the graph is
        # rebuilt from the corpus; the dump is for export and interchange.
        self.graph = build_graph(self.corpus, self.topics)
        vectors = out / "vectors.jsonl"
        self.embedder = config.embedder()
        self.vstore = (
            VectorStore.load(vectors) if vectors.exists() else index_documents(self.corpus, self.embedder)
        )
        if config.mock_script:
            self.llm = load_mock_script(config.mock_script)
        else:
            self.llm = MockLlmClient()
        if config.templates:
            self.templates = TemplateStore.load(config.templates, self.embedder)
        else:
            self.templates = TemplateStore([], self.embedder)
        self.system = RagSystem(
            corpus=self.corpus,
            graph=self.graph,
            vstore=self.vstore,
            templates=self.templates,
            llm=self.llm,
            embedder=self.embedder,
            gazetteers=Gazetteers(
                topics=tuple(t.label for t in self.topics),
                persons=tuple(
                    a.name for doc in self.corpus.documents for a in doc.authors
                ),
                keywords=tuple(
                    k for doc in self.corpus.documents for k in (*doc.sme_keywords, *doc.categories)
                ),
            ),
        )

    def review_state(self) -> Optional[dict]:
        path = self.config.output_dir / "review_state.json"
        if not path.exists():
            return None
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="slic", version="0.1.0")

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/review/clusters")
    def review_clusters():
        review = state.review_state()
        if review is None:
            raise HTTPException(status_code=404, detail="no review session; run the prune stage")
        return review

    @app.post("/review/decisions")
    def review_decisions(decisions: list[dict]):
        review = state.review_state()
        if review is None:
            raise HTTPException(status_code=404, detail="no review session; run the prune stage")
        try:
            parsed = [PruneDecision.from_dict(d) for d in decisions]
        except (KeyError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=f"bad decision record: {exc}")
        clusters = [
            ReviewCluster(
                cluster_id=c["cluster_id"],
                member_dois=tuple(c["member_dois"]),
                centroid_doi=c["centroid_doi"],
                centroid_xy=tuple(c["centroid_xy"]),
            )
            for c in review["clusters"]
        ]
        cluster_ids = {c.cluster_id for c in clusters}
        if {d.cluster_id for d in parsed} - cluster_ids:
            raise HTTPException(status_code=422, detail="decision for unknown cluster")
        save_decisions(parsed, state.config.output_dir / "decisions.jsonl")
        try:
            pruned = stage_prune(state.config)
        except IncompleteDecisions as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        before = len(Corpus.load_jsonl(state.config.output_dir / "corpus.assembled.jsonl"))
        return {
            "status": "applied",
            "corpus_count_before": before,
            "corpus_count": len(pruned),
            "removed": before - len(pruned),
        }

    @app.post("/chat")
    def chat(body: dict):
        question = str(body.get("question", ""))
        if not question.strip():
            raise HTTPException(status_code=422, detail="question must be non-empty")
        answer = answer_question(question, state.system)
        return answer.to_dict()

    @app.post("/query")
    def query(body: dict):
        cypher = str(body.get("cypher", ""))
        try:
            ast = parse_cypherlite(cypher)
            plan, rows = profile(state.graph, ast)
        except ParseError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except SlicError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"rows": rows, "row_count": len(rows), "plan": render_plan(plan)}

    @app.get("/graph/schema")
    def graph_schema():
        return {
            "text": state.graph.schema_text(),
            "labels": state.graph.label_counts,
            "relations": state.graph.relation_counts,
            "nodes": state.graph.node_count,
            "edges": state.graph.edge_count,
        }

    @app.get("/topics")
    def topics():
        return {"topics": [t.to_dict() for t in state.topics]}

    @app.get("/documents/{doi:path}")
    def document_detail(doi: str):
        doc = state.corpus.get(doi)
        if doc is None:
            raise HTTPException(status_code=404, detail=f"unknown document {doi!r}")
        return json.loads(doc.to_json())

    console_dir = state.config.console_dir
    if console_dir and Path(console_dir).exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/console", StaticFiles(directory=console_dir, html=True), name="console")

    return app


def serve(config: PipelineConfig):
    """Run the API with uvicorn until interrupted."""
    import uvicorn

    state = ServiceState(config)
    app = create_app(state)
    uvicorn.run(app, host=config.serve_host, port=config.serve_port, log_level="info")
