#!/usr/bin/env python3
"""Record API responses into frontend/tests/fixtures/.

Drives the real FastAPI app in-process in two scenarios: a paused review
session (clusters + decision submission) and a fully built system (chat,
topics, document detail). The console's snapshot tests replay these.

Run from the repository root: python3 scripts/record_api_fixtures.py
"""
from __future__ import annotations

import dataclasses
import json
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from fastapi.testclient import TestClient  # noqa: E402

from slic.corpus import Corpus  # noqa: E402
from slic.pipeline import AwaitingDecisions, load_config, run_pipeline, stage_ingest, stage_prune  # noqa: E402
from slic.server import ServiceState, create_app  # noqa: E402

OUT = ROOT / "frontend" / "tests" / "fixtures"

DEMO_DOI = "10.5000/core.00"


def write(name: str, payload) -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / name, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, ensure_ascii=False, sort_keys=True)
        fh.write("\n")


def record_review_scenario(base) -> None:
    tmp = Path(tempfile.mkdtemp(prefix="slic-record-review-"))
    try:
        # tau=-1 disables the similarity prune so the review effect is isolated
        config = dataclasses.replace(base, output_dir=tmp / "out", prune_tau=-1.0)
        stage_ingest(config)
        try:
            stage_prune(config, auto_keep=False)
        except AwaitingDecisions:
            pass
        client = TestClient(create_app(ServiceState(config)))

        review = client.get("/review/clusters").json()
        write("review_clusters.json", review)
        centroid_details = {}
        for cluster in review["clusters"]:
            doi = cluster["centroid_doi"]
            centroid_details[doi] = client.get(f"/documents/{doi}").json()
        write("review_centroid_details.json", centroid_details)

        assembled = Corpus.load_jsonl(config.output_dir / "corpus.assembled.jsonl")
        cores = {d.doi for d in assembled.documents if d.is_core}
        pure = [
            c for c in review["clusters"] if not (set(c["member_dois"]) & cores)
        ]
        if not pure:
            raise SystemExit("no core-free cluster; adjust cluster_count in the bundle config")
        target = max(pure, key=lambda c: len(c["member_dois"]))
        decisions = [
            {
                "cluster_id": c["cluster_id"],
                "verdict": "remove" if c["cluster_id"] == target["cluster_id"] else "keep",
                "decided_by": "sme",
                "anchor_dois_added": (
                    [c["centroid_doi"]] if c["cluster_id"] == review["clusters"][0]["cluster_id"] else []
                ),
            }
            for c in review["clusters"]
        ]
        write("review_decisions_request.json", decisions)
        response = client.post("/review/decisions", json=decisions)
        response.raise_for_status()
        write("review_decisions_response.json", response.json())
    finally:
        shutil.rmtree(tmp, ignore_errors=True)


def record_chat_scenario(base) -> None:
    tmp = Path(tempfile.mkdtemp(prefix="slic-record-chat-"))
    try:
        config = dataclasses.replace(base, output_dir=tmp / "out")
        run_pipeline(config, auto_keep=True)
        client = TestClient(create_app(ServiceState(config)))

        write("health.json", client.get("/health").json())
        write(
            "chat_title.json",
            client.post("/chat", json={"question": f"What is the title of {DEMO_DOI}?"}).json(),
        )
        write(
            "chat_abstention.json",
            client.post("/chat", json={"question": "What is the title of 10.9/unknown?"}).json(),
        )
        write("topics.json", client.get("/topics").json())
        write("document_detail.json", client.get(f"/documents/{DEMO_DOI}").json())
        write("graph_schema.json", client.get("/graph/schema").json())
    finally:
        shutil.rmtree(tmp, ignore_errors=True)


def main() -> None:
    base = load_config(ROOT / "fixtures" / "config.json")
    record_review_scenario(base)
    record_chat_scenario(base)
    print(f"fixtures recorded under {OUT}")


if __name__ == "__main__":
    main()
