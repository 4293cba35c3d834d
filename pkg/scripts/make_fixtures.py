#!/usr/bin/env python3
"""Generate the bundled fixture set under fixtures/.

The citation/search trace is constructed so the assembled corpus is
hand-checkable: 40 core documents, 12 + 6 fetched over two citation hops,
and 6 more from bigram search = 64. Texts are drawn from disjoint topic
vocabularies so model selection has real structure to find.

Run from the repository root: python3 scripts/make_fixtures.py
"""
from __future__ import annotations

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

sys.path.insert(0, str(ROOT / "src"))

from slic.sources import fixture_key  # noqa: E402

VOCABS = {
    0: ["tensor", "decomposition", "factorization", "latent", "rank", "sparse",
        "canonical", "polyadic", "nonnegative", "matrix"],
    1: ["anomaly", "detection", "outlier", "network", "intrusion", "traffic",
        "behavioral", "baseline", "authentication", "event"],
    2: ["malware", "malicious", "binary", "ransomware", "botnet", "signature",
        "obfuscation", "payload", "dropper", "sandbox"],
    3: ["education", "curriculum", "classroom", "teaching", "assessment",
        "pedagogy", "literacy", "tutoring", "coursework", "gamification"],
}

AUTHORS = [
    ("Alice Zhang", "Los Alamos National Laboratory", "USA"),
    ("Boris Ivanov", "Technical University of Munich", "Germany"),
    ("Carla Mendez", "University of Granada", "Spain"),
    ("Deniz Arslan", "Bogazici University", "Turkey"),
    ("Erik Larsen", "Aalborg University", "Denmark"),
    ("Fatima Noor", "University of Granada", "Spain"),
    ("Guo Wei", "Tsinghua University", "China"),
    ("Hana Sato", "Kyoto University", "Japan"),
]

PUBLISHERS = ["IEEE", "Elsevier", "Springer", "ACM"]
CATEGORIES = ["Computer Science", "Security", "Applied Mathematics", "Data Mining"]


def title_for(rng: random.Random, topic: int, lead: str | None = None) -> str:
    words = rng.sample(VOCABS[topic], 3)
    text = " ".join(words)
    if lead:
        text = f"{lead} {text}"
    return text.title()


def abstract_for(rng: random.Random, topic: int, phrase: str | None = None) -> str:
    words = [rng.choice(VOCABS[topic]) for _ in range(16)]
    if phrase:
        words[2:2] = phrase.split()
        words[10:10] = phrase.split()
    return " ".join(words)


def full_text_for(rng: random.Random, topic: int) -> str:
    paragraphs = []
    for _ in range(rng.randint(2, 3)):
        words = [rng.choice(VOCABS[topic]) for _ in range(45)]
        paragraphs.append(" ".join(words) + ".")
    return "\n\n".join(paragraphs)


def record(rng, source, doi, topic, idx, phrase=None, lead=None, references=(),
           with_fulltext=False, sme_keywords_unused=None):
    author_pool = rng.sample(range(len(AUTHORS)), rng.randint(1, 3))
    authors = [
        {"name": AUTHORS[i][0], "affiliation": AUTHORS[i][1], "country": AUTHORS[i][2]}
        for i in author_pool
    ]
    return {
        "source": source,
        "source_id": f"{source.upper()}-{doi.split('/')[-1]}",
        "doi": doi,
        "title": title_for(rng, topic, lead),
        "abstract": abstract_for(rng, topic, phrase),
        "authors": authors,
        "year": 2016 + idx % 8,
        "publisher": PUBLISHERS[idx % len(PUBLISHERS)],
        "categories": [CATEGORIES[idx % len(CATEGORIES)]],
        "acronyms": ["NMF"] if idx % 7 == 0 else [],
        "citations": [],
        "references": list(references),
        "full_text": full_text_for(rng, topic) if with_fulltext else None,
    }


def write(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, ensure_ascii=False, sort_keys=True)
        fh.write("\n")


def main() -> None:
    rng = random.Random(20240901)
    for sub in ("scopus", "s2", "osti"):
        for kind in ("lookup", "cited_by", "references", "search"):
            (FIXTURES / sub / kind).mkdir(parents=True, exist_ok=True)

    core_dois = [f"10.5000/core.{i:02d}" for i in range(40)]
    exp_dois = [f"10.5000/exp.{i:02d}" for i in range(18)]
    srch_dois = [f"10.5000/srch.{i:02d}" for i in range(6)]

    def core_topic(i: int) -> int:
        if i < 14:
            return 0
        if i < 27:
            return 1
        return 2

    core_records = {}
    for i, doi in enumerate(core_dois):
        topic = core_topic(i)
        phrase = {0: "tensor decomposition", 1: "anomaly detection", 2: None}[topic]
        lead = {0: "tensor decomposition", 1: "anomaly detection", 2: "malware analysis"}[topic]
        rec = record(
            rng, "scopus", doi, topic, i, phrase=phrase, lead=lead,
            with_fulltext=(i % 5 == 0),
        )
        if i == 7:
            # One gazetteer hit so the demo graph carries a MENTIONS edge.
            rec["abstract"] += " MADHAT"
        core_records[doi] = rec
        write(FIXTURES / "scopus" / "lookup" / f"{fixture_key(doi)}.json", rec)

    # Six cores also exist in s2 with a complementary abstract, two in osti.
    for i in range(6):
        doi = core_dois[i]
        topic = core_topic(i)
        clone = dict(core_records[doi])
        clone.update(
            source="s2",
            source_id=f"S2-{doi.split('/')[-1]}",
            title=None,
            publisher=None,
            abstract=abstract_for(rng, topic, "tensor decomposition" if topic == 0 else None),
        )
        write(FIXTURES / "s2" / "lookup" / f"{fixture_key(doi)}.json", clone)
    for i in range(6, 8):
        doi = core_dois[i]
        clone = dict(core_records[doi])
        clone.update(source="osti", source_id=f"OSTI-{doi.split('/')[-1]}", abstract=None)
        write(FIXTURES / "osti" / "lookup" / f"{fixture_key(doi)}.json", clone)

    # Hop 1: cores 0..11 are each cited by one new document.
    exp_records = {}
    for i in range(12):
        doi = exp_dois[i]
        refs = [core_dois[i]]
        if i < 6:
            refs.append(exp_dois[12 + i])
        rec = record(
            rng, "scopus", doi, topic=[0, 1, 2, 3][i % 4], idx=40 + i,
            references=refs, with_fulltext=(i % 3 == 0),
        )
        exp_records[doi] = rec
        write(FIXTURES / "scopus" / "cited_by" / f"{fixture_key(core_dois[i])}.json", [rec])

    # Cycle exercise: the first expansion doc is "cited by" its own core.
    write(
        FIXTURES / "scopus" / "cited_by" / f"{fixture_key(exp_dois[0])}.json",
        [core_records[core_dois[0]]],
    )

    # Hop 2: the first six hop-1 docs each reference one further new document.
    for i in range(6):
        doi = exp_dois[12 + i]
        rec = record(
            rng, "scopus", doi, topic=3 if i % 2 == 0 else i % 3, idx=52 + i,
            with_fulltext=(i % 2 == 0),
        )
        exp_records[doi] = rec
        write(FIXTURES / "scopus" / "references" / f"{fixture_key(exp_dois[i])}.json", [rec])

    # Bigram search: two quoted queries; one result in each is a duplicate.
    tensor_hits = []
    for i in range(3):
        rec = record(rng, "scopus", srch_dois[i], topic=0, idx=58 + i,
                     with_fulltext=(i == 0))
        tensor_hits.append(rec)
    tensor_hits.append(core_records[core_dois[0]])
    write(
        FIXTURES / "scopus" / "search" / f'{fixture_key(chr(34) + "tensor decomposition" + chr(34))}.json',
        tensor_hits,
    )
    anomaly_hits = []
    for i in range(3, 6):
        rec = record(rng, "scopus", srch_dois[i], topic=3 if i == 5 else 1, idx=58 + i)
        anomaly_hits.append(rec)
    anomaly_hits.append(tensor_hits[0])
    write(
        FIXTURES / "scopus" / "search" / f'{fixture_key(chr(34) + "anomaly detection" + chr(34))}.json',
        anomaly_hits,
    )

    with open(FIXTURES / "core_dois.txt", "w", encoding="utf-8") as fh:
        fh.write("\n".join(core_dois) + "\n")

    with open(FIXTURES / "sme_rules.tsv", "w", encoding="utf-8") as fh:
        fh.write("# SME standardization rules: pattern<TAB>replacement\n")
        fh.write("NMF\tnonnegative matrix factorization\n")
        fh.write("NTF\tnonnegative tensor factorization\n")

    write(
        FIXTURES / "sme_keywords.json",
        {"cybercrime": [core_dois[0], core_dois[1]], "tensor networks": [core_dois[2]]},
    )

    gazetteer = {name: "person" for name, _, _ in AUTHORS}
    gazetteer.update({aff: "organization" for _, aff, _ in AUTHORS})
    gazetteer.update({country: "geopolitical_entity" for _, _, country in AUTHORS})
    gazetteer.update({"New Mexico": "location", "MADHAT": "product"})
    write(FIXTURES / "gazetteer.json", gazetteer)

    templates = [
        {
            "cypher": "MATCH (d:Document)-[r:CITES]-(x:Document) WHERE d.doi = '$DOI' RETURN count(*)",
            "description": "How many citations are there for a document with a given DOI?",
        },
        {
            "cypher": "MATCH (d:Document)-[r:REFERENCES]-(x:Document) WHERE d.doi = '$DOI' RETURN count(*)",
            "description": "How many references are there for a document with a given DOI?",
        },
        {
            "cypher": "MATCH (d:Document)-[r:AUTHORED_BY]-(a:Author) WHERE d.doi = '$DOI' RETURN count(*)",
            "description": "How many authors are there for a document with a given DOI?",
        },
        {
            "cypher": "MATCH (d:Document)-[r:PUBLISHED_IN_YEAR]-(y:Year) WHERE d.doi = '$DOI' RETURN y",
            "description": "What year was a document with a given DOI published?",
        },
        {
            "cypher": "MATCH (d:Document)-[r:PUBLISHED_BY]-(p:Publisher) WHERE d.doi = '$DOI' RETURN p",
            "description": "Which publisher published the document with a given DOI?",
        },
        {
            "cypher": "MATCH (d:Document)-[r:HAS_CATEGORY]-(k:Keyword) WHERE d.doi = '$DOI' RETURN count(*)",
            "description": "How many scopus categories are assigned to a document with a given DOI?",
        },
        {
            "cypher": "MATCH (t:Topic)-[r:HAS_TOPIC]-(d:Document) WHERE t.label = '$TOPIC' RETURN count(*)",
            "description": "How many papers are there on the topic of a given topic label?",
        },
        {
            "cypher": "MATCH (y:Year)-[r1:PUBLISHED_IN_YEAR]-(d:Document)-[r2:HAS_TOPIC]-(t:Topic) WHERE t.label = '$TOPIC' AND y.year = '$YEAR' RETURN count(*)",
            "description": "How many papers were written related to a given topic in a given year?",
        },
        {
            "cypher": "MATCH (k:Keyword)-[r1]-(d:Document)-[r2]-(aff:Affiliation)-[r3]-(c:Country) WHERE k.term CONTAINS '$KEYWORD' RETURN k,r1,d,r2,aff,r3,c",
            "description": "Which countries have published papers that mention a keyword?",
        },
    ]
    with open(FIXTURES / "templates.jsonl", "w", encoding="utf-8") as fh:
        for t in templates:
            fh.write(json.dumps(t, ensure_ascii=False) + "\n")

    from slic.cleaning import CleaningConfig, clean_text

    demo_doi = core_dois[0]
    # the corpus stores cleaned text, so the scripted answer must match it
    demo_title = clean_text(core_records[demo_doi]["title"], CleaningConfig())
    demo_doi_re = demo_doi.replace(".", r"\.")
    demo_question_re = rf"What is the title of {demo_doi_re}\?"
    mock_entries = [
        {
            "match": r"(?s)### TASK: route.*What is the title of",
            "is_regex": True,
            "response": "SpecificDocument",
        },
        {"match": "### TASK: route", "response": "General"},
        {
            "match": rf"(?s)### TASK: react.*{demo_question_re}.*Observation: doi={demo_doi_re}",
            "is_regex": True,
            "response": f"Thought: the record shows the title\nFinal Answer: {demo_title} [{demo_doi}]",
        },
        {
            "match": rf"(?s)### TASK: react.*{demo_question_re}",
            "is_regex": True,
            "response": (
                "Thought: fetch the document record\n"
                "Action: vector_search\n"
                f'Action Input: {{"query": "title", "doi": "{demo_doi}"}}'
            ),
        },
        {"match": "### TASK: genericize", "response": "use-rule-fallback"},
        {"match": "### TASK: audit-translate", "response": "The plan scans and expands the graph."},
        {"match": "### TASK: audit-verdict", "response": "YES it matches the question."},
    ]
    with open(FIXTURES / "mock_script.jsonl", "w", encoding="utf-8") as fh:
        for entry in mock_entries:
            fh.write(json.dumps(entry, ensure_ascii=False) + "\n")

    config = {
        "fixtures_dir": ".",
        "output_dir": "../out",
        "core_dois_file": "core_dois.txt",
        "sources": ["scopus", "s2", "osti"],
        "sme_rules": "sme_rules.tsv",
        "sme_keywords": "sme_keywords.json",
        "gazetteer": "gazetteer.json",
        "templates": "templates.jsonl",
        "mock_script": "mock_script.jsonl",
        "expansion": {"hops": 2, "per_hop_limit": 50, "bigram_query_count": 2, "bigram_result_limit": 20},
        "cleaning": {"min_word_len": 3},
        "pruning": {"tau": 0.35, "cluster_count": 4},
        "factorization": {"k_max": 8, "threshold": 0.25, "seed": 0, "max_iters": 300, "tol": 1e-05},
        "embedding": {"dim": 256},
        "serve": {"host": "127.0.0.1", "port": 8420, "console_dir": "../frontend"},
    }
    write(FIXTURES / "config.json", config)

    print(f"fixtures written under {FIXTURES}")


if __name__ == "__main__":
    main()
