import itertools
import json
import random

import pytest

from slic.corpus import Author, Corpus
from slic.errors import ParseError, UnknownLabel, UnknownProperty
from slic.graph.cypher import parse_cypherlite
from slic.graph.engine import execute, execute_detailed, profile, render_plan
from slic.graph.ner import GazetteerRecognizer
from slic.graph.store import (
    GraphStore,
    NodeKey,
    Triplet,
    build_graph,
    emit_triplets,
    merge_triplets,
    node,
)

from conftest import make_doc

PAPER_QUERY = (
    "MATCH  (k:Keyword)-[r1]-(d:Document)-[r2]"
    "-(aff:Affiliation)-[r3]-(c:Country )\n"
    "WHERE k.term CONTAINS 'cybercrime'\n"
    "RETURN k,r1,d,r2,aff,r3,c"
)


class TestEmitTriplets:
    def test_author_and_year_only(self):
        doc = make_doc(authors=(Author("Jane Doe"),), year=2020)
        triplets = list(emit_triplets(Corpus(documents=[doc])))
        assert len(triplets) == 2
        relations = {t.relation for t in triplets}
        assert relations == {"AUTHORED_BY", "PUBLISHED_IN_YEAR"}

    def test_shared_affiliation_counts(self):
        doc = make_doc(
            authors=(Author("A One", "Lab", "USA"), Author("B Two", "Lab", "USA")),
            affiliations=("Lab",),
            affiliation_countries=("USA",),
        )
        triplets = list(emit_triplets(Corpus(documents=[doc])))
        by_rel = {}
        for t in triplets:
            by_rel.setdefault(t.relation, []).append(t)
        assert len(by_rel["AUTHORED_BY"]) == 2
        assert len(by_rel["AFFILIATED_WITH"]) == 1
        assert len(by_rel["LOCATED_IN"]) == 1

    def test_empty_corpus(self):
        assert list(emit_triplets(Corpus())) == []

    def test_citing_work_is_head(self):
        doc = make_doc(doi="10.1/a", citations=("10.1/z",), references=("10.1/r",))
        triplets = list(emit_triplets(Corpus(documents=[doc])))
        cites = next(t for t in triplets if t.relation == "CITES")
        refs = next(t for t in triplets if t.relation == "REFERENCES")
        assert cites.head.key == "10.1/z" and cites.tail.key == "10.1/a"
        assert refs.head.key == "10.1/a" and refs.tail.key == "10.1/r"

    def test_year_zero_padded(self):
        doc = make_doc(year=987 + 1000)  # 1987
        triplets = list(emit_triplets(Corpus(documents=[doc])))
        year_node = next(t.tail for t in triplets if t.relation == "PUBLISHED_IN_YEAR")
        assert year_node.key == "1987"

    def test_topic_keywords(self):
        from slic.factorization import TopicSummary

        doc = make_doc(topic_id=0)
        topic = TopicSummary(0, "label", 1, 100.0, (("tensor", 1.0), ("rank", 0.5)))
        triplets = list(emit_triplets(Corpus(documents=[doc]), [topic]))
        has_kw = [t for t in triplets if t.relation == "HAS_KEYWORD"]
        assert len(has_kw) == 2
        assert {t.tail.label for t in has_kw} == {"TopicKeyword"}


class TestMergeSetSemantics:
    def test_duplicate_insert_is_noop(self):
        store = GraphStore()
        t = Triplet(node("Document", "10.1/a"), "CITES", node("Document", "10.1/b"))
        merge_triplets(store, [t])
        nodes, edges = store.node_count, store.edge_count
        merge_triplets(store, [t])
        assert (store.node_count, store.edge_count) == (nodes, edges)

    def test_author_shared_across_docs(self):
        store = GraphStore()
        t1 = Triplet(node("Document", "10.1/a"), "AUTHORED_BY", node("Author", "a. smith"))
        t2 = Triplet(node("Document", "10.1/b"), "AUTHORED_BY", node("Author", "A. Smith "))
        merge_triplets(store, [t1, t2])
        assert store.label_counts["Author"] == 1
        assert store.edge_count == 2

    def test_distinct_counts(self):
        store = GraphStore()
        triplets = [
            Triplet(node("Document", f"10.1/h{i}"), "CITES", node("Document", f"10.1/t{i}"))
            for i in range(10)
        ]
        merge_triplets(store, triplets)
        assert store.node_count == 20
        assert store.edge_count == 10

    def test_permutation_and_repetition_invariant(self):
        rng = random.Random(7)
        triplets = [
            Triplet(node("Document", f"10.1/d{i % 4}"), "CITES", node("Document", f"10.1/e{i % 3}"))
            for i in range(6)
        ] + [
            Triplet(node("Document", f"10.1/d{i}"), "AUTHORED_BY", node("Author", f"auth {i % 2}"))
            for i in range(4)
        ]
        reference = None
        for _ in range(10):
            stream = triplets * 2
            rng.shuffle(stream)
            store = merge_triplets(GraphStore(), stream)
            snapshot = (store.node_count, store.edge_count, sorted(store.edges))
            if reference is None:
                reference = snapshot
            assert snapshot == reference

    def test_wal_round_trip(self, tmp_path):
        wal = tmp_path / "graph.wal"
        store = GraphStore(wal_path=wal)
        merge_triplets(
            store,
            [
                Triplet(node("Document", "10.1/a"), "CITES", node("Document", "10.1/b")),
                Triplet(node("Document", "10.1/a"), "CITES", node("Document", "10.1/b")),
            ],
        )
        replayed = GraphStore.load_triplets(wal)
        assert replayed.edge_count == 1
        assert sorted(replayed.edges) == sorted(store.edges)


class TestParser:
    def test_paper_query_shape(self):
        ast = parse_cypherlite(PAPER_QUERY)
        assert len(ast.nodes) == 4
        assert len(ast.edges) == 3
        assert len(ast.predicates) == 1
        assert ast.predicates[0].op == "CONTAINS"
        assert ast.predicates[0].value == "cybercrime"
        assert len(ast.return_items) == 7
        assert not ast.profiled

    def test_empty_input(self):
        with pytest.raises(ParseError) as err:
            parse_cypherlite("")
        assert err.value.line == 1
        assert err.value.column == 1

    def test_aggregate_and_limit(self):
        ast = parse_cypherlite("MATCH (a:Author)-[r]-(d:Document) RETURN count(*) LIMIT 5")
        assert ast.return_items[0].kind == "count"
        assert ast.limit == 5

    def test_profile_prefix(self):
        ast = parse_cypherlite("PROFILE MATCH (d:Document) RETURN d")
        assert ast.profiled

    def test_unbound_return_var(self):
        with pytest.raises(ParseError):
            parse_cypherlite("MATCH (a:Author) RETURN b")

    def test_mixed_count_and_var(self):
        with pytest.raises(ParseError):
            parse_cypherlite("MATCH (a:Author) RETURN a, count(*)")

    def test_error_carries_position_and_expectations(self):
        with pytest.raises(ParseError) as err:
            parse_cypherlite("MATCH (a:Author RETURN a")
        assert err.value.expected
        assert err.value.line == 1

    def test_keywords_case_insensitive(self):
        ast = parse_cypherlite("match (d:Document) return d limit 2")
        assert ast.limit == 2

    def test_duplicate_variable_rejected(self):
        with pytest.raises(ParseError):
            parse_cypherlite("MATCH (a:Author)-[r]-(a:Document) RETURN a")


def _cybercrime_store():
    docs = [
        make_doc(
            doi="10.1/d1",
            sme_keywords=("cybercrime",),
            affiliations=("Uni One",),
            affiliation_countries=("Spain",),
        ),
        make_doc(
            doi="10.1/d2",
            sme_keywords=("cybercrime",),
            affiliations=("Uni Two",),
            affiliation_countries=("Spain",),
        ),
        make_doc(doi="10.1/d3", sme_keywords=("benign",)),
    ]
    return build_graph(Corpus(documents=docs))


class TestExecute:
    def test_empty_graph_returns_nothing(self):
        ast = parse_cypherlite("MATCH (d:Document) RETURN d")
        assert execute(GraphStore(), ast) == []

    def test_cybercrime_fixture(self):
        store = _cybercrime_store()
        rows = execute(store, parse_cypherlite(PAPER_QUERY))
        assert len(rows) == 2
        countries = {row[-1] for row in rows}
        assert countries == {"Country:spain"}

    def test_count_rows(self):
        store = _cybercrime_store()
        ast = parse_cypherlite(
            "MATCH (k:Keyword)-[r]-(d:Document) WHERE k.term = 'cybercrime' RETURN count(*)"
        )
        assert execute(store, ast) == [[2]]

    def test_unknown_label(self):
        with pytest.raises(UnknownLabel):
            execute(_cybercrime_store(), parse_cypherlite("MATCH (x:Banana) RETURN x"))

    def test_unknown_property(self):
        with pytest.raises(UnknownProperty):
            execute(
                _cybercrime_store(),
                parse_cypherlite("MATCH (d:Document) WHERE d.flavor = 'x' RETURN d"),
            )

    def test_rows_sorted_and_limit_applies_after_sort(self):
        store = _cybercrime_store()
        ast_all = parse_cypherlite("MATCH (d:Document) RETURN d")
        ast_lim = parse_cypherlite("MATCH (d:Document) RETURN d LIMIT 2")
        assert execute(store, ast_lim) == execute(store, ast_all)[:2]

    def test_undirected_matching(self):
        store = GraphStore()
        merge_triplets(
            store, [Triplet(node("Document", "10.1/a"), "CITES", node("Document", "10.1/b"))]
        )
        rows = execute(
            store,
            parse_cypherlite("MATCH (x:Document)-[r:CITES]-(y:Document) RETURN x, y"),
        )
        # one edge matched from both ends
        assert rows == [
            ["Document:10.1/a", "Document:10.1/b"],
            ["Document:10.1/b", "Document:10.1/a"],
        ]

    def test_distinct_bindings_within_chain(self):
        store = GraphStore()
        merge_triplets(
            store, [Triplet(node("Document", "10.1/a"), "CITES", node("Document", "10.1/b"))]
        )
        rows = execute(
            store,
            parse_cypherlite(
                "MATCH (x:Document)-[r1:CITES]-(y:Document)-[r2:CITES]-(z:Document) RETURN x, z"
            ),
        )
        assert rows == []  # would require revisiting a node


# ---------------------------------------------------------------------------
# brute-force join oracle
# ---------------------------------------------------------------------------


def _prop_str(value):
    return value if isinstance(value, str) else json.dumps(value, sort_keys=True)


def _oracle(store, ast):
    node_vars = ast.node_vars()
    edge_vars = ast.edge_vars()
    cands = [
        store.nodes_with_label(p.label) if p.label else sorted(store.nodes)
        for p in ast.nodes
    ]
    out = []
    for assignment in itertools.product(*cands):
        if len(set(assignment)) != len(assignment):
            continue
        ok = True
        for pred in ast.predicates:
            props = store.nodes[assignment[node_vars[pred.var]]]
            if pred.prop not in props:
                ok = False
                break
            value = _prop_str(props[pred.prop])
            if pred.op == "CONTAINS" and pred.value not in value:
                ok = False
                break
            if pred.op == "=" and value != pred.value:
                ok = False
                break
        if not ok:
            continue
        options = []
        for i, e in enumerate(ast.edges):
            a, b = assignment[i], assignment[i + 1]
            opts = [
                (h, r, t)
                for (h, r, t) in store.edges
                if (e.reltype is None or r == e.reltype)
                and ((h, t) == (a, b) or (h, t) == (b, a))
            ]
            options.append(opts)
        for combo in itertools.product(*options):
            out.append((assignment, combo))

    if ast.return_items[0].kind == "count":
        rows = [[len(out)]]
    else:
        rows = []
        for assignment, combo in out:
            cells = []
            for item in ast.return_items:
                if item.var in node_vars:
                    key = assignment[node_vars[item.var]]
                    cells.append(f"{key.label}:{key.key}")
                else:
                    h, r, t = combo[edge_vars[item.var]]
                    cells.append(f"({h.label}:{h.key})-[{r}]->({t.label}:{t.key})")
            rows.append(cells)
        rows.sort(key=lambda cells: tuple(str(c) for c in cells))
    if ast.limit is not None:
        rows = rows[: ast.limit]
    return rows


def random_graph(rng: random.Random, max_nodes: int = 30) -> GraphStore:
    labels = ["Document", "Author", "Keyword", "Affiliation", "Country"]
    relations = ["CITES", "AUTHORED_BY", "HAS_SME_KEYWORD", "AFFILIATED_WITH", "LOCATED_IN"]
    store = GraphStore()
    n = rng.randint(4, max_nodes)
    keys = []
    for i in range(n):
        label = rng.choice(labels)
        key = node(label, f"{label[:2].lower()}{i % 7}x{i}")
        store.add_node(key)
        keys.append(key)
    for _ in range(rng.randint(n, 2 * n)):
        a, b = rng.sample(keys, 2)
        store.add_triplet(Triplet(a, rng.choice(relations), b))
    return store


def random_query(rng: random.Random, store: GraphStore) -> str:
    labels = ["Document", "Author", "Keyword", "Affiliation", "Country"]
    n_nodes = rng.randint(1, 3)
    parts = []
    vars_used = []
    for i in range(n_nodes):
        var = f"v{i}"
        vars_used.append(var)
        label = rng.choice(labels + [None, None])
        parts.append(f"({var}:{label})" if label else f"({var})")
        if i < n_nodes - 1:
            rel = rng.choice(["CITES", "AUTHORED_BY", None])
            parts.append(f"-[e{i}:{rel}]-" if rel else f"-[e{i}]-")
    pattern = "".join(parts)
    where = ""
    if rng.random() < 0.4:
        var = rng.choice(vars_used)
        prop = rng.choice(["doi", "name", "term"])
        ch = rng.choice("abcdx0123")
        where = f" WHERE {var}.{prop} CONTAINS '{ch}'"
    if rng.random() < 0.3:
        ret = "count(*)"
    else:
        count = rng.randint(1, len(vars_used))
        ret = ", ".join(rng.sample(vars_used, count))
    limit = f" LIMIT {rng.randint(1, 5)}" if rng.random() < 0.3 else ""
    return f"MATCH {pattern}{where} RETURN {ret}{limit}"


def run_random_equivalence(n_graphs: int, n_queries: int, seed: int):
    rng = random.Random(seed)
    checked = 0
    for _g in range(n_graphs):
        store = random_graph(rng)
        for _q in range(n_queries):
            text = random_query(rng, store)
            try:
                ast = parse_cypherlite(text)
                got = execute(store, ast)
            except UnknownProperty:
                continue
            expected = _oracle(store, ast)
            assert got == expected, f"mismatch for {text}"
            checked += 1
    return checked


class TestOracleEquivalence:
    def test_random_graphs_match_join_oracle(self):
        checked = run_random_equivalence(25, 10, seed=42)
        assert checked > 150


class TestProfile:
    def test_scan_counts(self):
        store = GraphStore()
        for i in range(7):
            store.add_node(node("Document", f"10.1/{i}"))
        plan, rows = profile(store, parse_cypherlite("PROFILE MATCH (d:Document) RETURN d"))
        names = [op.name for op in plan.operators]
        assert names == ["ScanByLabel", "Project"]
        assert plan.operators[0].estimated_rows == 7
        assert plan.operators[0].actual_rows == 7
        assert len(rows) == 7

    def test_cybercrime_plan_shape(self):
        store = _cybercrime_store()
        plan, rows = profile(store, parse_cypherlite(PAPER_QUERY))
        names = [op.name for op in plan.operators]
        assert names == [
            "ScanByLabel",
            "FilterProperty",
            "ExpandEdge",
            "ExpandEdge",
            "ExpandEdge",
            "Project",
        ]
        assert plan.operators[0].detail == "Keyword"
        assert plan.operators[-1].actual_rows == len(rows) == 2

    def test_final_operator_actual_equals_row_count(self):
        store = _cybercrime_store()
        for text in (
            "MATCH (d:Document) RETURN d",
            "MATCH (d:Document)-[r]-(x) RETURN count(*)",
            "MATCH (d:Document) RETURN d LIMIT 1",
        ):
            plan, rows = profile(store, parse_cypherlite(text))
            assert plan.operators[-1].actual_rows == len(rows)

    def test_rendering_stable(self):
        store = _cybercrime_store()
        a = render_plan(profile(store, parse_cypherlite(PAPER_QUERY))[0])
        b = render_plan(profile(store, parse_cypherlite(PAPER_QUERY))[0])
        assert a == b
        assert "ScanByLabel" in a and "est=" in a and "actual=" in a

    def test_first_operator_is_scan(self):
        store = _cybercrime_store()
        rng = random.Random(3)
        for _ in range(20):
            text = random_query(rng, store)
            try:
                plan, _rows = profile(store, parse_cypherlite(text))
            except (UnknownProperty, UnknownLabel):
                continue
            assert plan.operators[0].name in ("ScanByLabel", "ScanAll")
            assert all(op.estimated_rows >= 0 for op in plan.operators)


class TestBuildGraphProperties:
    def test_document_properties_attached(self):
        store = _cybercrime_store()
        props = store.nodes[node("Document", "10.1/d1")]
        assert props["title"] == "a title"
        assert props["doi"] == "10.1/d1"

    def test_keyword_kind(self):
        docs = [
            make_doc(doi="10.1/a", categories=("Security",), sme_keywords=("security",)),
            make_doc(doi="10.1/b", categories=("Mathematics",)),
        ]
        store = build_graph(Corpus(documents=docs))
        assert store.nodes[node("Keyword", "security")]["kind"] == "both"
        assert store.nodes[node("Keyword", "mathematics")]["kind"] == "category"

    def test_schema_text_lists_labels_and_relations(self):
        text = _cybercrime_store().schema_text()
        assert "Document" in text and "AFFILIATED_WITH" in text


class TestExecuteDetailed:
    def test_bindings_expose_matched_documents(self):
        store = _cybercrime_store()
        ast = parse_cypherlite(
            "MATCH (k:Keyword)-[r]-(d:Document) WHERE k.term = 'cybercrime' RETURN count(*)"
        )
        rows, detailed = execute_detailed(store, ast)
        assert rows == [[2]]
        dois = {b["d"].key for b in detailed}
        assert dois == {"10.1/d1", "10.1/d2"}


class TestNer:
    def test_gazetteer_matches_longest(self):
        rec = GazetteerRecognizer({"Los Alamos": "location", "Los Alamos National Laboratory": "organization"})
        out = rec.entities("work done at Los Alamos National Laboratory today")
        assert ("organization", "Los Alamos National Laboratory") in out

    def test_heuristic_capitalized_span(self):
        rec = GazetteerRecognizer({}, use_heuristic=True)
        out = rec.entities("interviewed by Jane Doe yesterday")
        assert ("person", "Jane Doe") in out

    def test_unknown_label_rejected(self):
        with pytest.raises(ValueError):
            GazetteerRecognizer({"x": "animal"})


class TestCounterInvariants:
    def test_counts_equal_distinct_sets(self):
        rng = random.Random(17)
        for _ in range(20):
            stream = []
            for _i in range(rng.randint(1, 40)):
                head = node("Document", f"10.6/d{rng.randint(0, 8)}")
                tail_label = rng.choice(["Document", "Author", "Keyword"])
                tail = node(tail_label, f"k{rng.randint(0, 8)}")
                if (head.label, head.key) == (tail.label, tail.key):
                    continue
                relation = rng.choice(["CITES", "AUTHORED_BY", "HAS_SME_KEYWORD"])
                stream.append(Triplet(head, relation, tail))
            store = merge_triplets(GraphStore(), stream)
            distinct_nodes = {t.head for t in stream} | {t.tail for t in stream}
            assert store.node_count == len(distinct_nodes)
            assert store.edge_count == len(set(stream))
