"""Question routing and the two retrieval paths.

Specific-document questions run a ReAct loop whose tools wrap the vector
store and graph; general questions are genericized, matched against a
store of known graph queries, and fall back to synthesizing (and
auditing) a new query. Every grounded answer carries document citations;
anything unanswerable degrades to an explicit abstention.
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import EmptyQuestion, ParseError, SlicError, SynthesisFailed
from ..graph.cypher import parse_cypherlite
from ..graph.engine import execute_detailed, profile, render_plan
from ..graph.store import GraphStore
from ..vectors import EmbeddingProvider, VectorStore, knn_cosine, knn_levenshtein
from . import prompts
from .llm import LlmClient

logger = logging.getLogger("slic.rag")

DOI_RE = re.compile(r"\b10\.\d{1,9}/[^\s\]\)\"',;?!]+")
YEAR_RE = re.compile(r"\b(?:18|19|20)\d{2}\b|\b2100\b")
QUOTED_RE = re.compile(r"\"[^\"]+\"|'[^']+'")

ABSTAIN_MARKERS = ("cannot", "unable", "no information", "not available", "don't know", "do not know")


@dataclass(frozen=True)
class Route:
    kind: str  # "SpecificDocument" | "General"
    rationale: str


@dataclass(frozen=True)
class ToolSpec:
    name: str
    description: str
    parameters: dict


@dataclass(frozen=True)
class ScratchEntry:
    thought: str
    action: str
    action_input: str
    observation: str


@dataclass
class ReactState:
    instructions: str
    user_query: str
    tool_specs: tuple[ToolSpec, ...]
    scratchpad: list[ScratchEntry] = field(default_factory=list)
    step: int = 0
    max_steps: int = 8


@dataclass
class Answer:
    text: str
    citations: list[tuple[str, Optional[int]]]
    route_taken: Route
    transcript: object = None
    abstained: bool = False

    def to_dict(self) -> dict:
        if isinstance(self.transcript, ReactState):
            transcript = {
                "kind": "react",
                "steps": [
                    {
                        "thought": e.thought,
                        "action": e.action,
                        "action_input": e.action_input,
                        "observation": e.observation,
                    }
                    for e in self.transcript.scratchpad
                ],
            }
        else:
            transcript = {"kind": "audit", "events": self.transcript or []}
        return {
            "text": self.text,
            "citations": [{"doi": doi, "chunk_id": chunk} for doi, chunk in self.citations],
            "route": self.route_taken.kind,
            "rationale": self.route_taken.rationale,
            "abstained": self.abstained,
            "transcript": transcript,
        }


def _looks_like_abstention(text: str) -> bool:
    lowered = text.lower()
    return any(marker in lowered for marker in ABSTAIN_MARKERS)


# ---------------------------------------------------------------------------
# Routing
# ---------------------------------------------------------------------------


def route_question(question: str, llm: LlmClient) -> Route:
    """One LLM call with a fixed routing prompt, plus a rule fallback."""
    if not question.strip():
        raise EmptyQuestion("question is empty")
    response = llm.complete(prompts.ROUTING_PROMPT.format(question=question), stop=["\n"])
    lowered = response.lower()
    pos_specific = lowered.find("specific")
    pos_general = lowered.find("general")
    if pos_specific != -1 and (pos_general == -1 or pos_specific < pos_general):
        return Route("SpecificDocument", f"llm: {response.strip()}")
    if pos_general != -1:
        return Route("General", f"llm: {response.strip()}")
    if DOI_RE.search(question) or QUOTED_RE.search(question):
        return Route("SpecificDocument", "fallback: question names a document")
    return Route("General", "fallback: corpus-level question")


# ---------------------------------------------------------------------------
# Genericization
# ---------------------------------------------------------------------------


@dataclass
class Gazetteers:
    """Known surface forms used by the rule-based genericizer."""

    topics: tuple[str, ...] = ()
    persons: tuple[str, ...] = ()
    keywords: tuple[str, ...] = ()


def _rule_based_spans(question: str, gazetteers: Gazetteers):
    spans: list[tuple[int, int, str, str]] = []

    def claim(start: int, end: int, kind: str, surface: str):
        for s, e, _, _ in spans:
            if start < e and s < end:
                return
        spans.append((start, end, kind, surface))

    for match in DOI_RE.finditer(question):
        claim(match.start(), match.end(), "DOI", match.group(0))
    for surface_list, kind in (
        (gazetteers.topics, "TOPIC"),
        (gazetteers.persons, "PERSON"),
        (gazetteers.keywords, "KEYWORD"),
    ):
        for surface in sorted(surface_list, key=len, reverse=True):
            if not surface:
                continue
            for match in re.finditer(re.escape(surface), question, re.IGNORECASE):
                claim(match.start(), match.end(), kind, match.group(0))
    for match in YEAR_RE.finditer(question):
        claim(match.start(), match.end(), "YEAR", match.group(0))
    return sorted(spans)


def _splice(question: str, spans) -> tuple[str, dict[str, str]]:
    bindings: dict[str, str] = {}
    counters: dict[str, int] = {}
    out = []
    cursor = 0
    for start, end, kind, surface in spans:
        counters[kind] = counters.get(kind, 0) + 1
        name = f"${kind}" if counters[kind] == 1 else f"${kind}_{counters[kind]}"
        bindings[name] = surface
        out.append(question[cursor:start])
        out.append(name)
        cursor = end
    out.append(question[cursor:])
    return "".join(out), bindings


def substitute_bindings(template: str, bindings: dict[str, str]) -> str:
    text = template
    for name in sorted(bindings, key=len, reverse=True):
        text = text.replace(name, bindings[name])
    return text


def genericize_question(
    question: str, llm: LlmClient, gazetteers: Optional[Gazetteers] = None
) -> tuple[str, dict[str, str]]:
    """Decouple specific entities from the question.

    The LLM proposes template+bindings; if its output does not parse or
    fails the reinsertion round-trip, deterministic rules take over.
    """
    gazetteers = gazetteers or Gazetteers()
    response = llm.complete(prompts.GENERICIZE_PROMPT.format(question=question))
    try:
        payload = json.loads(response.strip())
        template = payload["template"]
        bindings = dict(payload["bindings"])
        if substitute_bindings(template, bindings) == question:
            return template, bindings
    except (json.JSONDecodeError, KeyError, TypeError):
        pass
    template, bindings = _splice(question, _rule_based_spans(question, gazetteers))
    return template, bindings


# ---------------------------------------------------------------------------
# Query templates
# ---------------------------------------------------------------------------


@dataclass
class QueryTemplate:
    cypher: str
    description: str
    description_vector: Optional[np.ndarray] = None

    def placeholders(self) -> list[str]:
        return sorted(set(re.findall(r"\$[A-Z][A-Z0-9_]*", self.cypher)))


class TemplateStore:
    """A small vector store of cypher/description pairs."""

    def __init__(self, templates: Sequence[QueryTemplate], embedder: EmbeddingProvider):
        self.embedder = embedder
        self.templates = []
        for t in templates:
            parse_cypherlite(t.cypher)  # templates must be valid
            vector = embedder.embed(t.description)
            self.templates.append(replace_vector(t, vector))

    @classmethod
    def load(cls, path, embedder: EmbeddingProvider) -> "TemplateStore":
        """Line-delimited JSON of {cypher, description}; vectors recomputed."""
        templates = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    d = json.loads(line)
                    templates.append(QueryTemplate(d["cypher"], d["description"]))
        return cls(templates, embedder)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for t in self.templates:
                fh.write(
                    json.dumps({"cypher": t.cypher, "description": t.description}) + "\n"
                )


def replace_vector(t: QueryTemplate, vector: np.ndarray) -> QueryTemplate:
    return QueryTemplate(cypher=t.cypher, description=t.description, description_vector=vector)


def retrieve_templates(template_q: str, store: TemplateStore, k: int) -> list[QueryTemplate]:
    """Top-k templates by cosine similarity of description vectors."""
    if not store.templates:
        return []
    query = store.embedder.embed(template_q)
    scored = [
        (float(np.dot(t.description_vector, query)), t.description, t) for t in store.templates
    ]
    scored.sort(key=lambda s: (-s[0], s[1]))
    return [t for _, _, t in scored[: max(k, 0)]]


def try_retrieved(
    templates: Sequence[QueryTemplate], bindings: dict[str, str], graph: GraphStore
):
    """Instantiate and run the first template whose placeholders all bind."""
    for template in templates:
        needed = template.placeholders()
        if any(name not in bindings for name in needed):
            continue
        cypher = substitute_bindings(template.cypher, {n: bindings[n] for n in needed})
        try:
            ast = parse_cypherlite(cypher)
            rows, detailed = execute_detailed(graph, ast)
        except SlicError as exc:
            logger.info("retrieved template failed (%s); trying next", exc)
            continue
        return rows, cypher, detailed
    return None


# ---------------------------------------------------------------------------
# Synthesis + audit
# ---------------------------------------------------------------------------


def _strip_fences(text: str) -> str:
    text = text.strip()
    if text.startswith("```"):
        text = re.sub(r"^```[a-zA-Z]*\n?", "", text)
        text = re.sub(r"\n?```$", "", text.strip())
    return text.strip()


def synthesize_cypher(schema_text: str, examples: Sequence[str], question: str, llm: LlmClient) -> str:
    """Ask for a new query; retry twice with the parse error quoted back."""
    feedback = ""
    for _attempt in range(3):
        prompt = prompts.SYNTHESIZE_PROMPT.format(
            schema=schema_text,
            examples="\n".join(examples) if examples else "(none)",
            question=question,
            feedback=feedback,
        )
        candidate = _strip_fences(llm.complete(prompt))
        if not candidate:
            feedback = "Previous attempt returned empty output. Reply with one query.\n"
            continue
        try:
            parse_cypherlite(candidate)
            return candidate
        except ParseError as exc:
            feedback = f"Previous attempt failed to parse: {exc}\n"
    raise SynthesisFailed("no parseable query after 2 retries")


@dataclass(frozen=True)
class AuditVerdict:
    valid: bool
    plan_text: str
    reason: str


def audit_cypher(graph: GraphStore, cypher: str, question: str, llm: LlmClient) -> AuditVerdict:
    """PROFILE the query, have the model narrate the plan, then affirm it."""
    try:
        ast = parse_cypherlite(cypher)
        plan, _rows = profile(graph, ast)
    except SlicError as exc:
        return AuditVerdict(valid=False, plan_text="", reason=f"parse/plan failure: {exc}")
    plan_rendering = render_plan(plan)
    plan_text = llm.complete(
        prompts.AUDIT_TRANSLATE_PROMPT.format(glossary=prompts.glossary_text(), plan=plan_rendering)
    ).strip()
    verdict = llm.complete(
        prompts.AUDIT_VERDICT_PROMPT.format(plan_text=plan_text, question=question),
        stop=["\n"],
    ).strip()
    affirmed = verdict.upper().startswith("YES") or " YES" in verdict.upper()
    reason = verdict if verdict else "auditor returned no verdict"
    return AuditVerdict(valid=affirmed, plan_text=plan_text, reason=reason)


# ---------------------------------------------------------------------------
# ReAct loop
# ---------------------------------------------------------------------------


def render_react_prompt(state: ReactState) -> str:
    """The four prompt parts in fixed order: instructions, query, tools, scratchpad."""
    tool_lines = []
    for spec in state.tool_specs:
        tool_lines.append(f"- {spec.name}: {spec.description}")
        tool_lines.append(f"  parameters: {json.dumps(spec.parameters, sort_keys=True)}")
    pad_lines = []
    for entry in state.scratchpad:
        pad_lines.append(f"Thought: {entry.thought}")
        pad_lines.append(f"Action: {entry.action}")
        pad_lines.append(f"Action Input: {entry.action_input}")
        pad_lines.append(f"Observation: {entry.observation}")
    return (
        "### TASK: react\n"
        f"### INSTRUCTIONS\n{state.instructions}\n\n"
        f"### USER QUERY\n{state.user_query}\n\n"
        "### TOOLS\n" + ("\n".join(tool_lines) if tool_lines else "(no tools available)") + "\n\n"
        "### TOOL SCRATCHPAD\n" + ("\n".join(pad_lines) if pad_lines else "(empty)") + "\n"
    )


_FINAL_RE = re.compile(r"Final Answer:\s*(.*)", re.DOTALL)
_ACTION_RE = re.compile(r"Action:\s*(\S+)\s*Action Input:\s*(\{.*?\}|\S[^\n]*)", re.DOTALL)
_THOUGHT_RE = re.compile(r"Thought:\s*(.*?)(?:\n|$)")


class ToolExecutor:
    """Dispatches agent actions to tool callables.

    Execution logistics live here: unknown tools and tool exceptions become
    observations, never crashes, and every call is logged.
    """

    def __init__(self, tools: dict[str, Callable[[dict], str]]):
        self.tools = dict(tools)

    def run(self, name: str, action_input: str) -> str:
        if name not in self.tools:
            known = ", ".join(sorted(self.tools)) or "none"
            return f"ERROR: unknown tool {name!r}; available tools: {known}"
        try:
            args = json.loads(action_input) if action_input.strip() else {}
            if not isinstance(args, dict):
                args = {"query": args}
        except json.JSONDecodeError:
            args = {"query": action_input.strip()}
        try:
            result = self.tools[name](args)
            logger.info("tool %s(%s) -> %d chars", name, args, len(result))
            return result
        except Exception as exc:  # tool errors become observations
            logger.warning("tool %s failed: %s", name, exc)
            return f"ERROR: {exc}"


def _extract_citations(
    text: str,
    observed: dict[str, Optional[int]],
    corpus_dois: set[str],
) -> list[tuple[str, Optional[int]]]:
    citations = []
    seen = set()
    for match in DOI_RE.finditer(text):
        doi = match.group(0).rstrip(".")
        if doi in seen or doi not in corpus_dois:
            continue
        seen.add(doi)
        citations.append((doi, observed.get(doi)))
    return citations


def run_react(
    question: str,
    tools: dict[str, Callable[[dict], str]],
    tool_specs: Sequence[ToolSpec],
    llm: LlmClient,
    corpus_dois: set[str],
    max_steps: int = 8,
    instructions: str = prompts.REACT_INSTRUCTIONS,
) -> Answer:
    """Reason-act loop: prompt, parse thought/action or final, observe, repeat."""
    state = ReactState(
        instructions=instructions,
        user_query=question,
        tool_specs=tuple(tool_specs),
        max_steps=max_steps,
    )
    executor = ToolExecutor(tools)
    observed: dict[str, Optional[int]] = {}
    route = Route("SpecificDocument", "react loop")

    while state.step < state.max_steps:
        state.step += 1
        response = llm.complete(render_react_prompt(state), stop=["Observation:"])
        final = _FINAL_RE.search(response)
        if final:
            text = final.group(1).strip()
            citations = _extract_citations(text, observed, corpus_dois)
            return Answer(
                text=text,
                citations=citations,
                route_taken=route,
                transcript=state,
                abstained=not citations and _looks_like_abstention(text),
            )
        action = _ACTION_RE.search(response)
        if not action:
            # No tool call and no final marker: treat the reply as the answer.
            text = response.strip()
            citations = _extract_citations(text, observed, corpus_dois)
            return Answer(
                text=text,
                citations=citations,
                route_taken=route,
                transcript=state,
                abstained=not citations and _looks_like_abstention(text),
            )
        thought_match = _THOUGHT_RE.search(response)
        thought = thought_match.group(1).strip() if thought_match else ""
        name = action.group(1).strip()
        action_input = action.group(2).strip()
        observation = executor.run(name, action_input)
        for match in DOI_RE.finditer(observation):
            doi = match.group(0).rstrip(".")
            chunk = None
            chunk_match = re.search(re.escape(match.group(0)) + r"\s+chunk=(-?\d+)", observation)
            if chunk_match:
                chunk = int(chunk_match.group(1))
            if doi not in observed or observed[doi] is None:
                observed[doi] = chunk
        state.scratchpad.append(ScratchEntry(thought, name, action_input, observation))

    return Answer(
        text=f"I cannot answer within {state.max_steps} steps.",
        citations=[],
        route_taken=route,
        transcript=state,
        abstained=True,
    )


# ---------------------------------------------------------------------------
# System assembly
# ---------------------------------------------------------------------------


@dataclass
class RagSystem:
    corpus: object
    graph: GraphStore
    vstore: VectorStore
    templates: TemplateStore
    llm: LlmClient
    embedder: EmbeddingProvider
    gazetteers: Gazetteers = field(default_factory=Gazetteers)
    retrieval_enabled: bool = True
    max_steps: int = 8
    template_k: int = 3

    def corpus_dois(self) -> set[str]:
        return {doc.doi for doc in self.corpus.documents}


def _format_hits(hits) -> str:
    lines = []
    for hit in hits:
        text = hit.text.replace("\n", " ")
        if len(text) > 500:
            text = text[:500] + "..."
        lines.append(f"doi={hit.doi} chunk={hit.chunk_id} score={hit.score:.4f} text={text}")
    return "\n".join(lines) if lines else "(no hits)"


def build_tools(system: RagSystem) -> tuple[dict[str, Callable[[dict], str]], list[ToolSpec]]:
    """The three retrieval tools exposed to the agent."""

    def vector_search(args: dict) -> str:
        query = str(args.get("query", ""))
        k = int(args.get("k", 5))
        doi = args.get("doi")
        if doi:
            records = [r for r in system.vstore.records if r.doi == doi]
            records.sort(key=lambda r: r.chunk_id)
            if query.strip():
                qv = system.embedder.embed(query)
                records.sort(key=lambda r: (-float(np.dot(r.vector, qv)), r.chunk_id))
            lines = []
            for r in records[:k]:
                text = r.text.replace("\n", " ")
                if len(text) > 500:
                    text = text[:500] + "..."
                lines.append(f"doi={r.doi} chunk={r.chunk_id} score=1.0000 text={text}")
            return "\n".join(lines) if lines else "(no hits)"
        return _format_hits(knn_cosine(system.vstore, system.embedder.embed(query), k))

    def graph_query(args: dict) -> str:
        cypher = str(args.get("cypher") or args.get("query") or "")
        ast = parse_cypherlite(cypher)
        rows, _ = execute_detailed(system.graph, ast)
        shown = rows[:20]
        return json.dumps({"row_count": len(rows), "rows": shown}, ensure_ascii=False)

    def levenshtein_lookup(args: dict) -> str:
        query = str(args.get("query", ""))
        k = int(args.get("k", 5))
        return _format_hits(knn_levenshtein(system.vstore, query, k, field="title"))

    tools = {
        "vector_search": vector_search,
        "graph_query": graph_query,
        "levenshtein_lookup": levenshtein_lookup,
    }
    specs = [
        ToolSpec(
            "vector_search",
            "Semantic search over document titles, abstracts and full-text paragraphs. "
            "Prefer this tool. Optional doi argument restricts to one document's records.",
            {"query": "string", "k": "int (default 5)", "doi": "string (optional)"},
        ),
        ToolSpec(
            "graph_query",
            "Run a CypherLite query over the knowledge graph of documents and metadata.",
            {"cypher": "string"},
        ),
        ToolSpec(
            "levenshtein_lookup",
            "Find stored documents whose title is closest to the query string by edit distance.",
            {"query": "string", "k": "int (default 5)"},
        ),
    ]
    return tools, specs


def _abstain(route: Route, reason: str, transcript=None) -> Answer:
    return Answer(
        text=f"I cannot answer from the available sources: {reason}",
        citations=[],
        route_taken=route,
        transcript=transcript,
        abstained=True,
    )


def _general_citations(
    bindings: dict[str, str], detailed, corpus_dois: set[str], cap: int = 5
) -> list[tuple[str, Optional[int]]]:
    citations: list[tuple[str, Optional[int]]] = []
    asked = bindings.get("$DOI")
    if asked and asked in corpus_dois:
        citations.append((asked, None))
    matched: set[str] = set()
    for binding in detailed:
        for key in binding.values():
            if key.label == "Document" and key.key in corpus_dois:
                matched.add(key.key)
    for doi in sorted(matched):
        if (doi, None) not in citations and len(citations) < cap:
            citations.append((doi, None))
    return citations


def answer_question(question: str, system: RagSystem) -> Answer:
    """Route, retrieve, and phrase an answer; failures become abstentions."""
    route = route_question(question, system.llm)
    if route.kind == "SpecificDocument":
        if system.retrieval_enabled:
            tools, specs = build_tools(system)
        else:
            tools, specs = {}, []
        return run_react(
            question,
            tools,
            specs,
            system.llm,
            system.corpus_dois(),
            max_steps=system.max_steps,
        )

    trail: list[dict] = []
    template_q, bindings = genericize_question(question, system.llm, system.gazetteers)
    trail.append({"event": "genericize", "template": template_q, "bindings": bindings})

    if not system.retrieval_enabled:
        response = system.llm.complete(prompts.DIRECT_PROMPT.format(question=question)).strip()
        abstained = not response or _looks_like_abstention(response)
        return Answer(
            text=response or "I cannot answer.",
            citations=[],
            route_taken=route,
            transcript=trail,
            abstained=abstained,
        )

    templates = retrieve_templates(template_q, system.templates, system.template_k)
    trail.append({"event": "retrieve_templates", "count": len(templates)})

    result = try_retrieved(templates, bindings, system.graph)
    if result is not None:
        rows, cypher, detailed = result
        trail.append({"event": "retrieved_query", "cypher": cypher})
    else:
        examples = [t.cypher for t in system.templates.templates[:5]]
        try:
            cypher = synthesize_cypher(
                system.graph.schema_text(), examples, template_q, system.llm
            )
        except SynthesisFailed as exc:
            trail.append({"event": "synthesis_failed", "reason": str(exc)})
            return _abstain(route, "no usable graph query could be constructed", trail)
        verdict = audit_cypher(system.graph, cypher, question, system.llm)
        trail.append(
            {
                "event": "audit",
                "cypher": cypher,
                "valid": verdict.valid,
                "plan_text": verdict.plan_text,
                "reason": verdict.reason,
            }
        )
        if not verdict.valid:
            return _abstain(route, f"the synthesized query failed its audit: {verdict.reason}", trail)
        instantiated = substitute_bindings(cypher, bindings)
        try:
            ast = parse_cypherlite(instantiated)
            rows, detailed = execute_detailed(system.graph, ast)
        except SlicError as exc:
            trail.append({"event": "execute_failed", "reason": str(exc)})
            return _abstain(route, f"the synthesized query failed to execute: {exc}", trail)
        cypher = instantiated
        trail.append({"event": "synthesized_query", "cypher": cypher})

    if not rows:
        return _abstain(route, "the graph returned no rows", trail)

    rendered_rows = json.dumps(rows, ensure_ascii=False)
    response = system.llm.complete(
        prompts.FINAL_PROMPT.format(question=question, cypher=cypher, rows=rendered_rows)
    ).strip()
    text = response if response else f"Result: {rendered_rows}"
    citations = _general_citations(bindings, detailed, system.corpus_dois())
    trail.append({"event": "final", "rows": rows[:20]})
    return Answer(
        text=text,
        citations=citations,
        route_taken=route,
        transcript=trail,
        abstained=False,
    )
