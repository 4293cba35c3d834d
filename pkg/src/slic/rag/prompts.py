"""Prompt templates and the plan-operator glossary.

Every prompt opens with a distinct "### TASK:" banner so scripted mocks
can target a single stage, and rendering is a pure function of its
inputs.
"""
from __future__ import annotations

REACT_INSTRUCTIONS = """You answer questions about a scientific corpus using the tools below.
Think step by step. To call a tool, reply exactly in the form:
Thought: <why>
Action: <tool name>
Action Input: <JSON arguments>
When you can answer, reply:
Thought: <why>
Final Answer: <answer text, citing source documents as [doi]>
Only state facts supported by tool observations, and cite the supporting
document identifiers in square brackets. If the sources do not contain the
answer, say you cannot answer."""

ROUTING_PROMPT = """### TASK: route
Decide which retrieval route answers the question.
Reply with exactly one word.
- SpecificDocument: the answer lies in one document's own text (title or abstract).
- General: the answer needs corpus-level structure such as counts, trends, or metadata joins.
Question: {question}
Route:"""

GENERICIZE_PROMPT = """### TASK: genericize
Replace the specific entities in the question with typed placeholders
($PERSON, $YEAR, $TOPIC, $DOI, $KEYWORD) and report the bindings.
Reply with JSON: {{"template": "...", "bindings": {{"$X": "original"}}}}
Question: {question}
JSON:"""

SYNTHESIZE_PROMPT = """### TASK: synthesize
Write one CypherLite query answering the question.
Use only this grammar: MATCH <chain> [WHERE <var>.<prop> CONTAINS|= '<text>' [AND ...]] RETURN <items> [LIMIT n].
Graph schema:
{schema}
Example queries:
{examples}
Question: {question}
{feedback}Query:"""

AUDIT_TRANSLATE_PROMPT = """### TASK: audit-translate
Translate this query execution plan into plain language.
Operator glossary:
{glossary}
Execution plan:
{plan}
Plain language:"""

AUDIT_VERDICT_PROMPT = """### TASK: audit-verdict
Plan in plain language: {plan_text}
Question: {question}
Does executing this plan answer the question? Reply YES or NO with a short reason.
Verdict:"""

FINAL_PROMPT = """### TASK: final
Question: {question}
Query: {cypher}
Result rows: {rows}
Phrase the result as a direct natural-language answer.
Answer:"""

DIRECT_PROMPT = """### TASK: direct
Answer from your own knowledge. If you are not certain, say you cannot answer.
Question: {question}
Answer:"""

# Stands in for vendor documentation excerpts when the auditor reads a plan.
OPERATOR_GLOSSARY = {
    "ScanByLabel": "Reads every node carrying the given label.",
    "ScanAll": "Reads every node in the graph.",
    "FilterProperty": "Keeps rows whose node property satisfies the predicate.",
    "ExpandEdge": "Follows edges (either direction) from bound nodes to their neighbors.",
    "Project": "Emits the requested variables as result columns.",
    "Aggregate": "Collapses matched rows into a count.",
    "Limit": "Truncates the result to the first n rows.",
}


def glossary_text() -> str:
    return "\n".join(f"{name}: {desc}" for name, desc in OPERATOR_GLOSSARY.items())
