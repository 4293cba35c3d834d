from .llm import LlmClient, MockLlmClient, load_mock_script
from .orchestrator import (
    Answer,
    QueryTemplate,
    RagSystem,
    ReactState,
    Route,
    TemplateStore,
    answer_question,
    audit_cypher,
    genericize_question,
    render_react_prompt,
    retrieve_templates,
    route_question,
    run_react,
    substitute_bindings,
    synthesize_cypher,
    try_retrieved,
)

__all__ = [
    "LlmClient",
    "MockLlmClient",
    "load_mock_script",
    "Answer",
    "QueryTemplate",
    "RagSystem",
    "ReactState",
    "Route",
    "TemplateStore",
    "answer_question",
    "audit_cypher",
    "genericize_question",
    "render_react_prompt",
    "retrieve_templates",
    "route_question",
    "run_react",
    "substitute_bindings",
    "synthesize_cypher",
    "try_retrieved",
]
