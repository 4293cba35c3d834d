from .store import (
    GraphStore,
    NodeKey,
    Triplet,
    build_graph,
    emit_triplets,
    merge_triplets,
)
from .cypher import QueryAst, parse_cypherlite
from .engine import ExecutionPlan, execute, execute_detailed, profile, render_plan

__all__ = [
    "GraphStore",
    "NodeKey",
    "Triplet",
    "build_graph",
    "emit_triplets",
    "merge_triplets",
    "QueryAst",
    "parse_cypherlite",
    "ExecutionPlan",
    "execute",
    "execute_detailed",
    "profile",
    "render_plan",
]
