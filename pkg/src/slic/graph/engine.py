"""CypherLite execution: undirected chain matching with profiled plans.

Matching is exact and deterministic: scans and expansions iterate in
sorted order, node bindings within one match are pairwise distinct, and
result rows are ordered lexicographically on their rendered cells.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from ..errors import UnknownLabel, UnknownProperty
from .cypher import QueryAst
from .store import LABELS, PROPERTY_SCHEMA, GraphStore, NodeKey

_ALL_PROPS = {p for props in PROPERTY_SCHEMA.values() for p in props}


@dataclass
class PlanOperator:
    name: str
    detail: str
    estimated_rows: int
    actual_rows: Optional[int] = None


@dataclass
class ExecutionPlan:
    operators: list[PlanOperator] = field(default_factory=list)


def render_plan(plan: ExecutionPlan) -> str:
    lines = []
    for op in plan.operators:
        actual = "-" if op.actual_rows is None else str(op.actual_rows)
        detail = f"({op.detail})" if op.detail else ""
        lines.append(f"+ {op.name}{detail} est={op.estimated_rows} actual={actual}")
    return "\n".join(lines)


@dataclass
class _Binding:
    nodes: dict  # slot index -> NodeKey
    edges: dict  # edge index -> (head, relation, tail)


def _prop_str(value) -> str:
    if isinstance(value, str):
        return value
    return json.dumps(value, sort_keys=True)


def _validate(store: GraphStore, ast: QueryAst) -> None:
    for pattern in ast.nodes:
        if pattern.label is not None and pattern.label not in LABELS:
            raise UnknownLabel(f"unknown label {pattern.label!r}")
    node_vars = ast.node_vars()
    edge_vars = ast.edge_vars()
    for pred in ast.predicates:
        if pred.var in edge_vars:
            raise UnknownProperty(f"edges have no queryable properties ({pred.var!r})")
        slot = node_vars[pred.var]
        label = ast.nodes[slot].label
        allowed = PROPERTY_SCHEMA[label] if label else _ALL_PROPS
        if pred.prop not in allowed:
            raise UnknownProperty(
                f"property {pred.prop!r} is not defined for {label or 'any label'}"
            )


def _avg_degree(store: GraphStore) -> int:
    if not store.node_count:
        return 0
    return max(1, round(2 * store.edge_count / store.node_count))


def _node_cell(key: NodeKey) -> str:
    return f"{key.label}:{key.key}"


def _edge_cell(edge) -> str:
    head, relation, tail = edge
    return f"({_node_cell(head)})-[{relation}]->({_node_cell(tail)})"


class _Run:
    """One planned execution over a store."""

    def __init__(self, store: GraphStore, ast: QueryAst):
        _validate(store, ast)
        self.store = store
        self.ast = ast
        self.plan = ExecutionPlan()
        self.preds_by_slot: dict[int, list] = {}
        node_vars = ast.node_vars()
        for pred in ast.predicates:
            self.preds_by_slot.setdefault(node_vars[pred.var], []).append(pred)
        self.anchor = self._choose_anchor()
        self.steps = self._expansion_steps()

    def _choose_anchor(self) -> int:
        def score(slot: int):
            pattern = self.ast.nodes[slot]
            est = (
                self.store.label_counts.get(pattern.label, 0)
                if pattern.label
                else self.store.node_count
            )
            if pattern.label and slot in self.preds_by_slot:
                tier = 0
            elif pattern.label:
                tier = 1
            else:
                tier = 2
            return (tier, est, slot)

        return min(range(len(self.ast.nodes)), key=score)

    def _expansion_steps(self):
        steps = []
        for i in range(self.anchor, len(self.ast.edges)):
            steps.append((i, i, i + 1))  # edge index, from slot, to slot
        for i in range(self.anchor - 1, -1, -1):
            steps.append((i, i + 1, i))
        return steps

    def _filter_ops(self, slot: int, rows, est: int):
        for pred in self.preds_by_slot.get(slot, []):
            op = PlanOperator(
                name="FilterProperty",
                detail=f"{pred.var}.{pred.prop} {pred.op} {pred.value!r}",
                estimated_rows=max(est // 10, 1 if est > 0 else 0),
            )
            kept = []
            for binding in rows:
                props = self.store.nodes[binding.nodes[slot]]
                if pred.prop not in props:
                    continue
                value = _prop_str(props[pred.prop])
                ok = pred.value in value if pred.op == "CONTAINS" else value == pred.value
                if ok:
                    kept.append(binding)
            op.actual_rows = len(kept)
            self.plan.operators.append(op)
            rows = kept
            est = op.estimated_rows
        return rows, est

    def run(self):
        ast, store = self.ast, self.store
        anchor_pattern = ast.nodes[self.anchor]
        if anchor_pattern.label:
            candidates = store.nodes_with_label(anchor_pattern.label)
            scan = PlanOperator(
                name="ScanByLabel",
                detail=anchor_pattern.label,
                estimated_rows=store.label_counts.get(anchor_pattern.label, 0),
            )
        else:
            candidates = sorted(store.nodes)
            scan = PlanOperator(name="ScanAll", detail="", estimated_rows=store.node_count)
        rows = [_Binding(nodes={self.anchor: key}, edges={}) for key in candidates]
        scan.actual_rows = len(rows)
        self.plan.operators.append(scan)
        est = scan.estimated_rows

        rows, est = self._filter_ops(self.anchor, rows, est)

        for edge_idx, from_slot, to_slot in self.steps:
            edge_pattern = ast.edges[edge_idx]
            target = ast.nodes[to_slot]
            detail = f"[{edge_pattern.reltype or ''}]->{target.label or '*'}"
            op = PlanOperator(
                name="ExpandEdge",
                detail=detail,
                estimated_rows=est * _avg_degree(self.store),
            )
            expanded = []
            for binding in rows:
                source = binding.nodes[from_slot]
                for rel, other, direction in store.neighbors(source, edge_pattern.reltype):
                    if target.label and other.label != target.label:
                        continue
                    if other in binding.nodes.values():
                        continue
                    edge = (
                        (source, rel, other) if direction == "out" else (other, rel, source)
                    )
                    new = _Binding(nodes=dict(binding.nodes), edges=dict(binding.edges))
                    new.nodes[to_slot] = other
                    new.edges[edge_idx] = edge
                    expanded.append(new)
            op.actual_rows = len(expanded)
            self.plan.operators.append(op)
            rows = expanded
            est = op.estimated_rows
            rows, est = self._filter_ops(to_slot, rows, est)

        return self._project(rows, est)

    def _project(self, bindings, est: int):
        ast = self.ast
        node_vars = ast.node_vars()
        edge_vars = ast.edge_vars()

        if ast.return_items[0].kind == "count":
            op = PlanOperator(name="Aggregate", detail="count(*)", estimated_rows=1)
            rows = [[len(bindings)]]
            op.actual_rows = 1
            self.plan.operators.append(op)
        else:
            names = ", ".join(item.var for item in ast.return_items)
            op = PlanOperator(name="Project", detail=names, estimated_rows=est)
            rows = []
            for binding in bindings:
                cells = []
                for item in ast.return_items:
                    if item.var in node_vars:
                        cells.append(_node_cell(binding.nodes[node_vars[item.var]]))
                    else:
                        cells.append(_edge_cell(binding.edges[edge_vars[item.var]]))
                rows.append(cells)
            rows.sort(key=lambda cells: tuple(str(c) for c in cells))
            op.actual_rows = len(rows)
            self.plan.operators.append(op)

        if ast.limit is not None:
            op = PlanOperator(
                name="Limit",
                detail=str(ast.limit),
                estimated_rows=min(est if ast.return_items[0].kind != "count" else 1, ast.limit),
            )
            rows = rows[: ast.limit]
            op.actual_rows = len(rows)
            self.plan.operators.append(op)
        return rows, bindings


def execute(store: GraphStore, ast: QueryAst) -> list[list]:
    """Run a parsed query; rows are rendered cells in deterministic order."""
    rows, _ = _Run(store, ast).run()
    return rows


def execute_detailed(store: GraphStore, ast: QueryAst):
    """Rows plus the pre-projection bindings (var -> NodeKey), for callers
    that need to know which nodes produced the result."""
    run = _Run(store, ast)
    rows, bindings = run.run()
    node_vars = run.ast.node_vars()
    detailed = [
        {var: binding.nodes[slot] for var, slot in node_vars.items()} for binding in bindings
    ]
    return rows, detailed


def profile(store: GraphStore, ast: QueryAst) -> tuple[ExecutionPlan, list[list]]:
    """Execute and return the operator plan with estimated and actual rows."""
    run = _Run(store, ast)
    rows, _ = run.run()
    return run.plan, rows
