"""Parser for the CypherLite query language.

Grammar (EBNF):

    query   := ["PROFILE"] "MATCH" pattern
               ["WHERE" pred {"AND" pred}]
               "RETURN" item {"," item} ["LIMIT" int]
    pattern := node {edge node}
    node    := "(" [var] [":" label] ")"
    edge    := "-[" [var] [":" reltype] "]-"
    pred    := var "." prop ("CONTAINS" | "=") string
    item    := var | "count(*)"

Keywords are case-insensitive; variables are case-sensitive. Patterns are
undirected chains.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..errors import ParseError

KEYWORDS = {"PROFILE", "MATCH", "WHERE", "AND", "RETURN", "LIMIT", "CONTAINS", "COUNT"}


@dataclass(frozen=True)
class NodePattern:
    var: Optional[str]
    label: Optional[str]


@dataclass(frozen=True)
class EdgePattern:
    var: Optional[str]
    reltype: Optional[str]


@dataclass(frozen=True)
class Predicate:
    var: str
    prop: str
    op: str  # "CONTAINS" | "="
    value: str


@dataclass(frozen=True)
class ReturnItem:
    kind: str  # "var" | "count"
    var: Optional[str] = None


@dataclass
class QueryAst:
    profiled: bool
    nodes: list[NodePattern]
    edges: list[EdgePattern]
    predicates: list[Predicate]
    return_items: list[ReturnItem]
    limit: Optional[int] = None

    def node_vars(self) -> dict[str, int]:
        return {n.var: i for i, n in enumerate(self.nodes) if n.var}

    def edge_vars(self) -> dict[str, int]:
        return {e.var: i for i, e in enumerate(self.edges) if e.var}


@dataclass(frozen=True)
class _Token:
    kind: str  # KEYWORD IDENT STRING INT SYMBOL EOF
    value: str
    line: int
    column: int


_SYMBOLS = ("(", ")", "[", "]", "-", ":", ",", ".", "=", "*")


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            col += 1
            i += 1
            continue
        start_line, start_col = line, col
        if c in ("'", '"'):
            quote = c
            j = i + 1
            buf = []
            while j < len(text):
                if text[j] == "\\" and j + 1 < len(text):
                    buf.append(text[j + 1])
                    j += 2
                    continue
                if text[j] == quote:
                    break
                if text[j] == "\n":
                    line += 1
                    col = 0
                buf.append(text[j])
                j += 1
            if j >= len(text):
                raise ParseError("unterminated string", start_line, start_col, ["closing quote"])
            tokens.append(_Token("STRING", "".join(buf), start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if c.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(_Token("INT", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "KEYWORD" if word.upper() in KEYWORDS else "IDENT"
            value = word.upper() if kind == "KEYWORD" else word
            tokens.append(_Token(kind, value, start_line, start_col))
            col += j - i
            i = j
            continue
        if c in _SYMBOLS:
            tokens.append(_Token("SYMBOL", c, start_line, start_col))
            col += 1
            i += 1
            continue
        raise ParseError(f"unexpected character {c!r}", start_line, start_col, [])
    tokens.append(_Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def _fail(self, expected) -> ParseError:
        tok = self.current
        shown = tok.value or tok.kind
        return ParseError(
            f"unexpected {shown!r}, expected one of {sorted(expected)}",
            tok.line,
            tok.column,
            expected,
        )

    def accept(self, kind: str, value: Optional[str] = None) -> Optional[_Token]:
        tok = self.current
        if tok.kind == kind and (value is None or tok.value == value):
            self.pos += 1
            return tok
        return None

    def expect(self, kind: str, value: Optional[str] = None) -> _Token:
        tok = self.accept(kind, value)
        if tok is None:
            raise self._fail([value or kind])
        return tok

    def parse(self) -> QueryAst:
        profiled = bool(self.accept("KEYWORD", "PROFILE"))
        self.expect("KEYWORD", "MATCH")
        nodes, edges = self.parse_pattern()
        predicates = []
        if self.accept("KEYWORD", "WHERE"):
            predicates.append(self.parse_predicate())
            while self.accept("KEYWORD", "AND"):
                predicates.append(self.parse_predicate())
        self.expect("KEYWORD", "RETURN")
        items = [self.parse_item()]
        while self.accept("SYMBOL", ","):
            items.append(self.parse_item())
        limit = None
        if self.accept("KEYWORD", "LIMIT"):
            limit = int(self.expect("INT").value)
        self.expect("EOF")

        ast = QueryAst(
            profiled=profiled,
            nodes=nodes,
            edges=edges,
            predicates=predicates,
            return_items=items,
            limit=limit,
        )
        self._check_bindings(ast)
        return ast

    def parse_pattern(self) -> tuple[list[NodePattern], list[EdgePattern]]:
        nodes = [self.parse_node()]
        edges: list[EdgePattern] = []
        while self.current.kind == "SYMBOL" and self.current.value == "-":
            edges.append(self.parse_edge())
            nodes.append(self.parse_node())
        return nodes, edges

    def parse_node(self) -> NodePattern:
        self.expect("SYMBOL", "(")
        var = None
        label = None
        tok = self.accept("IDENT")
        if tok:
            var = tok.value
        if self.accept("SYMBOL", ":"):
            label = self.expect("IDENT").value
        self.expect("SYMBOL", ")")
        return NodePattern(var=var, label=label)

    def parse_edge(self) -> EdgePattern:
        self.expect("SYMBOL", "-")
        self.expect("SYMBOL", "[")
        var = None
        reltype = None
        tok = self.accept("IDENT")
        if tok:
            var = tok.value
        if self.accept("SYMBOL", ":"):
            reltype = self.expect("IDENT").value
        self.expect("SYMBOL", "]")
        self.expect("SYMBOL", "-")
        return EdgePattern(var=var, reltype=reltype)

    def parse_predicate(self) -> Predicate:
        var = self.expect("IDENT").value
        self.expect("SYMBOL", ".")
        prop = self.expect("IDENT").value
        if self.accept("KEYWORD", "CONTAINS"):
            op = "CONTAINS"
        elif self.accept("SYMBOL", "="):
            op = "="
        else:
            raise self._fail(["CONTAINS", "="])
        value = self.expect("STRING").value
        return Predicate(var=var, prop=prop, op=op, value=value)

    def parse_item(self) -> ReturnItem:
        if self.accept("KEYWORD", "COUNT"):
            self.expect("SYMBOL", "(")
            self.expect("SYMBOL", "*")
            self.expect("SYMBOL", ")")
            return ReturnItem(kind="count")
        tok = self.accept("IDENT")
        if tok:
            return ReturnItem(kind="var", var=tok.value)
        raise self._fail(["variable", "count(*)"])

    def _check_bindings(self, ast: QueryAst) -> None:
        bound = set(ast.node_vars()) | set(ast.edge_vars())
        kinds = {item.kind for item in ast.return_items}
        if kinds == {"count", "var"}:
            raise ParseError(
                "count(*) cannot be mixed with variables in RETURN", 1, 1, []
            )
        for item in ast.return_items:
            if item.kind == "var" and item.var not in bound:
                raise ParseError(
                    f"returned variable {item.var!r} is not bound in the pattern", 1, 1, []
                )
        for pred in ast.predicates:
            if pred.var not in bound:
                raise ParseError(
                    f"predicate variable {pred.var!r} is not bound in the pattern", 1, 1, []
                )

    # Duplicate variable names across slots would make bindings ambiguous.


def parse_cypherlite(text: str) -> QueryAst:
    """Parse query text into an AST; raises ParseError with position info."""
    parser = _Parser(text)
    ast = parser.parse()
    seen: set[str] = set()
    names = [n.var for n in ast.nodes if n.var] + [e.var for e in ast.edges if e.var]
    for name in names:
        if name in seen:
            raise ParseError(f"variable {name!r} bound more than once", 1, 1, [])
        seen.add(name)
    return ast
