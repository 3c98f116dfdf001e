"""Rooted, labeled AMR graphs with PENMAN parsing and serialization.

Graphs are treated as immutable after construction: parsing is pure, and all
pipeline stages build new graphs instead of mutating existing ones.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Tuple


class AmrError(Exception):
    """Base class for AMR construction and parsing failures."""


class PenmanSyntaxError(AmrError):
    """Malformed PENMAN text (unbalanced parentheses, missing '/', ...)."""


class DuplicateInstanceError(AmrError):
    """The same variable is given two concepts."""


class DanglingVariableError(AmrError):
    """A variable is referenced but never instantiated."""


class DisconnectedGraphError(AmrError):
    """Not every node is reachable from the root (ignoring edge direction)."""


# Bare (unquoted) tokens in target position that are constants, not variables.
_CONSTANT_WORDS = {"-", "+", "interrogative", "imperative", "expressive"}
_NUMBER_RE = re.compile(r"^[+-]?\d+(\.\d+)?$")
_SENSE_RE = re.compile(r"^.+-\d{2}$")
_ARG_ROLES = {f":ARG{i}" for i in range(6)}


def is_constant_token(token: str) -> bool:
    return (
        token.startswith('"')
        or token in _CONSTANT_WORDS
        or _NUMBER_RE.match(token) is not None
    )


def has_sense_suffix(concept: str) -> bool:
    """True for concepts of the form name-DD (two-digit sense)."""
    return _SENSE_RE.match(concept) is not None


def strip_sense(concept: str) -> str:
    if has_sense_suffix(concept):
        return concept.rsplit("-", 1)[0]
    return concept


@dataclass(frozen=True)
class Node:
    variable: str
    concept: str


@dataclass(frozen=True)
class Edge:
    source: str
    role: str
    target: str
    inverted_in_surface: bool = False

    def key(self) -> Tuple[str, str, str]:
        return (self.source, self.role, self.target)


@dataclass(frozen=True)
class Triple:
    kind: str  # instance | relation | attribute | root-marker
    head: str
    label: str
    tail: str


Attribute = Tuple[str, str, str]  # (variable, role, constant)


class AmrGraph:
    """A rooted AMR graph: one concept per variable, normalized forward edges.

    ``nodes`` maps variable ids to concept labels.  Inverse ("-of") roles are
    rewritten to forward edges at construction, with ``inverted_in_surface``
    recording the original surface orientation.
    """

    def __init__(
        self,
        root: str,
        nodes: Dict[str, str],
        edges: Iterable[Edge] = (),
        attributes: Iterable[Attribute] = (),
    ):
        self.root = root
        self.nodes = dict(nodes)
        self.edges = [self._normalize_edge(e) for e in edges]
        self.attributes = list(attributes)
        self._validate()

    @staticmethod
    def _normalize_edge(e: Edge) -> Edge:
        if e.role.endswith("-of") and len(e.role) > len(":-of"):
            return Edge(e.target, e.role[: -len("-of")], e.source, True)
        return e

    def _validate(self) -> None:
        if self.root not in self.nodes:
            raise DanglingVariableError(f"root {self.root!r} has no instance")
        for concept in self.nodes.values():
            if not concept:
                raise AmrError("empty concept label")
        for e in self.edges:
            if not e.role.startswith(":"):
                raise AmrError(f"role {e.role!r} must begin with ':'")
            for v in (e.source, e.target):
                if v not in self.nodes:
                    raise DanglingVariableError(f"variable {v!r} never instantiated")
        for v, role, _ in self.attributes:
            if v not in self.nodes:
                raise DanglingVariableError(f"variable {v!r} never instantiated")
            if not role.startswith(":"):
                raise AmrError(f"role {role!r} must begin with ':'")
        seen = {self.root}
        stack = [self.root]
        adj: Dict[str, List[str]] = {v: [] for v in self.nodes}
        for e in self.edges:
            adj[e.source].append(e.target)
            adj[e.target].append(e.source)
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        if seen != set(self.nodes):
            missing = sorted(set(self.nodes) - seen)
            raise DisconnectedGraphError(f"unreachable from root: {missing}")

    # -- queries -----------------------------------------------------------

    def concept(self, variable: str) -> str:
        return self.nodes[variable]

    def node(self, variable: str) -> Node:
        return Node(variable, self.nodes[variable])

    def outgoing(self, variable: str) -> List[Edge]:
        return [e for e in self.edges if e.source == variable]

    def incoming(self, variable: str) -> List[Edge]:
        return [e for e in self.edges if e.target == variable]

    def is_predicate(self, variable: str) -> bool:
        """Sense-suffixed concept with at least one outgoing ARGn edge."""
        if not has_sense_suffix(self.nodes[variable]):
            return False
        return any(e.role in _ARG_ROLES for e in self.outgoing(variable))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, AmrGraph)
            and self.root == other.root
            and self.nodes == other.nodes
            and {e.key() for e in self.edges} == {e.key() for e in other.edges}
            and sorted(self.attributes) == sorted(other.attributes)
        )

    def __repr__(self) -> str:
        return f"AmrGraph(root={self.root!r}, nodes={len(self.nodes)}, edges={len(self.edges)})"


def to_triples(graph: AmrGraph) -> FrozenSet[Triple]:
    """Canonical triple view: instances, relations, attributes, root marker.

    The root marker's tail is the fixed constant "top" so that root-alignment
    credit in graph matching is independent of the root concept.
    """
    triples = set()
    for v, c in graph.nodes.items():
        triples.add(Triple("instance", v, ":instance", c))
    for e in graph.edges:
        triples.add(Triple("relation", e.source, e.role, e.target))
    for v, role, const in graph.attributes:
        triples.add(Triple("attribute", v, role, const))
    triples.add(Triple("root-marker", graph.root, ":top", "top"))
    return frozenset(triples)


# -- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(r'\(|\)|/|"[^"]*"|[^\s()/]+')


def _tokenize(text: str) -> List[str]:
    tokens = _TOKEN_RE.findall(text)
    if not tokens:
        raise PenmanSyntaxError("empty PENMAN text")
    return tokens


class _Parser:
    def __init__(self, tokens: List[str]):
        self.tokens = tokens
        self.pos = 0
        self.nodes: Dict[str, str] = {}
        self.raw_edges: List[Tuple[str, str, str]] = []
        self.raw_attrs: List[Attribute] = []
        self.references: List[Tuple[str, str, str]] = []  # (source, role, bare token)

    def peek(self) -> str:
        if self.pos >= len(self.tokens):
            raise PenmanSyntaxError("unexpected end of input")
        return self.tokens[self.pos]

    def take(self) -> str:
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, tok: str) -> None:
        got = self.take()
        if got != tok:
            raise PenmanSyntaxError(f"expected {tok!r}, got {got!r}")

    def parse_node(self) -> str:
        self.expect("(")
        var = self.take()
        if var in ("(", ")", "/") or var.startswith(":"):
            raise PenmanSyntaxError(f"bad variable token {var!r}")
        self.expect("/")
        concept = self.take()
        if concept in ("(", ")", "/") or concept.startswith(":"):
            raise PenmanSyntaxError(f"bad concept token {concept!r}")
        if var in self.nodes:
            raise DuplicateInstanceError(f"variable {var!r} instantiated twice")
        self.nodes[var] = concept
        while self.peek() != ")":
            role = self.take()
            if not role.startswith(":"):
                raise PenmanSyntaxError(f"expected role, got {role!r}")
            if self.peek() == "(":
                child = self.parse_node()
                self.raw_edges.append((var, role, child))
            else:
                target = self.take()
                if target in (")", "/"):
                    raise PenmanSyntaxError(f"missing target for role {role!r}")
                if is_constant_token(target):
                    self.raw_attrs.append((var, role, target.strip('"')))
                else:
                    self.references.append((var, role, target))
        self.expect(")")
        return var


def parse_penman(text: str) -> AmrGraph:
    """Parse one PENMAN graph. Re-entrant variables unify into one node."""
    if not text or not text.strip():
        raise PenmanSyntaxError("empty PENMAN text")
    parser = _Parser(_tokenize(text))
    root = parser.parse_node()
    if parser.pos != len(parser.tokens):
        raise PenmanSyntaxError(f"trailing tokens after graph: {parser.tokens[parser.pos:]}")
    edges = [Edge(s, r, t) for s, r, t in parser.raw_edges]
    for source, role, token in parser.references:
        if token not in parser.nodes:
            raise DanglingVariableError(f"variable {token!r} referenced but never instantiated")
        edges.append(Edge(source, role, token))
    return AmrGraph(root, parser.nodes, edges, parser.raw_attrs)


# -- serialization ---------------------------------------------------------


def serialize_penman(graph: AmrGraph) -> str:
    """Deterministic PENMAN form: children in (role, target variable) order.

    Orientation is chosen per spanning-tree traversal from the root; edges
    emitted against their normalized direction get an "-of" role.  Re-entrant
    mentions serialize as bare variable references.
    """
    visited = set()
    emitted = set()

    def surface_children(var: str) -> List[Tuple[str, str, Edge]]:
        out = []
        for e in graph.edges:
            if e.key() in emitted:
                continue
            if e.source == var:
                out.append((e.role, e.target, e))
            elif e.target == var:
                out.append((e.role + "-of", e.source, e))
        return sorted(out, key=lambda x: (x[0], x[1]))

    def emit(var: str) -> str:
        visited.add(var)
        parts = [f"({var} / {graph.nodes[var]}"]
        for role, const in sorted((r, c) for v, r, c in graph.attributes if v == var):
            rendered = const if is_constant_token(const) else f'"{const}"'
            parts.append(f" {role} {rendered}")
        while True:
            children = surface_children(var)
            if not children:
                break
            role, other, edge = children[0]
            emitted.add(edge.key())
            if other in visited:
                parts.append(f" {role} {other}")
            else:
                parts.append(f" {role} {emit(other)}")
        parts.append(")")
        return "".join(parts)

    return emit(graph.root)


# -- metadata-bearing PENMAN files -----------------------------------------


@dataclass
class PenmanBlock:
    """One blank-line-separated block of a PENMAN file."""

    graph: AmrGraph
    metadata: List[str] = field(default_factory=list)  # '#'-prefixed lines, preserved


def read_penman_blocks(text: str) -> List[PenmanBlock]:
    blocks = []
    for chunk in re.split(r"\n\s*\n", text):
        if not chunk.strip():
            continue
        meta = [ln for ln in chunk.splitlines() if ln.startswith("#")]
        body = "\n".join(ln for ln in chunk.splitlines() if not ln.startswith("#"))
        if not body.strip():
            continue
        blocks.append(PenmanBlock(parse_penman(body), meta))
    return blocks


def write_penman_blocks(blocks: Iterable[PenmanBlock]) -> str:
    out = []
    for block in blocks:
        lines = list(block.metadata)
        lines.append(serialize_penman(block.graph))
        out.append("\n".join(lines))
    return "\n\n".join(out) + "\n"
