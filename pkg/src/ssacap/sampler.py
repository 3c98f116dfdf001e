"""Event-focused connected subgraph sampling from a meta graph.

Every sample is rooted at a predicate node: the argument-closure variant
follows outgoing ARGn edges transitively, the extended variant adds the
predicate's non-ARG branches.  Synonym lists resolve to a single seeded
label choice, and variables are re-lettered as z<n>.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Set, Tuple

from .amr import AmrGraph, Edge, has_sense_suffix
from .grounding import Box, VgAmr

ARG_ROLES = {f":ARG{i}" for i in range(6)}


@dataclass
class SampledSubgraph:
    graph: VgAmr  # synonyms resolved to single labels
    origin_predicate: str  # variable id in `graph` (the root)
    kind: str  # argument-closure | extended
    source_variable: str  # variable id in the meta graph


def find_predicates(meta: VgAmr) -> List[str]:
    """Nodes with a sense-suffixed label (canonical or synonym) and an
    outgoing ARG0..ARG5 edge."""
    out = []
    for v in sorted(meta.graph.nodes):
        if not any(has_sense_suffix(label) for label in meta.labels(v)):
            continue
        if any(e.role in ARG_ROLES for e in meta.graph.outgoing(v)):
            out.append(v)
    return out


def _argument_closure(g: AmrGraph, start: str) -> Set[str]:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for e in g.outgoing(v):
            if e.role in ARG_ROLES and e.target not in seen:
                seen.add(e.target)
                stack.append(e.target)
    return seen


def _descendants(g: AmrGraph, start: str) -> Set[str]:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for e in g.outgoing(v):
            if e.target not in seen:
                seen.add(e.target)
                stack.append(e.target)
    return seen


def _node_seed(seed: int, meta_var: str) -> int:
    digest = hashlib.blake2b(f"{seed}:{meta_var}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def _extract(
    meta: VgAmr,
    root: str,
    nodes: Set[str],
    labels: Dict[str, str],
    kind: str,
) -> SampledSubgraph:
    """Induced subgraph over `nodes`, re-lettered breadth-first from `root`.

    Edges with an endpoint outside the sample (re-entrancies into dropped
    branches) are cut by construction of the induced edge set.
    """
    g = meta.graph
    kept_edges = [e for e in g.edges if e.source in nodes and e.target in nodes]
    order: List[str] = [root]
    seen = {root}
    queue = [root]
    adjacency: Dict[str, List[Tuple[str, str]]] = {v: [] for v in nodes}
    for e in kept_edges:
        adjacency[e.source].append((e.role, e.target))
        adjacency[e.target].append((e.role + "-of", e.source))
    while queue:
        v = queue.pop(0)
        for _, other in sorted(adjacency[v]):
            if other not in seen:
                seen.add(other)
                order.append(other)
                queue.append(other)
    rename = {old: f"z{i}" for i, old in enumerate(order)}
    new_nodes = {rename[v]: labels[v] for v in order}
    new_edges = [Edge(rename[e.source], e.role, rename[e.target]) for e in kept_edges]
    new_attrs = [(rename[v], r, c) for v, r, c in g.attributes if v in seen]
    grounding: Dict[str, FrozenSet[Box]] = {
        rename[v]: meta.grounding[v] for v in order if v in meta.grounding
    }
    graph = AmrGraph(rename[root], new_nodes, new_edges, new_attrs)
    sub = VgAmr(graph, grounding, {rename[v]: (labels[v],) for v in order})
    return SampledSubgraph(sub, rename[root], kind, root)


def sample_event_subgraphs(meta: VgAmr, seed: int = 0) -> List[SampledSubgraph]:
    """Two samples per predicate (closure, extended), deduplicated when the
    extended variant adds nothing."""
    samples: List[SampledSubgraph] = []
    g = meta.graph
    for p in find_predicates(meta):
        closure = _argument_closure(g, p)
        extended = set(closure)
        for e in g.outgoing(p):
            if e.role not in ARG_ROLES:
                extended |= _descendants(g, e.target)
        # One synonym choice per node, shared by both variants so that equal
        # node sets produce identical samples.
        rng = random.Random(_node_seed(seed, p))
        labels = {v: rng.choice(meta.labels(v)) for v in sorted(extended)}
        samples.append(_extract(meta, p, closure, labels, "argument-closure"))
        if extended != closure:
            samples.append(_extract(meta, p, extended, labels, "extended"))
    return samples
