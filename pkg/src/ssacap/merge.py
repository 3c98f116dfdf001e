"""Merge per-caption vgAMRs into one per-image meta graph.

Merge order comes from average-linkage clustering over the pairwise graph
distance matrix; each pairwise merge first finds same-concept node pairs
(grounding, label synonymy, neighborhood evidence), then unifies them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from .amr import AmrGraph, Edge, strip_sense
from .embeddings import EmbeddingStore
from .grounding import Box, VgAmr
from .smatch import DistanceMatrix, distance_matrix, DEFAULT_RESTARTS

AND_OR_CONCEPTS = {"and", "or"}
MULTI_SENTENCE = "multi-sentence"


@dataclass
class MergeParams:
    synonym_threshold: float = 0.7
    predicate_threshold: float = 0.5

    def __post_init__(self):
        if not (0 <= self.predicate_threshold < self.synonym_threshold <= 1):
            raise ValueError(
                "need 0 <= predicate_threshold < synonym_threshold <= 1, got "
                f"{self.predicate_threshold} / {self.synonym_threshold}"
            )


@dataclass
class MergeStep:
    left: Tuple[int, ...]  # leaf indices
    right: Tuple[int, ...]
    distance: float


@dataclass
class MergeTree:
    steps: List[MergeStep]


@dataclass
class NodePair:
    a: str
    b: str
    reason: str  # and-or | grounded-same-boxes | label-neighborhood | predicate-children


@dataclass
class NodePairing:
    pairs: List[NodePair] = field(default_factory=list)

    def __len__(self):
        return len(self.pairs)

    def a_to_b(self) -> Dict[str, str]:
        return {p.a: p.b for p in self.pairs}


def upgma_order(D: DistanceMatrix) -> MergeTree:
    """Average-linkage agglomeration; ties broken by smallest index pair."""
    members: Dict[int, Tuple[int, ...]] = {i: (i,) for i in range(D.n)}
    dist: Dict[Tuple[int, int], float] = {
        (i, j): D.d[i][j] for i in range(D.n) for j in range(i + 1, D.n)
    }
    steps: List[MergeStep] = []
    while len(members) > 1:
        (i, j) = min(dist, key=lambda ij: (dist[ij], ij))
        d_ij = dist[(i, j)]
        ci, cj = members[i], members[j]
        steps.append(MergeStep(ci, cj, d_ij))
        del members[i], members[j]
        merged = tuple(sorted(ci + cj))
        new_id = min(i, j)
        new_dists = {}
        for k in members:
            a, b = (min(i, k), max(i, k)), (min(j, k), max(j, k))
            new_dists[k] = (len(ci) * dist[a] + len(cj) * dist[b]) / (len(ci) + len(cj))
        dist = {
            (p, q): v
            for (p, q), v in dist.items()
            if p not in (i, j) and q not in (i, j)
        }
        for k, v in new_dists.items():
            dist[(min(new_id, k), max(new_id, k))] = v
        members[new_id] = merged
    return MergeTree(steps)


def _label_similarity(a: VgAmr, va: str, b: VgAmr, vb: str, store: EmbeddingStore) -> float:
    """Best cosine over the two synonym lists, sense suffixes stripped."""
    return max(
        store.cosine(strip_sense(la), strip_sense(lb))
        for la in a.labels(va)
        for lb in b.labels(vb)
    )


def _undirected_neighbors(g: AmrGraph, v: str) -> Set[str]:
    out = set()
    for e in g.edges:
        if e.source == v:
            out.add(e.target)
        elif e.target == v:
            out.add(e.source)
    return out


def _arg_children(g: AmrGraph, v: str) -> Set[Tuple[str, str]]:
    return {(e.role, e.target) for e in g.outgoing(v) if e.role.startswith(":ARG")}


def find_common_nodes(
    a: VgAmr,
    b: VgAmr,
    params: MergeParams,
    embeddings: EmbeddingStore,
) -> NodePairing:
    """Same-concept node pairs between two vgAMRs.

    Grounded anchors are found first (AND/OR roots, identical box sets with
    synonym labels); label/neighborhood rules then run to fixpoint so they can
    lean on already-established pairs.  A grounded node never pairs with an
    ungrounded one.
    """
    pairing = NodePairing()
    paired_a: Dict[str, str] = {}
    paired_b: Dict[str, str] = {}
    ga, gb = a.graph, b.graph

    def add(va: str, vb: str, reason: str) -> None:
        pairing.pairs.append(NodePair(va, vb, reason))
        paired_a[va] = vb
        paired_b[vb] = va

    # AND/OR at the two roots.
    if (
        ga.nodes[ga.root] in AND_OR_CONCEPTS
        and ga.nodes[ga.root] == gb.nodes[gb.root]
    ):
        add(ga.root, gb.root, "and-or")

    # Grounded rule: identical box sets + synonym labels.
    for va in sorted(a.grounding):
        if va in paired_a:
            continue
        for vb in sorted(b.grounding):
            if vb in paired_b:
                continue
            if a.grounding[va] != b.grounding[vb]:
                continue
            if _label_similarity(a, va, b, vb, embeddings) >= params.synonym_threshold:
                add(va, vb, "grounded-same-boxes")
                break

    # Label/neighborhood rules, to fixpoint.
    changed = True
    while changed:
        changed = False
        for va in sorted(ga.nodes):
            if va in paired_a:
                continue
            for vb in sorted(gb.nodes):
                if vb in paired_b:
                    continue
                if a.is_grounded(va) != b.is_grounded(vb):
                    continue  # grounded-to-ungrounded pairs are never made
                if a.is_grounded(va):
                    continue  # grounded pairs only via the box-set rule above
                reason = _ungrounded_pair_reason(a, va, b, vb, paired_a, paired_b, params, embeddings)
                if reason:
                    add(va, vb, reason)
                    changed = True
                    break
    return pairing


def _ungrounded_pair_reason(
    a: VgAmr,
    va: str,
    b: VgAmr,
    vb: str,
    paired_a: Dict[str, str],
    paired_b: Dict[str, str],
    params: MergeParams,
    embeddings: EmbeddingStore,
) -> Optional[str]:
    ga, gb = a.graph, b.graph
    ca, cb = ga.nodes[va], gb.nodes[vb]

    # Non-root AND/OR: neighbor sets must correspond under existing pairs.
    if ca in AND_OR_CONCEPTS and ca == cb:
        image = {paired_a[n] for n in _undirected_neighbors(ga, va) if n in paired_a}
        paired_nbrs_b = {n for n in _undirected_neighbors(gb, vb) if n in paired_b}
        if image and image == paired_nbrs_b:
            return "and-or"
        return None

    pred_a, pred_b = ga.is_predicate(va), gb.is_predicate(vb)
    if pred_a and pred_b:
        kids_a = _arg_children(ga, va)
        kids_b = _arg_children(gb, vb)
        if not kids_a or not kids_b:
            return None
        if any(c not in paired_a for _, c in kids_a):
            return None
        if any(c not in paired_b for _, c in kids_b):
            return None
        if {(r, paired_a[c]) for r, c in kids_a} != kids_b:
            return None
        if _label_similarity(a, va, b, vb, embeddings) >= params.predicate_threshold:
            return "predicate-children"
        return None

    if pred_a or pred_b:
        return None

    # Modifier/noun nodes: synonym labels plus a shared paired parent with the
    # same connecting role.
    if _label_similarity(a, va, b, vb, embeddings) < params.synonym_threshold:
        return None
    parents_a = {(e.role, e.source) for e in ga.incoming(va)}
    parents_b = {(e.role, e.source) for e in gb.incoming(vb)}
    for role, pa in parents_a:
        if pa in paired_a and (role, paired_a[pa]) in parents_b:
            return "label-neighborhood"
    return None


def _dedup_keep_order(items) -> Tuple[str, ...]:
    seen = set()
    out = []
    for x in items:
        if x not in seen:
            seen.add(x)
            out.append(x)
    return tuple(out)


def merge_pair(a: VgAmr, b: VgAmr, pairing: NodePairing) -> VgAmr:
    """Unify paired nodes and union everything else, re-lettered as z<n>.

    With no pairs at all, a fresh multi-sentence root adopts both old roots
    as :snt1/:snt2 children.
    """
    pair_ab = pairing.a_to_b()
    pair_ba = {vb: va for va, vb in pair_ab.items()}
    counter = 0

    def fresh() -> str:
        nonlocal counter
        name = f"z{counter}"
        counter += 1
        return name

    name_a: Dict[str, str] = {}
    name_b: Dict[str, str] = {}
    nodes: Dict[str, str] = {}
    synonyms: Dict[str, Tuple[str, ...]] = {}
    grounding: Dict[str, FrozenSet[Box]] = {}
    edges: List[Edge] = []
    attributes = []

    multi_root = None
    if not pairing.pairs:
        multi_root = fresh()
        nodes[multi_root] = MULTI_SENTENCE
        synonyms[multi_root] = (MULTI_SENTENCE,)

    for va in sorted(a.graph.nodes):
        nv = fresh()
        name_a[va] = nv
        nodes[nv] = a.graph.nodes[va]
        if va in pair_ab:
            vb = pair_ab[va]
            name_b[vb] = nv
            synonyms[nv] = _dedup_keep_order(a.labels(va) + b.labels(vb))
            boxes = a.grounding.get(va, frozenset()) | b.grounding.get(vb, frozenset())
            if boxes:
                grounding[nv] = boxes
        else:
            synonyms[nv] = a.labels(va)
            if va in a.grounding:
                grounding[nv] = a.grounding[va]

    for vb in sorted(b.graph.nodes):
        if vb in name_b:
            continue
        nv = fresh()
        name_b[vb] = nv
        nodes[nv] = b.graph.nodes[vb]
        synonyms[nv] = b.labels(vb)
        if vb in b.grounding:
            grounding[nv] = b.grounding[vb]

    seen_edges = set()
    for g, names in ((a.graph, name_a), (b.graph, name_b)):
        for e in g.edges:
            key = (names[e.source], e.role, names[e.target])
            if key not in seen_edges:
                seen_edges.add(key)
                edges.append(Edge(*key))
        for v, role, const in g.attributes:
            attr = (names[v], role, const)
            if attr not in attributes:
                attributes.append(attr)

    if multi_root is not None:
        edges.append(Edge(multi_root, ":snt1", name_a[a.graph.root]))
        edges.append(Edge(multi_root, ":snt2", name_b[b.graph.root]))
        root = multi_root
    else:
        root = name_a[a.graph.root]

    return VgAmr(AmrGraph(root, nodes, edges, attributes), grounding, synonyms)


def build_meta_vgamr(
    vgamrs: List[VgAmr],
    params: MergeParams,
    embeddings: EmbeddingStore,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
) -> VgAmr:
    """Fold pairwise merges over the clustering order; N-1 merges total."""
    if not vgamrs:
        raise ValueError("need at least one vgAMR")
    if len(vgamrs) == 1:
        return vgamrs[0]
    D = distance_matrix([v.graph for v in vgamrs], restarts=restarts, seed=seed)
    tree = upgma_order(D)
    clusters: Dict[Tuple[int, ...], VgAmr] = {(i,): v for i, v in enumerate(vgamrs)}
    for step in tree.steps:
        left = clusters.pop(step.left)
        right = clusters.pop(step.right)
        pairing = find_common_nodes(left, right, params, embeddings)
        clusters[tuple(sorted(step.left + step.right))] = merge_pair(left, right, pairing)
    (result,) = clusters.values()
    return result
