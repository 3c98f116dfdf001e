"""Turn sampled subgraphs into control--caption pairs and mix datasets.

Covers caption realization (deterministic stub or external generator),
quality filtering, control-signal extraction, exact box-union coverage,
length levels, and the two original/augmented mixing strategies.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .amr import AmrGraph, strip_sense
from .grounding import Box
from .sampler import SampledSubgraph

DEFAULT_QUALITY_THRESHOLD = 0.7

LENGTH_LEVELS = (("A", 1, 9), ("B", 10, 19), ("C", 20, 29), ("D", 30, 39), ("E", 40, None))


class AugmentError(Exception):
    pass


class NoGroundedNodesError(AugmentError):
    """Sample has no visual anchor; it is discarded upstream."""


class EmptyOutputError(AugmentError):
    pass


class GeneratorUnavailableError(AugmentError):
    pass


class ScorerUnavailableError(AugmentError):
    pass


_PUNCT_ONLY = re.compile(r"^\W+$")


def word_count(text: str) -> int:
    """Whitespace tokens, punctuation-only tokens dropped."""
    return sum(1 for tok in text.split() if not _PUNCT_ONLY.match(tok))


def length_level(count: int) -> str:
    if count < 1:
        raise ValueError("word count must be >= 1")
    for name, lo, hi in LENGTH_LEVELS:
        if count >= lo and (hi is None or count <= hi):
            return name
    raise AssertionError("unreachable")


@dataclass
class ControlSignal:
    boxes: Tuple[Box, ...]
    entity_labels: Tuple[str, ...]
    coverage: float
    length_level: Optional[str] = None
    word_count_target: Optional[int] = None
    verbs: Optional[Tuple[str, ...]] = None

    def with_length(self, count: int) -> "ControlSignal":
        return ControlSignal(
            self.boxes, self.entity_labels, self.coverage,
            length_level(count), count, self.verbs,
        )

    def to_dict(self) -> dict:
        return {
            "boxes": [b.as_list() for b in self.boxes],
            "entity_labels": list(self.entity_labels),
            "coverage": self.coverage,
            "length_level": self.length_level,
            "word_count_target": self.word_count_target,
            "verbs": list(self.verbs) if self.verbs is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ControlSignal":
        return cls(
            boxes=tuple(Box(*b) for b in d["boxes"]),
            entity_labels=tuple(d["entity_labels"]),
            coverage=d["coverage"],
            length_level=d.get("length_level"),
            word_count_target=d.get("word_count_target"),
            verbs=tuple(d["verbs"]) if d.get("verbs") is not None else None,
        )


@dataclass
class ControlCaptionPair:
    image_id: str
    caption: str
    control: ControlSignal
    source: str  # original | ssa
    quality: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "caption": self.caption,
            "control": self.control.to_dict(),
            "source": self.source,
            "quality": self.quality,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ControlCaptionPair":
        return cls(
            image_id=d["image_id"],
            caption=d["caption"],
            control=ControlSignal.from_dict(d["control"]),
            source=d["source"],
            quality=d.get("quality"),
        )


# -- caption realization -----------------------------------------------------


def stub_realize(graph: AmrGraph) -> str:
    """Deterministic template realization for tests and offline runs.

    Depth-first from the root; :ARG0/:ARG1 subtrees are emitted before their
    head (subject/patient first), everything else after, with sense suffixes
    stripped.
    """

    def emit(var: str, visited: Set[str]) -> List[str]:
        visited.add(var)
        children = sorted((e.role, e.target) for e in graph.outgoing(var))
        before, after = [], []
        for role, child in children:
            if child in visited:
                continue
            bucket = before if role in (":ARG0", ":ARG1") else after
            bucket.extend(emit(child, visited))
        return before + [strip_sense(graph.nodes[var])] + after

    words = emit(graph.root, set())
    return " ".join(words)


TextGenerator = Callable[[str], str]
QualityScorer = Callable[[str], float]


def realize_caption(sample: SampledSubgraph, generator: Optional[TextGenerator] = None) -> str:
    """Realize a sample as text; `generator` takes a PENMAN string."""
    if generator is None:
        text = stub_realize(sample.graph.graph)
    else:
        from .amr import serialize_penman

        text = generator(serialize_penman(sample.graph.graph))
    if not text or not text.strip():
        raise EmptyOutputError(f"empty caption for sample rooted at {sample.origin_predicate}")
    return text.strip()


def filter_by_quality(
    pairs: Sequence[ControlCaptionPair],
    scorer: QualityScorer,
    threshold: float = DEFAULT_QUALITY_THRESHOLD,
) -> Tuple[List[ControlCaptionPair], List[ControlCaptionPair]]:
    """Partition into (kept, dropped) around the quality threshold."""
    if not 0 <= threshold <= 1:
        raise ValueError(f"threshold must be in [0,1], got {threshold}")
    kept, dropped = [], []
    for pair in pairs:
        score = scorer(pair.caption)
        scored = ControlCaptionPair(pair.image_id, pair.caption, pair.control, pair.source, score)
        (kept if score >= threshold else dropped).append(scored)
    return kept, dropped


# -- control signals ---------------------------------------------------------


def compute_coverage(boxes: Iterable[Box], width: float, height: float) -> float:
    """Exact union area of the boxes over the image area.

    Coordinate-compression sweep: the union is summed over the grid cells
    induced by all distinct box coordinates.
    """
    if width <= 0 or height <= 0:
        raise ValueError("image dimensions must be positive")
    boxes = list(boxes)
    if not boxes:
        return 0.0
    xs = sorted({b.x1 for b in boxes} | {b.x2 for b in boxes})
    ys = sorted({b.y1 for b in boxes} | {b.y2 for b in boxes})
    area = 0.0
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            cx, cy = xs[i], ys[j]
            if any(b.x1 <= cx < b.x2 and b.y1 <= cy < b.y2 for b in boxes):
                area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j])
    return area / (width * height)


def extract_verbs(sample: SampledSubgraph) -> Tuple[str, ...]:
    """Predicate labels of the sample, sense suffixes stripped."""
    g = sample.graph.graph
    verbs = []
    for v in sorted(g.nodes):
        if g.is_predicate(v):
            verbs.append(strip_sense(g.nodes[v]))
    seen: Set[str] = set()
    out = []
    for w in verbs:
        if w not in seen:
            seen.add(w)
            out.append(w)
    return tuple(out)


def extract_control(
    sample: SampledSubgraph,
    image_width: float,
    image_height: float,
    include_verbs: bool = True,
) -> ControlSignal:
    """Boxes and labels of the sample's grounded nodes; raises if there are
    none (the sample has no visual anchor)."""
    grounded = sorted(sample.graph.grounding)
    if not grounded:
        raise NoGroundedNodesError(
            f"sample rooted at {sample.origin_predicate} has no grounded node"
        )
    boxes: Set[Box] = set()
    labels: List[str] = []
    for v in grounded:
        boxes |= sample.graph.grounding[v]
        label = sample.graph.synonyms[v][0]
        if label not in labels:
            labels.append(label)
    boxes_sorted = tuple(sorted(boxes))
    return ControlSignal(
        boxes=boxes_sorted,
        entity_labels=tuple(labels),
        coverage=compute_coverage(boxes_sorted, image_width, image_height),
        verbs=extract_verbs(sample) if include_verbs else None,
    )


# -- mixing ------------------------------------------------------------------


@dataclass
class MixSpec:
    strategy: str  # random | uniform-coverage
    p: float = 100.0  # percentage, random strategy only
    bins: int = 10  # uniform-coverage strategy only
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in ("random", "uniform-coverage"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.strategy == "random" and not (0 <= self.p <= 100):
            raise ValueError(f"p must be in [0,100], got {self.p}")
        if self.strategy == "uniform-coverage" and self.bins < 1:
            raise ValueError("bins must be >= 1")


def _coverage_bin(coverage: float, bins: int) -> int:
    return min(int(coverage * bins), bins - 1)


def mix_datasets(
    original: Sequence[ControlCaptionPair],
    ssa: Sequence[ControlCaptionPair],
    spec: MixSpec,
) -> List[ControlCaptionPair]:
    """All originals, plus augmented pairs chosen by the mixing strategy.

    random: a seeded uniform sample of floor(p * len(ssa) / 100) pairs.
    uniform-coverage: greedy fill of under-populated coverage bins, always
    adding to the lowest-count bin that still has candidates, for as long as
    each addition strictly reduces the variance of per-bin counts.
    """
    rng = random.Random(spec.seed)
    out = list(original)
    if spec.strategy == "random":
        k = int(spec.p * len(ssa) / 100)
        out.extend(rng.sample(list(ssa), k))
        return out

    counts = [0] * spec.bins
    for pair in original:
        counts[_coverage_bin(pair.control.coverage, spec.bins)] += 1
    available: Dict[int, List[ControlCaptionPair]] = {i: [] for i in range(spec.bins)}
    for pair in ssa:
        available[_coverage_bin(pair.control.coverage, spec.bins)].append(pair)
    for candidates in available.values():
        rng.shuffle(candidates)
    while True:
        fillable = [i for i in range(spec.bins) if available[i]]
        if not fillable:
            break
        i = min(fillable, key=lambda b: (counts[b], b))
        # Adding one pair to bin i changes the count variance by
        # (2*(c_i - mean) + 1 - 1/B) / B; proceed only while that is < 0.
        mean = sum(counts) / spec.bins
        if counts[i] >= mean - (1 - 1 / spec.bins) / 2:
            break
        out.append(available[i].pop())
        counts[i] += 1
    return out
