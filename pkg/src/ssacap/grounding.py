"""Join caption-word/AMR-node alignments with word/bounding-box annotations.

The output of :func:`build_vgamr` is a visually grounded AMR: the caption's
AMR graph plus a map from node variables to the image boxes they describe.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Tuple

from .amr import AmrGraph, parse_penman


class GroundingError(Exception):
    pass


class SpanOutOfRangeError(GroundingError):
    pass


@dataclass(frozen=True, order=True)
class Box:
    """Axis-aligned box, corner convention, pixel units."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise GroundingError(f"degenerate box {self}")

    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    def as_list(self) -> List[float]:
        return [self.x1, self.y1, self.x2, self.y2]


Span = Tuple[int, int]  # half-open token indices


@dataclass
class GroundingEntry:
    token_span: Span
    entity_id: str
    boxes: List[Box]


@dataclass
class GroundedCaptionRecord:
    image_id: str
    image_width: int
    image_height: int
    caption_id: str
    tokens: List[str]
    groundings: List[GroundingEntry]
    amr: str
    alignments: List[Tuple[str, Span]]  # (variable, token_span)

    def validate(self) -> None:
        spans = [g.token_span for g in self.groundings] + [s for _, s in self.alignments]
        for start, end in spans:
            if not (0 <= start < end <= len(self.tokens)):
                raise SpanOutOfRangeError(
                    f"span [{start},{end}) outside [0,{len(self.tokens)}) "
                    f"in caption {self.caption_id}"
                )
        for g in self.groundings:
            for b in g.boxes:
                if not (0 <= b.x1 and b.x2 <= self.image_width and 0 <= b.y1 and b.y2 <= self.image_height):
                    raise GroundingError(f"box {b} outside image {self.image_id}")

    @property
    def caption(self) -> str:
        return " ".join(self.tokens)

    @classmethod
    def from_json(cls, line: str) -> "GroundedCaptionRecord":
        d = json.loads(line)
        return cls(
            image_id=d["image_id"],
            image_width=d["image_width"],
            image_height=d["image_height"],
            caption_id=d["caption_id"],
            tokens=list(d["tokens"]),
            groundings=[
                GroundingEntry(
                    token_span=tuple(g["token_span"]),
                    entity_id=g["entity_id"],
                    boxes=[Box(*b) for b in g["boxes"]],
                )
                for g in d["groundings"]
            ],
            amr=d["amr"],
            alignments=[(a["variable"], tuple(a["token_span"])) for a in d["alignments"]],
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "image_id": self.image_id,
                "image_width": self.image_width,
                "image_height": self.image_height,
                "caption_id": self.caption_id,
                "tokens": self.tokens,
                "groundings": [
                    {
                        "token_span": list(g.token_span),
                        "entity_id": g.entity_id,
                        "boxes": [b.as_list() for b in g.boxes],
                    }
                    for g in self.groundings
                ],
                "amr": self.amr,
                "alignments": [
                    {"variable": v, "token_span": list(s)} for v, s in self.alignments
                ],
            },
            sort_keys=True,
        )


@dataclass
class VgAmr:
    """AMR graph plus per-node box sets and synonym label lists.

    ``synonyms[v][0]`` is the canonical label and always equals the graph
    concept for ``v``.
    """

    graph: AmrGraph
    grounding: Dict[str, FrozenSet[Box]] = field(default_factory=dict)
    synonyms: Dict[str, Tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        for v, boxes in self.grounding.items():
            if v not in self.graph.nodes:
                raise GroundingError(f"grounded variable {v!r} not in graph")
            if not boxes:
                raise GroundingError(f"grounded variable {v!r} has empty box set")
        for v in self.graph.nodes:
            self.synonyms.setdefault(v, (self.graph.nodes[v],))
        for v, syns in self.synonyms.items():
            if syns[0] != self.graph.nodes[v]:
                raise GroundingError(
                    f"canonical synonym {syns[0]!r} != concept {self.graph.nodes[v]!r} for {v!r}"
                )

    def labels(self, variable: str) -> Tuple[str, ...]:
        return self.synonyms[variable]

    def is_grounded(self, variable: str) -> bool:
        return variable in self.grounding


def spans_overlap(a: Span, b: Span) -> bool:
    return a[0] < b[1] and b[0] < a[1]


def build_vgamr(record: GroundedCaptionRecord) -> VgAmr:
    """Ground AMR nodes by span-overlap join of alignments and groundings.

    A node gets a box exactly when one of its aligned token spans overlaps a
    grounding span carrying that box.  Identical-coordinate boxes collapse.
    """
    record.validate()
    graph = parse_penman(record.amr)
    grounding: Dict[str, set] = {}
    for variable, align_span in record.alignments:
        if variable not in graph.nodes:
            raise GroundingError(
                f"alignment references unknown variable {variable!r} in {record.caption_id}"
            )
        for entry in record.groundings:
            if spans_overlap(align_span, entry.token_span):
                grounding.setdefault(variable, set()).update(entry.boxes)
    return VgAmr(
        graph=graph,
        grounding={v: frozenset(bs) for v, bs in grounding.items() if bs},
    )


def read_records(path) -> List[GroundedCaptionRecord]:
    from .jsonl import read_jsonl

    _, rows = read_jsonl(path)
    return [GroundedCaptionRecord.from_json(json.dumps(row)) for row in rows]
