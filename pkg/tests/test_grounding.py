import json

import pytest

from ssacap.grounding import (
    Box,
    GroundedCaptionRecord,
    GroundingError,
    SpanOutOfRangeError,
    VgAmr,
    build_vgamr,
    spans_overlap,
)
from ssacap.amr import parse_penman


def make_record(**overrides):
    base = {
        "image_id": "img",
        "image_width": 100,
        "image_height": 100,
        "caption_id": "c1",
        "tokens": ["a", "dog", "runs"],
        "groundings": [
            {"token_span": [0, 2], "entity_id": "e1", "boxes": [[10, 10, 50, 50]]}
        ],
        "amr": "(r / run-01 :ARG0 (d / dog))",
        "alignments": [
            {"variable": "r", "token_span": [2, 3]},
            {"variable": "d", "token_span": [1, 2]},
        ],
    }
    base.update(overrides)
    return GroundedCaptionRecord.from_json(json.dumps(base))


def test_box_validation():
    with pytest.raises(GroundingError):
        Box(10, 10, 10, 50)
    with pytest.raises(GroundingError):
        Box(0, 50, 10, 40)
    assert Box(0, 0, 4, 5).area() == 20


def test_spans_overlap():
    assert spans_overlap((0, 2), (1, 3))
    assert not spans_overlap((0, 2), (2, 4))
    assert spans_overlap((1, 2), (0, 5))


def test_record_roundtrip():
    rec = make_record()
    again = GroundedCaptionRecord.from_json(rec.to_json())
    assert again.to_json() == rec.to_json()
    assert again.caption == "a dog runs"


def test_record_validate_span_range():
    rec = make_record(alignments=[{"variable": "d", "token_span": [1, 9]}])
    with pytest.raises(SpanOutOfRangeError):
        rec.validate()


def test_record_validate_box_inside_image():
    rec = make_record(
        groundings=[{"token_span": [0, 2], "entity_id": "e1", "boxes": [[10, 10, 150, 50]]}]
    )
    with pytest.raises(GroundingError):
        rec.validate()


def test_build_vgamr_overlap_join():
    vg = build_vgamr(make_record())
    assert vg.is_grounded("d")
    assert not vg.is_grounded("r")
    assert vg.grounding["d"] == frozenset({Box(10, 10, 50, 50)})
    assert vg.labels("d") == ("dog",)


def test_build_vgamr_unions_boxes_and_dedups():
    rec = make_record(
        groundings=[
            {"token_span": [0, 2], "entity_id": "e1", "boxes": [[10, 10, 50, 50]]},
            {"token_span": [1, 3], "entity_id": "e2", "boxes": [[10, 10, 50, 50], [60, 60, 80, 80]]},
        ]
    )
    vg = build_vgamr(rec)
    assert vg.grounding["d"] == frozenset({Box(10, 10, 50, 50), Box(60, 60, 80, 80)})


def test_build_vgamr_unknown_variable():
    rec = make_record(alignments=[{"variable": "zz", "token_span": [0, 1]}])
    with pytest.raises(GroundingError):
        build_vgamr(rec)


def test_vgamr_invariants():
    g = parse_penman("(d / dog)")
    with pytest.raises(GroundingError):
        VgAmr(g, {"zz": frozenset({Box(0, 0, 1, 1)})})
    with pytest.raises(GroundingError):
        VgAmr(g, {}, {"d": ("hound", "dog")})  # canonical label must come first
    vg = VgAmr(g)
    assert vg.labels("d") == ("dog",)


def test_fixture_records_load(fixture_records):
    assert len(fixture_records) == 8
    images = {r.image_id for r in fixture_records}
    assert images == {"img1", "img2", "img3"}
    for rec in fixture_records:
        rec.validate()
        build_vgamr(rec)
