import random

import pytest

from ssacap.amr import parse_penman
from ssacap.augment import (
    ControlCaptionPair,
    ControlSignal,
    MixSpec,
    NoGroundedNodesError,
    compute_coverage,
    extract_control,
    extract_verbs,
    filter_by_quality,
    length_level,
    mix_datasets,
    realize_caption,
    stub_realize,
    word_count,
)
from ssacap.grounding import Box, VgAmr
from ssacap.sampler import SampledSubgraph


def make_sample(penman: str, grounding=None) -> SampledSubgraph:
    g = parse_penman(penman)
    grounding = {
        v: frozenset(Box(*b) for b in boxes) for v, boxes in (grounding or {}).items()
    }
    return SampledSubgraph(VgAmr(g, grounding), g.root, "argument-closure", g.root)


# -- word count and length levels ---------------------------------------------


def test_word_count_ignores_punctuation_tokens():
    assert word_count("a boat , tied to the dock .") == 6
    assert word_count("hello") == 1
    assert word_count("one-word hyphen counts") == 3


@pytest.mark.parametrize(
    "count,level",
    [(1, "A"), (9, "A"), (10, "B"), (19, "B"), (20, "C"), (29, "C"), (30, "D"), (39, "D"), (40, "E"), (400, "E")],
)
def test_length_level_boundaries(count, level):
    assert length_level(count) == level


def test_length_level_rejects_zero():
    with pytest.raises(ValueError):
        length_level(0)


# -- realization ----------------------------------------------------------------


def test_stub_realize_hand_case():
    g = parse_penman("(z0 / sit-01 :ARG1 (z1 / boat))")
    assert stub_realize(g) == "boat sit"


def test_stub_realize_order():
    g = parse_penman("(s / see-01 :ARG0 (m / man) :ARG1 (d / dog) :location (p / park))")
    assert stub_realize(g) == "man dog see park"


def test_realize_caption_stub_and_generator():
    sample = make_sample("(z0 / sit-01 :ARG1 (z1 / boat))")
    assert realize_caption(sample) == "boat sit"
    assert realize_caption(sample, lambda penman: "custom text") == "custom text"
    captured = []
    realize_caption(sample, lambda penman: captured.append(penman) or "x")
    assert captured == ["(z0 / sit-01 :ARG1 (z1 / boat))"]


def test_realize_caption_rejects_empty():
    from ssacap.augment import EmptyOutputError

    sample = make_sample("(z0 / sit-01 :ARG1 (z1 / boat))")
    with pytest.raises(EmptyOutputError):
        realize_caption(sample, lambda penman: "   ")


# -- quality filtering ----------------------------------------------------------


def make_pair(caption: str, coverage: float = 0.5, source: str = "ssa") -> ControlCaptionPair:
    control = ControlSignal((Box(0, 0, 1, 1),), ("thing",), coverage)
    return ControlCaptionPair("img", caption, control, source)


def test_filter_by_quality_partition():
    pairs = [make_pair(c) for c in ["a", "b", "c", "d"]]
    scores = {"a": 0.69, "b": 0.7, "c": 0.71, "d": 0.0}
    kept, dropped = filter_by_quality(pairs, lambda c: scores[c], threshold=0.7)
    assert [p.caption for p in kept] == ["b", "c"]  # >= threshold stays
    assert [p.caption for p in dropped] == ["a", "d"]
    assert all(p.quality == scores[p.caption] for p in kept + dropped)
    assert len(kept) + len(dropped) == len(pairs)


def test_filter_threshold_validated():
    with pytest.raises(ValueError):
        filter_by_quality([], lambda c: 1.0, threshold=1.5)


# -- coverage -------------------------------------------------------------------


def pixel_grid_coverage(boxes, width, height):
    """Brute-force oracle: count covered integer cells."""
    covered = 0
    for x in range(int(width)):
        for y in range(int(height)):
            if any(b.x1 <= x < b.x2 and b.y1 <= y < b.y2 for b in boxes):
                covered += 1
    return covered / (width * height)


def test_coverage_hand_case():
    boxes = [Box(0, 0, 60, 60), Box(30, 30, 90, 90)]
    assert compute_coverage(boxes, 100, 100) == pytest.approx(0.63)


def test_coverage_empty():
    assert compute_coverage([], 100, 100) == 0.0


def test_coverage_disjoint_and_nested():
    assert compute_coverage([Box(0, 0, 10, 10), Box(20, 20, 30, 30)], 100, 100) == pytest.approx(0.02)
    assert compute_coverage([Box(0, 0, 50, 50), Box(10, 10, 20, 20)], 100, 100) == pytest.approx(0.25)


def test_coverage_matches_pixel_grid_oracle():
    rng = random.Random(3)
    for _ in range(30):
        boxes = []
        for _ in range(rng.randint(1, 5)):
            x1, y1 = rng.randint(0, 40), rng.randint(0, 40)
            boxes.append(Box(x1, y1, x1 + rng.randint(1, 20), y1 + rng.randint(1, 20)))
        exact = compute_coverage(boxes, 64, 64)
        oracle = pixel_grid_coverage(boxes, 64, 64)
        assert exact == pytest.approx(oracle, abs=1 / (64 * 64))


def test_coverage_rejects_bad_dimensions():
    with pytest.raises(ValueError):
        compute_coverage([], 0, 100)


# -- control extraction ----------------------------------------------------------


def test_extract_control():
    sample = make_sample(
        "(s / sit-01 :ARG1 (m / man) :location (b / boat))",
        {"m": [[0, 0, 10, 10]], "b": [[20, 20, 40, 40]]},
    )
    control = extract_control(sample, 100, 100)
    assert control.boxes == (Box(0, 0, 10, 10), Box(20, 20, 40, 40))
    assert control.entity_labels == ("boat", "man") or control.entity_labels == ("man", "boat")
    assert control.coverage == pytest.approx((100 + 400) / 10000)
    assert control.verbs == ("sit",)


def test_extract_control_requires_grounded_node():
    sample = make_sample("(s / sit-01 :ARG1 (m / man))")
    with pytest.raises(NoGroundedNodesError):
        extract_control(sample, 100, 100)


def test_extract_verbs_dedup_and_strip():
    sample = make_sample("(s / see-01 :ARG1 (w / watch-01 :ARG0 (m / man)))")
    assert extract_verbs(sample) == ("see", "watch")


def test_control_with_length_roundtrip():
    control = ControlSignal((Box(0, 0, 1, 1),), ("dog",), 0.4).with_length(12)
    assert control.length_level == "B"
    assert control.word_count_target == 12
    again = ControlSignal.from_dict(control.to_dict())
    assert again == control


# -- mixing ----------------------------------------------------------------------


def test_mix_random_p0_is_original():
    original = [make_pair(f"o{i}", source="original") for i in range(5)]
    ssa = [make_pair(f"s{i}") for i in range(7)]
    out = mix_datasets(original, ssa, MixSpec("random", p=0))
    assert out == original


def test_mix_random_p100_is_union_size():
    original = [make_pair(f"o{i}", source="original") for i in range(5)]
    ssa = [make_pair(f"s{i}") for i in range(7)]
    out = mix_datasets(original, ssa, MixSpec("random", p=100))
    assert len(out) == 12
    assert out[:5] == original


def test_mix_random_fraction_floor_and_seeded():
    original = []
    ssa = [make_pair(f"s{i}") for i in range(7)]
    out1 = mix_datasets(original, ssa, MixSpec("random", p=50, seed=1))
    out2 = mix_datasets(original, ssa, MixSpec("random", p=50, seed=1))
    assert len(out1) == 3  # floor(0.5 * 7)
    assert out1 == out2


def bin_counts(pairs, bins=10):
    counts = [0] * bins
    for p in pairs:
        counts[min(int(p.control.coverage * bins), bins - 1)] += 1
    return counts


def variance(xs):
    mean = sum(xs) / len(xs)
    return sum((x - mean) ** 2 for x in xs) / len(xs)


def test_mix_uniform_coverage_flattens_bins():
    original = (
        [make_pair(f"o{i}", coverage=0.05, source="original") for i in range(6)]
        + [make_pair("o_mid", coverage=0.55, source="original")]
    )
    ssa = [make_pair(f"s{i}", coverage=0.05 + 0.1 * (i % 10)) for i in range(40)]
    out = mix_datasets(original, ssa, MixSpec("uniform-coverage", bins=10))
    before = bin_counts(original)
    after = bin_counts(out)
    assert variance(after) < variance(before)
    assert out[: len(original)] == original
    # Bins never overshoot the fullest original bin.
    assert max(after) == max(before)


def test_mix_uniform_coverage_stops_when_no_gain():
    # A single SSA candidate in an already-average bin is not added.
    original = [make_pair(f"o{i}", coverage=0.05 * (1 + i % 2), source="original") for i in range(4)]
    ssa = [make_pair("s0", coverage=0.05)]
    out = mix_datasets(original, ssa, MixSpec("uniform-coverage", bins=10))
    assert out == original


def test_mix_uniform_coverage_deterministic():
    original = [make_pair("o0", coverage=0.9, source="original") for _ in range(3)]
    ssa = [make_pair(f"s{i}", coverage=0.1 * (i % 5)) for i in range(20)]
    spec = MixSpec("uniform-coverage", bins=10, seed=7)
    assert mix_datasets(original, ssa, spec) == mix_datasets(original, ssa, spec)


def test_mix_spec_validation():
    with pytest.raises(ValueError):
        MixSpec("bogus")
    with pytest.raises(ValueError):
        MixSpec("random", p=101)
    with pytest.raises(ValueError):
        MixSpec("uniform-coverage", bins=0)
