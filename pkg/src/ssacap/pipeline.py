"""End-to-end orchestration: ground, merge, sample, realize, filter, mix, eval.

Every stage writes an independently consumable JSONL/JSON artifact with a
provenance header (config hash + seed); per-image seeds derive from the
global seed and the image id, so outputs are stable under input reordering.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from . import augment, metrics
from .amr import parse_penman, serialize_penman
from .augment import ControlCaptionPair, ControlSignal, MixSpec
from .bridge_client import generator_from_spec, scorer_from_spec
from .embeddings import load_embeddings
from .grounding import Box, GroundedCaptionRecord, VgAmr, build_vgamr, read_records
from .jsonl import write_jsonl
from .merge import MergeParams, build_meta_vgamr
from .metrics import LexiconNounExtractor, evaluate_pairs
from .sampler import SampledSubgraph, sample_event_subgraphs


class StageError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


@dataclass
class PipelineConfig:
    records: str
    embeddings: str
    nouns: str
    outdir: str
    synonym_threshold: float = 0.7
    predicate_threshold: float = 0.5
    restarts: int = 4
    seed: int = 0
    gruen_threshold: float = 0.7
    mix_strategy: str = "random"
    mix_p: float = 100.0
    mix_bins: int = 10
    generator: str = "stub"
    scorer: str = "const:1.0"
    bands: int = 10

    def __post_init__(self):
        if not 0 <= self.gruen_threshold <= 1:
            raise ValueError(f"gruen threshold must be in [0,1], got {self.gruen_threshold}")

    def validate_paths(self) -> None:
        for name in ("records", "embeddings", "nouns"):
            path = Path(getattr(self, name))
            if not path.exists():
                raise StageError("config", f"{name} path {path} does not exist")

    def config_hash(self) -> str:
        # Output location is not part of run identity.
        fields = {k: v for k, v in dataclasses.asdict(self).items() if k != "outdir"}
        payload = json.dumps(fields, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def provenance(self) -> dict:
        return {"config_hash": self.config_hash(), "seed": self.seed}


def image_seed(seed: int, image_id: str) -> int:
    digest = hashlib.blake2b(f"{seed}:{image_id}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


# -- (de)serialization of vgAMRs ---------------------------------------------


def vgamr_to_row(image_id: str, v: VgAmr) -> dict:
    return {
        "image_id": image_id,
        "penman": serialize_penman(v.graph),
        "grounding": {var: sorted(b.as_list() for b in boxes) for var, boxes in v.grounding.items()},
        "synonyms": {var: list(syns) for var, syns in v.synonyms.items()},
    }


def row_to_vgamr(row: dict) -> VgAmr:
    graph = parse_penman(row["penman"])
    return VgAmr(
        graph,
        {var: frozenset(Box(*b) for b in boxes) for var, boxes in row["grounding"].items()},
        {var: tuple(syns) for var, syns in row["synonyms"].items()},
    )


def sample_to_row(image_id: str, s: SampledSubgraph, width: int, height: int) -> dict:
    row = vgamr_to_row(image_id, s.graph)
    row.update(
        {
            "origin_predicate": s.origin_predicate,
            "kind": s.kind,
            "image_width": width,
            "image_height": height,
        }
    )
    return row


def row_to_sample(row: dict) -> SampledSubgraph:
    return SampledSubgraph(
        row_to_vgamr(row),
        row["origin_predicate"],
        row["kind"],
        row.get("source_variable", row["origin_predicate"]),
    )


# -- stages -------------------------------------------------------------------


def group_by_image(records: List[GroundedCaptionRecord]) -> Dict[str, List[GroundedCaptionRecord]]:
    grouped: Dict[str, List[GroundedCaptionRecord]] = {}
    for record in records:
        grouped.setdefault(record.image_id, []).append(record)
    return {k: sorted(v, key=lambda r: r.caption_id) for k, v in sorted(grouped.items())}


def merge_stage(config: PipelineConfig) -> List[dict]:
    records = read_records(config.records)
    store = load_embeddings(config.embeddings)
    params = MergeParams(config.synonym_threshold, config.predicate_threshold)
    rows = []
    for image_id, group in group_by_image(records).items():
        vgamrs = [build_vgamr(r) for r in group]
        meta = build_meta_vgamr(
            vgamrs, params, store,
            restarts=config.restarts,
            seed=image_seed(config.seed, image_id),
        )
        rows.append(vgamr_to_row(image_id, meta))
    return rows


def sample_stage(config: PipelineConfig, meta_rows: List[dict]) -> List[dict]:
    records = read_records(config.records)
    dims = {r.image_id: (r.image_width, r.image_height) for r in records}
    rows = []
    for meta_row in meta_rows:
        image_id = meta_row["image_id"]
        meta = row_to_vgamr(meta_row)
        width, height = dims[image_id]
        for sample in sample_event_subgraphs(meta, seed=image_seed(config.seed, image_id)):
            rows.append(sample_to_row(image_id, sample, width, height))
    return rows


def augment_stage(config: PipelineConfig, sample_rows: List[dict]) -> Tuple[List[dict], List[dict]]:
    """Realize, extract controls, score and filter. Returns (kept, dropped)."""
    generator, close_gen = generator_from_spec(config.generator)
    scorer, close_scorer = scorer_from_spec(config.scorer)
    try:
        pairs = []
        for row in sample_rows:
            sample = row_to_sample(row)
            caption = augment.realize_caption(sample, generator)
            try:
                control = augment.extract_control(sample, row["image_width"], row["image_height"])
            except augment.NoGroundedNodesError:
                continue
            control = control.with_length(augment.word_count(caption))
            pairs.append(ControlCaptionPair(row["image_id"], caption, control, "ssa"))
        kept, dropped = augment.filter_by_quality(pairs, scorer, config.gruen_threshold)
    finally:
        close_gen()
        close_scorer()
    return [p.to_dict() for p in kept], [p.to_dict() for p in dropped]


def original_pairs(records: List[GroundedCaptionRecord]) -> List[ControlCaptionPair]:
    """Control--caption pairs for the human captions: all grounded boxes, the
    head token of each grounded span as its entity label."""
    pairs = []
    for record in records:
        boxes = set()
        labels: List[str] = []
        for entry in record.groundings:
            boxes.update(entry.boxes)
            head = record.tokens[entry.token_span[1] - 1].lower()
            if head not in labels:
                labels.append(head)
        boxes_sorted = tuple(sorted(boxes))
        coverage = augment.compute_coverage(boxes_sorted, record.image_width, record.image_height)
        control = ControlSignal(boxes_sorted, tuple(labels), coverage)
        count = augment.word_count(record.caption)
        if count >= 1:
            control = control.with_length(count)
        pairs.append(ControlCaptionPair(record.image_id, record.caption, control, "original"))
    return pairs


def mix_stage(config: PipelineConfig, original_rows: List[dict], ssa_rows: List[dict]) -> List[dict]:
    spec = MixSpec(config.mix_strategy, config.mix_p, config.mix_bins, config.seed)
    mixed = augment.mix_datasets(
        [ControlCaptionPair.from_dict(r) for r in original_rows],
        [ControlCaptionPair.from_dict(r) for r in ssa_rows],
        spec,
    )
    return [p.to_dict() for p in mixed]


def eval_stage(config: PipelineConfig, pair_rows: List[dict]) -> dict:
    store = load_embeddings(config.embeddings)
    extractor = LexiconNounExtractor.from_file(config.nouns)
    pairs = [ControlCaptionPair.from_dict(r) for r in pair_rows]
    report = evaluate_pairs(pairs, store, extractor, bands=config.bands)
    return report.to_dict()


def run_pipeline(config: PipelineConfig) -> Dict[str, Path]:
    """Run all stages, writing artifacts under ``config.outdir``."""
    config.validate_paths()
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    prov = config.provenance()
    artifacts: Dict[str, Path] = {}

    def emit(name: str, rows: List[dict]) -> Path:
        path = outdir / name
        write_jsonl(path, rows, provenance=prov)
        artifacts[name] = path
        return path

    try:
        meta_rows = merge_stage(config)
    except Exception as e:
        raise StageError("merge", str(e)) from e
    emit("meta.jsonl", meta_rows)

    try:
        sample_rows = sample_stage(config, meta_rows)
    except Exception as e:
        raise StageError("sample", str(e)) from e
    emit("samples.jsonl", sample_rows)

    try:
        kept_rows, dropped_rows = augment_stage(config, sample_rows)
    except Exception as e:
        raise StageError("augment", str(e)) from e
    emit("pairs.jsonl", kept_rows)
    emit("dropped.jsonl", dropped_rows)

    try:
        originals = [p.to_dict() for p in original_pairs(read_records(config.records))]
        mixed_rows = mix_stage(config, originals, kept_rows)
    except Exception as e:
        raise StageError("mix", str(e)) from e
    emit("original.jsonl", originals)
    emit("mixed.jsonl", mixed_rows)

    try:
        report = eval_stage(config, kept_rows if kept_rows else originals)
    except Exception as e:
        raise StageError("eval", str(e)) from e
    report_path = outdir / "report.json"
    with open(report_path, "w") as f:
        json.dump({"provenance": prov, **report}, f, indent=2, sort_keys=True)
        f.write("\n")
    artifacts["report.json"] = report_path
    return artifacts


# -- report rendering ----------------------------------------------------------


def _fmt(value: Optional[float], scale: float = 100.0) -> str:
    return "-" if value is None else f"{value * scale:.1f}"


def render_report(report: dict) -> Tuple[str, str]:
    """(text table, per-band CSV) from a report.json payload."""
    for key in ("iou", "hal", "d1", "d2", "coverage_bands"):
        if key not in report:
            raise StageError("report", f"missing key {key!r}")
    lines = ["metric    value", "------    -----"]
    rows = [
        ("IoU", _fmt(report["iou"])),
        ("Hal", _fmt(report["hal"])),
        ("G", _fmt(report.get("gruen"))),
        ("sC", _fmt(report.get("self_cider"))),
        ("D-1", _fmt(report["d1"])),
        ("D-2", _fmt(report["d2"])),
        ("L", "-" if report.get("length_mae") is None else f"{report['length_mae']:.2f}"),
        ("LP", "-" if report.get("length_precision") is None else f"{report['length_precision']:.1f}"),
        ("H", _fmt(report.get("harmonic"))),
    ]
    for name, value in rows:
        lines.append(f"{name:<10}{value}")
    table = "\n".join(lines) + "\n"

    csv_lines = ["band_low,band_high,mean_iou,mean_hal,sample_percentage"]
    for band in report["coverage_bands"]:
        csv_lines.append(
            f"{band['low']:.1f},{band['high']:.1f},"
            f"{_fmt(band['mean_iou'])},{_fmt(band['mean_hal'])},"
            f"{band['sample_percentage']:.1f}"
        )
    return table, "\n".join(csv_lines) + "\n"
