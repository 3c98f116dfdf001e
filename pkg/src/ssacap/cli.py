"""Command-line interface for the augmentation pipeline and metric suite.

Exit codes: 0 ok, 2 configuration error, 3 data error, 4 external service
error.  Every config key can be overridden by a flag; endpoint selectors also
read SSA_-prefixed environment variables.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import click

from . import amr, augment, pipeline
from .amr import AmrError, read_penman_blocks
from .bridge_client import BridgeError
from .embeddings import EmbeddingError, load_embeddings
from .grounding import GroundingError, build_vgamr, read_records
from .jsonl import read_jsonl, write_jsonl
from .merge import MergeParams, build_meta_vgamr
from .metrics import LexiconNounExtractor, MetricError, evaluate_pairs
from .pipeline import PipelineConfig, StageError
from .sampler import sample_event_subgraphs
from .smatch import smatch_brute_force, smatch_score

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_EXTERNAL = 4


def _fail(code: int, message: str) -> None:
    click.echo(message, err=True)
    sys.exit(code)


@click.group(context_settings={"auto_envvar_prefix": "SSA"})
def main():
    """Grounded semantic-graph caption augmentation and evaluation."""


@main.command("parse")
@click.option("--input", "path", required=True, type=click.Path(exists=True))
def parse_cmd(path):
    """Parse a PENMAN file and echo its normalized serialization."""
    try:
        blocks = read_penman_blocks(Path(path).read_text())
    except AmrError as e:
        _fail(EXIT_DATA, f"parse: {e}")
    click.echo(amr.write_penman_blocks(blocks), nl=False)


@main.command("smatch")
@click.option("--a", "path_a", required=True, type=click.Path(exists=True))
@click.option("--b", "path_b", required=True, type=click.Path(exists=True))
@click.option("--restarts", default=4, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--brute-force", is_flag=True)
def smatch_cmd(path_a, path_b, restarts, seed, brute_force):
    """Score two single-graph PENMAN files."""
    try:
        graph_a = read_penman_blocks(Path(path_a).read_text())[0].graph
        graph_b = read_penman_blocks(Path(path_b).read_text())[0].graph
    except (AmrError, IndexError) as e:
        _fail(EXIT_DATA, f"smatch: {e}")
    if brute_force:
        result = smatch_brute_force(graph_a, graph_b)
    else:
        result = smatch_score(graph_a, graph_b, restarts=restarts, seed=seed)
    click.echo(f"P {result.precision:.4f}")
    click.echo(f"R {result.recall:.4f}")
    click.echo(f"F1 {result.f1:.4f}")


@main.command("ground")
@click.option("--input", "records_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def ground_cmd(records_path, out):
    """Build per-caption grounded graphs from a records JSONL file."""
    try:
        rows = []
        for record in read_records(records_path):
            vg = build_vgamr(record)
            row = pipeline.vgamr_to_row(record.image_id, vg)
            row["caption_id"] = record.caption_id
            rows.append(row)
    except (GroundingError, AmrError) as e:
        _fail(EXIT_DATA, f"ground: {e}")
    write_jsonl(out, rows)
    click.echo(f"wrote {len(rows)} vgAMRs to {out}")


@main.command("merge")
@click.option("--input", "records_path", required=True, type=click.Path(exists=True))
@click.option("--embeddings", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--syn-th", default=0.7, show_default=True)
@click.option("--pred-th", default=0.5, show_default=True)
@click.option("--restarts", default=4, show_default=True)
@click.option("--seed", default=0, show_default=True)
def merge_cmd(records_path, embeddings, out, syn_th, pred_th, restarts, seed):
    """Merge each image's grounded graphs into one meta graph."""
    try:
        store = load_embeddings(embeddings)
        params = MergeParams(syn_th, pred_th)
    except (EmbeddingError, ValueError) as e:
        _fail(EXIT_CONFIG, f"merge: {e}")
    try:
        rows = []
        for image_id, group in pipeline.group_by_image(read_records(records_path)).items():
            vgamrs = [build_vgamr(r) for r in group]
            meta = build_meta_vgamr(
                vgamrs, params, store, restarts=restarts,
                seed=pipeline.image_seed(seed, image_id),
            )
            rows.append(pipeline.vgamr_to_row(image_id, meta))
    except (GroundingError, AmrError) as e:
        _fail(EXIT_DATA, f"merge: {e}")
    write_jsonl(out, rows)
    click.echo(f"wrote {len(rows)} meta graphs to {out}")


@main.command("sample")
@click.option("--meta", "meta_path", required=True, type=click.Path(exists=True))
@click.option("--records", "records_path", required=True, type=click.Path(exists=True),
              help="Needed for image dimensions.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def sample_cmd(meta_path, records_path, seed, out):
    """Sample event-focused subgraphs from meta graphs."""
    try:
        _, meta_rows = read_jsonl(meta_path)
        dims = {r.image_id: (r.image_width, r.image_height) for r in read_records(records_path)}
        rows = []
        for meta_row in meta_rows:
            image_id = meta_row["image_id"]
            meta = pipeline.row_to_vgamr(meta_row)
            width, height = dims[image_id]
            for s in sample_event_subgraphs(meta, seed=pipeline.image_seed(seed, image_id)):
                rows.append(pipeline.sample_to_row(image_id, s, width, height))
    except (KeyError, GroundingError, AmrError) as e:
        _fail(EXIT_DATA, f"sample: {e}")
    write_jsonl(out, rows)
    click.echo(f"wrote {len(rows)} samples to {out}")


@main.command("augment")
@click.option("--samples", "samples_path", required=True, type=click.Path(exists=True))
@click.option("--generator", default="stub", show_default=True,
              help="stub | bridge:mock | bridge:HOST:PORT")
@click.option("--scorer", default="const:1.0", show_default=True,
              help="const:X | bridge:mock | bridge:HOST:PORT")
@click.option("--gruen-th", default=0.7, show_default=True)
@click.option("--out", required=True, type=click.Path())
def augment_cmd(samples_path, generator, scorer, gruen_th, out):
    """Realize samples as captions, attach controls, filter by quality."""
    config = PipelineConfig(
        records="", embeddings="", nouns="", outdir="",
        generator=generator, scorer=scorer, gruen_threshold=gruen_th,
    )
    try:
        _, sample_rows = read_jsonl(samples_path)
        kept, _dropped = pipeline.augment_stage(config, sample_rows)
    except BridgeError as e:
        _fail(EXIT_EXTERNAL, f"augment: {e}")
    except (augment.AugmentError, AmrError, KeyError) as e:
        _fail(EXIT_DATA, f"augment: {e}")
    write_jsonl(out, kept)
    click.echo(f"wrote {len(kept)} pairs to {out}")


@main.command("mix")
@click.option("--original", "original_path", required=True, type=click.Path(exists=True))
@click.option("--ssa", "ssa_path", required=True, type=click.Path(exists=True))
@click.option("--strategy", type=click.Choice(["random", "uniform-coverage"]), default="random",
              show_default=True)
@click.option("--p", default=100.0, show_default=True)
@click.option("--bins", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def mix_cmd(original_path, ssa_path, strategy, p, bins, seed, out):
    """Mix original and augmented pairs per the chosen strategy."""
    try:
        _, original_rows = read_jsonl(original_path)
        _, ssa_rows = read_jsonl(ssa_path)
        config = PipelineConfig(
            records="", embeddings="", nouns="", outdir="",
            mix_strategy=strategy, mix_p=p, mix_bins=bins, seed=seed,
        )
        mixed = pipeline.mix_stage(config, original_rows, ssa_rows)
    except ValueError as e:
        _fail(EXIT_CONFIG, f"mix: {e}")
    write_jsonl(out, mixed)
    click.echo(f"wrote {len(mixed)} pairs to {out}")


@main.command("eval")
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True))
@click.option("--embeddings", required=True, type=click.Path(exists=True))
@click.option("--nouns", required=True, help="lexicon:FILE")
@click.option("--report", "report_path", required=True, type=click.Path())
@click.option("--bands", default=10, show_default=True)
def eval_cmd(pairs_path, embeddings, nouns, report_path, bands):
    """Evaluate generated pairs against their control signals."""
    if not nouns.startswith("lexicon:"):
        _fail(EXIT_CONFIG, "eval: --nouns must be lexicon:FILE")
    try:
        store = load_embeddings(embeddings)
        extractor = LexiconNounExtractor.from_file(nouns[len("lexicon:"):])
        _, rows = read_jsonl(pairs_path)
        pairs = [augment.ControlCaptionPair.from_dict(r) for r in rows]
        report = evaluate_pairs(pairs, store, extractor, bands=bands)
    except (EmbeddingError, MetricError) as e:
        _fail(EXIT_DATA, f"eval: {e}")
    with open(report_path, "w") as f:
        json.dump(report.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    click.echo(f"wrote report to {report_path}")


def _load_config(config_path, overrides: dict) -> PipelineConfig:
    data = {}
    if config_path:
        with open(config_path, "rb") as f:
            data = tomllib.load(f)
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return PipelineConfig(**data)
    except (TypeError, ValueError) as e:
        raise click.ClickException(f"bad config: {e}")


@main.command("run")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--records", type=click.Path())
@click.option("--embeddings", type=click.Path())
@click.option("--nouns", type=click.Path())
@click.option("--outdir", type=click.Path())
@click.option("--seed", type=int)
@click.option("--generator")
@click.option("--scorer")
@click.option("--gruen-th", "gruen_threshold", type=float)
@click.option("--mix-strategy", type=click.Choice(["random", "uniform-coverage"]))
@click.option("--mix-p", type=float)
@click.option("--mix-bins", type=int)
@click.option("--restarts", type=int)
def run_cmd(config_path, **overrides):
    """Run the whole pipeline from a records file to a metric report."""
    try:
        config = _load_config(config_path, overrides)
    except click.ClickException as e:
        _fail(EXIT_CONFIG, f"run: {e.message}")
    try:
        artifacts = pipeline.run_pipeline(config)
    except StageError as e:
        code = EXIT_EXTERNAL if "bridge" in str(e).lower() else EXIT_DATA
        if e.stage == "config":
            code = EXIT_CONFIG
        _fail(code, f"run: {e}")
    for name, path in artifacts.items():
        click.echo(f"{name}: {path}")


@main.command("report")
@click.option("--report", "report_path", required=True, type=click.Path(exists=True))
@click.option("--csv", "csv_path", type=click.Path())
def report_cmd(report_path, csv_path):
    """Render a report.json as a text table and per-band CSV."""
    with open(report_path) as f:
        report = json.load(f)
    try:
        table, csv_text = pipeline.render_report(report)
    except StageError as e:
        _fail(EXIT_DATA, f"report: {e}")
    click.echo(table, nl=False)
    if csv_path:
        Path(csv_path).write_text(csv_text)
        click.echo(f"wrote band CSV to {csv_path}")
    else:
        click.echo(csv_text, nl=False)


if __name__ == "__main__":
    main()
