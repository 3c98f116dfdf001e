import json

from click.testing import CliRunner

from ssacap.cli import EXIT_CONFIG, EXIT_DATA, main

runner = CliRunner()


def test_parse_roundtrip(tmp_path):
    path = tmp_path / "in.amr"
    path.write_text("# ::id 1\n(s / sit-01 :ARG1 (b / boat))\n")
    result = runner.invoke(main, ["parse", "--input", str(path)])
    assert result.exit_code == 0
    assert "(s / sit-01 :ARG1 (b / boat))" in result.output
    assert "# ::id 1" in result.output


def test_parse_bad_file_exits_data(tmp_path):
    path = tmp_path / "in.amr"
    path.write_text("(s / sit-01")
    result = runner.invoke(main, ["parse", "--input", str(path)])
    assert result.exit_code == EXIT_DATA


def test_smatch_command(tmp_path):
    a = tmp_path / "a.amr"
    b = tmp_path / "b.amr"
    a.write_text("(r / run-01 :ARG0 (d / dog))\n")
    b.write_text("(s / see-01 :ARG0 (d2 / dog))\n")
    result = runner.invoke(main, ["smatch", "--a", str(a), "--b", str(b)])
    assert result.exit_code == 0
    assert "F1 0.7500" in result.output
    brute = runner.invoke(main, ["smatch", "--a", str(a), "--b", str(b), "--brute-force"])
    assert brute.output == result.output


def test_stagewise_pipeline(tmp_path, fixture_paths):
    records = str(fixture_paths["records"])
    embeddings = str(fixture_paths["embeddings"])
    nouns = str(fixture_paths["nouns"])

    ground = runner.invoke(main, ["ground", "--input", records, "--out", str(tmp_path / "vg.jsonl")])
    assert ground.exit_code == 0, ground.output

    meta = tmp_path / "meta.jsonl"
    merge = runner.invoke(main, ["merge", "--input", records, "--embeddings", embeddings, "--out", str(meta)])
    assert merge.exit_code == 0, merge.output
    assert "3 meta graphs" in merge.output

    samples = tmp_path / "samples.jsonl"
    sample = runner.invoke(main, ["sample", "--meta", str(meta), "--records", records, "--out", str(samples)])
    assert sample.exit_code == 0, sample.output

    pairs = tmp_path / "pairs.jsonl"
    augment = runner.invoke(main, ["augment", "--samples", str(samples), "--out", str(pairs)])
    assert augment.exit_code == 0, augment.output

    mixed = tmp_path / "mixed.jsonl"
    mix = runner.invoke(main, ["mix", "--original", str(pairs), "--ssa", str(pairs), "--p", "0", "--out", str(mixed)])
    assert mix.exit_code == 0, mix.output

    report = tmp_path / "report.json"
    ev = runner.invoke(main, [
        "eval", "--pairs", str(mixed), "--embeddings", embeddings,
        "--nouns", f"lexicon:{nouns}", "--report", str(report),
    ])
    assert ev.exit_code == 0, ev.output
    data = json.loads(report.read_text())
    assert 0.0 <= data["iou"] <= 1.0

    rendered = runner.invoke(main, ["report", "--report", str(report)])
    assert rendered.exit_code == 0, rendered.output
    assert "IoU" in rendered.output


def run_config(tmp_path, fixture_paths, name):
    outdir = tmp_path / name
    config = tmp_path / f"{name}.toml"
    config.write_text(
        f'records = "{fixture_paths["records"]}"\n'
        f'embeddings = "{fixture_paths["embeddings"]}"\n'
        f'nouns = "{fixture_paths["nouns"]}"\n'
        f'outdir = "{outdir}"\n'
        "seed = 0\n"
    )
    result = runner.invoke(main, ["run", "--config", str(config)])
    assert result.exit_code == 0, result.output
    return outdir


def test_run_deterministic(tmp_path, fixture_paths):
    out1 = run_config(tmp_path, fixture_paths, "run1")
    out2 = run_config(tmp_path, fixture_paths, "run2")
    names = sorted(p.name for p in out1.iterdir())
    assert names == sorted(p.name for p in out2.iterdir())
    assert "report.json" in names and "mixed.jsonl" in names
    for name in names:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_run_flag_overrides_config(tmp_path, fixture_paths):
    outdir = tmp_path / "override"
    result = runner.invoke(main, [
        "run",
        "--records", str(fixture_paths["records"]),
        "--embeddings", str(fixture_paths["embeddings"]),
        "--nouns", str(fixture_paths["nouns"]),
        "--outdir", str(outdir),
        "--mix-strategy", "uniform-coverage",
    ])
    assert result.exit_code == 0, result.output
    header = (outdir / "mixed.jsonl").read_text().splitlines()[0]
    assert "provenance" in header


def test_run_missing_input_exits_config(tmp_path):
    result = runner.invoke(main, [
        "run", "--records", "/nonexistent.jsonl",
        "--embeddings", "/nonexistent.txt", "--nouns", "/nonexistent.txt",
        "--outdir", str(tmp_path / "out"),
    ])
    assert result.exit_code == EXIT_CONFIG


def test_run_bad_config_value(tmp_path, fixture_paths):
    config = tmp_path / "bad.toml"
    config.write_text(
        f'records = "{fixture_paths["records"]}"\n'
        f'embeddings = "{fixture_paths["embeddings"]}"\n'
        f'nouns = "{fixture_paths["nouns"]}"\n'
        f'outdir = "{tmp_path / "out"}"\n'
        "gruen_threshold = 7.0\n"
    )
    result = runner.invoke(main, ["run", "--config", str(config)])
    assert result.exit_code == EXIT_CONFIG


def test_eval_rejects_unknown_noun_source(tmp_path, fixture_paths):
    result = runner.invoke(main, [
        "eval", "--pairs", "x", "--embeddings", str(fixture_paths["embeddings"]),
        "--nouns", "pos-tagger", "--report", str(tmp_path / "r.json"),
    ])
    assert result.exit_code == EXIT_CONFIG
