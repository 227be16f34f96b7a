"""Batch command-line surface tying the toolkit together.

Exit codes: 0 success, 1 evaluation/constraint failure, 2 usage or I/O
failure. Every command emits a machine-readable report via ``--out``.
"""

from __future__ import annotations

import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from . import camera as camera_mod
from . import dataset as dataset_mod
from . import irscore as irscore_mod
from . import judge as judge_mod
from . import lexical, pose_depth, reports, semantic
from .captions import COMPONENTS, corpus_integrity, serialize_structured_caption

EXIT_EVAL = 1
EXIT_USAGE = 2

_out_option = click.option(
    "--out",
    "out_fmt",
    type=click.Choice(["json", "csv", "markdown"]),
    default="json",
    show_default=True,
    help="Report format.",
)

_existing_file = click.Path(exists=True, dir_okay=False, path_type=Path)


def _emit(report: dict, fmt: str) -> None:
    click.echo(reports.render_report(report, fmt), nl=False)


@click.group()
@click.version_option(package_name="condcap")
def main() -> None:
    """Condition-to-caption toolkit: caption metrics, condition geometry,
    intent-reasoning scores, and dataset utilities."""


@main.command()
@click.argument("records_file", type=_existing_file)
@_out_option
def validate(records_file: Path, out_fmt: str) -> None:
    """Schema-check a line-delimited record file."""
    try:
        n_ok, diagnostics = dataset_mod.validate_records_file(records_file)
    except OSError as exc:
        raise click.ClickException(str(exc)) from exc
    report = reports.build_report(
        "validate",
        inputs={"records": str(records_file)},
        results={"valid": not diagnostics, "n_records": n_ok, "violations": diagnostics},
    )
    _emit(report, out_fmt)
    if diagnostics:
        sys.exit(EXIT_EVAL)


def _aligned_records(pred_file: Path, gt_file: Path):
    try:
        pred_records = {r.id: r for r in dataset_mod.read_records(pred_file)}
        gt_records = {r.id: r for r in dataset_mod.read_records(gt_file)}
    except dataset_mod.RecordError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_EVAL)
    orphans = sorted(pred_records.keys() ^ gt_records.keys())
    if orphans:
        click.echo(f"error: unmatched record ids: {', '.join(orphans)}", err=True)
        sys.exit(EXIT_EVAL)
    ids = sorted(gt_records)
    return [(pred_records[i], gt_records[i]) for i in ids]


_LEXICAL_METRICS = ("bleu", "rouge_l", "meteor")


def _pair_scores(cand_text: str, ref_text: str, metrics: list[str], bleu_order: int, provider) -> dict:
    cand = lexical.tokenize(cand_text)
    ref = lexical.tokenize(ref_text)
    scores: dict[str, float] = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", lexical.EmptyInputWarning)
        if "bleu" in metrics:
            scores[f"bleu_{bleu_order}"] = lexical.bleu_n(cand, ref, bleu_order)
        if "rouge_l" in metrics:
            scores["rouge_l"] = lexical.rouge_l(cand, ref)
        if "meteor" in metrics:
            scores["meteor"] = lexical.meteor(cand, ref)
        if "bertscore" in metrics:
            if cand and ref:
                scores["bertscore_f1"] = semantic.bertscore(cand_text, ref_text, provider).f1
            else:
                scores["bertscore_f1"] = 0.0
    return scores


@main.command()
@click.option("--pred", "pred_file", required=True, type=_existing_file)
@click.option("--gt", "gt_file", required=True, type=_existing_file)
@click.option(
    "--metrics",
    default="bleu,rouge_l,meteor,integrity",
    show_default=True,
    help="Comma-separated subset of: bleu, rouge_l, meteor, bertscore, integrity.",
)
@click.option("--bleu-order", default=2, show_default=True)
@click.option("--embed-seed", default=0, show_default=True, help="Mock embedding provider seed.")
@click.option("--embed-dim", default=32, show_default=True, help="Mock embedding dimension.")
@click.option("--jobs", default=1, show_default=True)
@_out_option
def score(
    pred_file: Path,
    gt_file: Path,
    metrics: str,
    bleu_order: int,
    embed_seed: int,
    embed_dim: int,
    jobs: int,
    out_fmt: str,
) -> None:
    """Lexical/semantic caption scores per component and for whole captions."""
    selected = [m.strip() for m in metrics.split(",") if m.strip()]
    unknown = set(selected) - {*_LEXICAL_METRICS, "bertscore", "integrity"}
    if unknown:
        raise click.UsageError(f"unknown metrics: {', '.join(sorted(unknown))}")
    pairs = _aligned_records(pred_file, gt_file)
    provider = semantic.MockProvider(seed=embed_seed, dim=embed_dim)
    started = time.perf_counter()

    def score_one(pair) -> dict:
        pred, gt = pair
        per_component = {}
        for name in COMPONENTS:
            gt_body = getattr(gt.structured_caption, name)
            if gt_body is None:
                continue
            pred_body = getattr(pred.structured_caption, name) or ""
            per_component[name] = _pair_scores(pred_body, gt_body, selected, bleu_order, provider)
        entire = _pair_scores(
            serialize_structured_caption(pred.structured_caption),
            serialize_structured_caption(gt.structured_caption),
            selected,
            bleu_order,
            provider,
        )
        return {"id": gt.id, "components": per_component, "entire_caption": entire}

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            details = list(pool.map(score_one, pairs))
    else:
        details = [score_one(pair) for pair in pairs]

    component_means: dict[str, dict[str, float]] = {}
    for name in COMPONENTS:
        rows = [d["components"][name] for d in details if name in d["components"]]
        if not rows:
            continue
        component_means[name] = {
            metric: round(sum(r[metric] for r in rows) / len(rows), 4)
            for metric in rows[0]
        }
        component_means[name]["n"] = len(rows)
    entire_means = {
        metric: round(sum(d["entire_caption"][metric] for d in details) / len(details), 4)
        for metric in details[0]["entire_caption"]
    }
    results: dict = {"per_component": component_means, "entire_caption": entire_means}
    if "integrity" in selected:
        results["structural_integrity"] = corpus_integrity(
            [pred.structured_caption for pred, _ in pairs]
        )
    if "bertscore" in selected:
        results["bertscore_provider"] = f"mock(seed={embed_seed}, dim={embed_dim})"
    report = reports.build_report(
        "score",
        inputs={"pred": str(pred_file), "gt": str(gt_file), "metrics": selected},
        results=results,
        details=details,
        timing_s=round(time.perf_counter() - started, 3),
    )
    _emit(report, out_fmt)


@main.command("irscore")
@click.option("--pred", "pred_file", required=True, type=_existing_file)
@click.option("--gt", "gt_file", required=True, type=_existing_file)
@click.option("--judge-endpoint", default=None, help="Remote judge URL (live mode).")
@click.option("--judge-model", default="judge", show_default=True)
@click.option(
    "--judge-cache",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Replay-cache file (recorded in live mode, read in --replay mode).",
)
@click.option("--replay", is_flag=True, help="Serve judge calls from the cache only.")
@click.option("--jobs", default=1, show_default=True)
@click.option("--audit-dir", type=click.Path(file_okay=False, path_type=Path), default=None)
@_out_option
def irscore_cmd(
    pred_file: Path,
    gt_file: Path,
    judge_endpoint: str | None,
    judge_model: str,
    judge_cache: Path | None,
    replay: bool,
    jobs: int,
    audit_dir: Path | None,
    out_fmt: str,
) -> None:
    """Intent-reasoning score per record plus the corpus aggregate.

    Judge credentials are read from $CONDCAP_JUDGE_API_KEY in live mode.
    """
    if replay:
        if judge_cache is None or not judge_cache.exists():
            raise click.UsageError("--replay requires an existing --judge-cache file")
        client: judge_mod.JudgeClient = judge_mod.ReplayJudgeClient(
            judge_mod.ReplayCache(judge_cache)
        )
    else:
        if not judge_endpoint:
            raise click.UsageError("live mode requires --judge-endpoint (or use --replay)")
        cache = judge_mod.ReplayCache(judge_cache) if judge_cache else None
        client = judge_mod.HttpJudgeClient(
            judge_mod.JudgeConfig(endpoint=judge_endpoint, model=judge_model), cache=cache
        )
    pairs = _aligned_records(pred_file, gt_file)
    started = time.perf_counter()
    details = []
    runs = []
    for pred, gt in pairs:
        summaries = irscore_mod.summarize_conditions(gt.conditions)
        try:
            run = irscore_mod.run_irscore(
                gt_caption=gt.structured_caption,
                pred_caption=pred.structured_caption,
                short_prompt=gt.short_caption,
                condition_summaries=summaries,
                judge=client,
                max_workers=jobs,
                audit_dir=(audit_dir / gt.id) if audit_dir else None,
            )
        except (irscore_mod.PipelineStepError, judge_mod.JudgeError) as exc:
            click.echo(f"error: record {gt.id}: {exc}", err=True)
            sys.exit(EXIT_EVAL)
        runs.append(run)
        details.append({"id": gt.id, "report": run.report.to_dict()})

    n = len(runs)
    corpus = {
        # Unweighted mean of per-record reports.
        "accuracy": irscore_mod.round_score(sum(r.report.accuracy for r in runs) / n),
        "mean_quality": irscore_mod.round_score(sum(r.report.mean_quality for r in runs) / n),
        "n_records": n,
        "n_pairs": sum(r.report.n_pairs for r in runs),
    }
    report = reports.build_report(
        "irscore",
        inputs={"pred": str(pred_file), "gt": str(gt_file), "replay": replay},
        results=corpus,
        details=details,
        timing_s=None if replay else round(time.perf_counter() - started, 3),
    )
    _emit(report, out_fmt)


@main.command("camera")
@click.option("--pred", "pred_file", required=True, type=_existing_file)
@click.option("--gt", "gt_file", required=True, type=_existing_file)
@click.option("--agg", type=click.Choice(["mean", "sum"]), default="mean", show_default=True)
@click.option("--normalized-intrinsics", is_flag=True)
@click.option("--image-size", default=None, help="WIDTHxHEIGHT, required with --normalized-intrinsics.")
@_out_option
def camera_cmd(
    pred_file: Path,
    gt_file: Path,
    agg: str,
    normalized_intrinsics: bool,
    image_size: str | None,
    out_fmt: str,
) -> None:
    """Trajectory fidelity metrics (rotation / translation / combined)."""
    size = None
    if image_size:
        try:
            w, h = image_size.lower().split("x")
            size = (int(w), int(h))
        except ValueError:
            raise click.UsageError("--image-size must look like 640x480")
    try:
        pred = camera_mod.load_trajectory(
            pred_file, normalized_intrinsics=normalized_intrinsics, image_size=size
        )
        gt = camera_mod.load_trajectory(
            gt_file, normalized_intrinsics=normalized_intrinsics, image_size=size
        )
    except (camera_mod.TrajectoryFormatError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    try:
        metrics = camera_mod.camera_metrics(pred, gt, agg=agg)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_EVAL)
    results = {k: round(v, 6) for k, v in metrics.items()}
    if len(gt) >= 2:
        results["gt_movement"] = camera_mod.describe_movement(camera_mod.classify_movement(gt))
        results["pred_movement"] = camera_mod.describe_movement(camera_mod.classify_movement(pred))
    results["conventions"] = {
        "aggregation": agg,
        "frame_normalization": "first_frame_identity",
        "translation_scale": "max_center_norm",
    }
    report = reports.build_report(
        "camera",
        inputs={"pred": str(pred_file), "gt": str(gt_file)},
        results=results,
    )
    _emit(report, out_fmt)


@main.command("pose")
@click.option("--pred", "pred_file", required=True, type=_existing_file)
@click.option("--gt", "gt_file", required=True, type=_existing_file)
@click.option("--alpha", default=0.05, show_default=True, help="PCK threshold fraction of the gt box.")
@_out_option
def pose_cmd(pred_file: Path, gt_file: Path, alpha: float, out_fmt: str) -> None:
    """Keypoint accuracy between matching pose tracks."""
    try:
        pred_tracks = {t.person_id: t for t in pose_depth.load_pose_tracks(pred_file)}
        gt_tracks = {t.person_id: t for t in pose_depth.load_pose_tracks(gt_file)}
    except pose_depth.PoseFormatError as exc:
        raise click.ClickException(str(exc)) from exc
    orphans = sorted(pred_tracks.keys() ^ gt_tracks.keys())
    if orphans:
        click.echo(f"error: unmatched person ids: {', '.join(orphans)}", err=True)
        sys.exit(EXIT_EVAL)
    per_track = {}
    for person_id in sorted(gt_tracks):
        try:
            per_track[person_id] = round(
                pose_depth.pose_accuracy(pred_tracks[person_id], gt_tracks[person_id], alpha), 4
            )
        except ValueError as exc:
            click.echo(f"error: person {person_id}: {exc}", err=True)
            sys.exit(EXIT_EVAL)
    report = reports.build_report(
        "pose",
        inputs={"pred": str(pred_file), "gt": str(gt_file), "alpha": alpha},
        results={
            "pose_accuracy": round(sum(per_track.values()) / len(per_track), 4),
            "per_track": per_track,
        },
    )
    _emit(report, out_fmt)


def _load_depth_any(path: Path):
    if path.suffix == ".json":
        return pose_depth.load_depth_images(path)
    return pose_depth.read_depth(path)


@main.command("depth")
@click.option("--pred", "pred_file", required=True, type=_existing_file)
@click.option("--gt", "gt_file", required=True, type=_existing_file)
@_out_option
def depth_cmd(pred_file: Path, gt_file: Path, out_fmt: str) -> None:
    """Depth-sequence mean absolute error after per-frame normalization."""
    try:
        pred = _load_depth_any(pred_file)
        gt = _load_depth_any(gt_file)
    except (ValueError, OSError, KeyError) as exc:
        raise click.ClickException(str(exc)) from exc
    try:
        mae = pose_depth.depth_mae(pred, gt)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_EVAL)
    report = reports.build_report(
        "depth",
        inputs={"pred": str(pred_file), "gt": str(gt_file)},
        results={"depth_mae": round(mae, 6), "normalization": "per_frame_minmax"},
    )
    _emit(report, out_fmt)


@main.group()
def dataset() -> None:
    """Dataset utilities: stats, training manifests, sequence assembly."""


@dataset.command("stats")
@click.argument("records_file", type=_existing_file)
@_out_option
def dataset_stats(records_file: Path, out_fmt: str) -> None:
    """Corpus statistics for a record file."""
    try:
        records = dataset_mod.read_records(records_file)
        stats = dataset_mod.compute_stats(records)
    except (dataset_mod.RecordError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_EVAL)
    report = reports.build_report(
        "dataset stats", inputs={"records": str(records_file)}, results=stats.to_dict()
    )
    _emit(report, out_fmt)


@dataset.command("manifest")
@click.option("--records", "records_file", required=True, type=_existing_file)
@click.option("--aux", "aux_file", required=True, type=_existing_file,
              help="Auxiliary-instruction pool: one opaque ref per line.")
@click.option("--stage", type=click.Choice(list(dataset_mod.STAGE_ORDER)), required=True)
@click.option("--ratio", type=float, default=None,
              help="Joint-train ratio override (defaults to the stage's value).")
@click.option("--seed", type=int, required=True)
@click.option("--output", "output_file", required=True, type=click.Path(dir_okay=False, path_type=Path))
@_out_option
def dataset_manifest(
    records_file: Path,
    aux_file: Path,
    stage: str,
    ratio: float | None,
    seed: int,
    output_file: Path,
    out_fmt: str,
) -> None:
    """Build and write a stage training manifest."""
    try:
        records = dataset_mod.read_records(records_file)
        aux_refs = [line.strip() for line in aux_file.read_text().splitlines() if line.strip()]
        config = dataset_mod.STAGE_DEFAULTS[stage]
        if ratio is not None:
            config = dataset_mod.StageConfig(
                stage, ratio, config.sentence_dropout_rate, config.condition_dropout_rate
            )
        manifest = dataset_mod.build_manifest(records, aux_refs, config, seed)
    except (dataset_mod.RecordError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_EVAL)
    dataset_mod.write_manifest(manifest, output_file)
    report = reports.build_report(
        "dataset manifest",
        inputs={"records": str(records_file), "aux": str(aux_file), "stage": stage, "seed": seed},
        results={
            "output": str(output_file),
            "stage": manifest.stage,
            "position": manifest.position,
            "joint_train_ratio": manifest.joint_train_ratio,
            "sentence_dropout_rate": manifest.sentence_dropout_rate,
            "condition_dropout_rate": manifest.condition_dropout_rate,
            "entries": len(manifest.entries),
            "aux_fraction": round(manifest.aux_fraction(), 6),
        },
    )
    _emit(report, out_fmt)


@dataset.command("assemble")
@click.argument("records_file", type=_existing_file)
@_out_option
def dataset_assemble(records_file: Path, out_fmt: str) -> None:
    """Print marker-tagged training sequences for each record."""
    try:
        records = dataset_mod.read_records(records_file)
        sequences = {r.id: dataset_mod.assemble_condition_sequence(r) for r in records}
    except (dataset_mod.RecordError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_EVAL)
    report = reports.build_report(
        "dataset assemble",
        inputs={"records": str(records_file)},
        results={"sequences": sequences},
    )
    _emit(report, out_fmt)


if __name__ == "__main__":
    main()
