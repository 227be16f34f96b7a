"""Dataset record model, statistics, training-sequence assembly, and
stage-wise training-manifest construction.

Records live in line-delimited JSON files validated against a versioned
schema. Training manifests interleave dataset records with auxiliary
instruction records (opaque refs) at a stage-dependent ratio.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import jsonschema

from .captions import Condition, ConditionKind, ConditionSet, StructuredCaption
from .lexical import tokenize

CATEGORIES = ("depth", "human_pose", "multi_identities", "camera", "compositional")

_CATEGORY_BY_KIND = {
    ConditionKind.DEPTH: "depth",
    ConditionKind.POSE: "human_pose",
    ConditionKind.IDENTITIES: "multi_identities",
    ConditionKind.CAMERA: "camera",
}

_RECORD_SCHEMA = json.loads(
    (resources.files("condcap") / "schemas" / "record.v1.json").read_text(encoding="utf-8")
)
_RECORD_VALIDATOR = jsonschema.Draft202012Validator(_RECORD_SCHEMA)


class RecordError(ValueError):
    """A record file violates the schema; names the record index and field."""

    def __init__(self, index: int, message: str) -> None:
        super().__init__(f"record {index}: {message}")
        self.index = index


def infer_category(conditions: ConditionSet) -> str:
    """Category implied by the condition tags (multiple kinds: compositional)."""
    kinds = conditions.kinds()
    if not kinds:
        raise ValueError("a record needs at least one condition to carry a category")
    if len(kinds) > 1:
        return "compositional"
    return _CATEGORY_BY_KIND[kinds[0]]


@dataclass(frozen=True)
class CaptionRecord:
    """One dataset instance: a video, its conditions, and both captions."""

    id: str
    video_ref: str
    duration_s: float
    conditions: ConditionSet
    short_caption: str
    structured_caption: StructuredCaption
    category: str

    def __post_init__(self) -> None:
        if not self.id or not self.video_ref:
            raise ValueError("id and video_ref must be non-empty")
        if self.duration_s <= 0:
            raise ValueError(f"duration_s must be positive, got {self.duration_s}")
        if not self.short_caption.strip():
            raise ValueError("short_caption must be non-empty")
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}")
        expected = infer_category(self.conditions)
        if self.category != expected:
            raise ValueError(
                f"category {self.category!r} inconsistent with conditions (expected {expected!r})"
            )

    def condition_count(self) -> int:
        """Number of conditions; each identity image counts separately."""
        return sum(len(item.refs) for item in self.conditions)


def record_to_dict(record: CaptionRecord) -> dict:
    return {
        "id": record.id,
        "video_ref": record.video_ref,
        "duration_s": record.duration_s,
        "conditions": [
            {"kind": item.kind.value, "refs": list(item.refs)} for item in record.conditions
        ],
        "short_caption": record.short_caption,
        "structured_caption": dict(record.structured_caption.components()),
        "category": record.category,
    }


def record_from_dict(data: dict) -> CaptionRecord:
    conditions = ConditionSet(
        tuple(
            Condition(ConditionKind(item["kind"]), tuple(item["refs"]))
            for item in data["conditions"]
        )
    )
    return CaptionRecord(
        id=data["id"],
        video_ref=data["video_ref"],
        duration_s=float(data["duration_s"]),
        conditions=conditions,
        short_caption=data["short_caption"],
        structured_caption=StructuredCaption(**data["structured_caption"]),
        category=data["category"],
    )


def read_records(path: str | Path) -> list[CaptionRecord]:
    """Read line-delimited records, schema-checking each line.

    Raises :class:`RecordError` naming the record index and field path.
    """
    records = []
    for index, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordError(index, f"invalid JSON: {exc}") from exc
        error = jsonschema.exceptions.best_match(_RECORD_VALIDATOR.iter_errors(data))
        if error is not None:
            raise RecordError(index, f"{error.json_path}: {error.message}")
        try:
            records.append(record_from_dict(data))
        except ValueError as exc:
            raise RecordError(index, str(exc)) from exc
    return records


def write_records(records: Sequence[CaptionRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_dict(record), sort_keys=True) + "\n")


def validate_records_file(path: str | Path) -> tuple[int, list[str]]:
    """Check every record, collecting diagnostics instead of stopping at the
    first violation. Returns (valid record count, diagnostics)."""
    n_ok = 0
    diagnostics = []
    for index, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            diagnostics.append(f"record {index}: invalid JSON: {exc}")
            continue
        error = jsonschema.exceptions.best_match(_RECORD_VALIDATOR.iter_errors(data))
        if error is not None:
            diagnostics.append(f"record {index}: {error.json_path}: {error.message}")
            continue
        try:
            record_from_dict(data)
        except ValueError as exc:
            diagnostics.append(f"record {index}: {exc}")
            continue
        n_ok += 1
    return n_ok, diagnostics


@dataclass(frozen=True)
class CategoryStats:
    instances: int
    conditions: int
    mean_duration_s: float
    total_duration_h: float


@dataclass(frozen=True)
class DatasetStats:
    """Corpus statistics: per-category counts, durations, caption lengths."""

    per_category: dict[str, CategoryStats]
    total_instances: int
    total_conditions: int
    mean_duration_s: float
    total_duration_h: float
    short_caption_mean_words: float
    structured_caption_mean_words: float
    short_caption_histogram: dict[int, int]
    structured_caption_histogram: dict[int, int]
    mean_identity_refs: float | None

    def to_dict(self) -> dict:
        return {
            "per_category": {
                name: {
                    "instances": s.instances,
                    "conditions": s.conditions,
                    "mean_duration_s": s.mean_duration_s,
                    "total_duration_h": s.total_duration_h,
                }
                for name, s in sorted(self.per_category.items())
            },
            "total_instances": self.total_instances,
            "total_conditions": self.total_conditions,
            "mean_duration_s": self.mean_duration_s,
            "total_duration_h": self.total_duration_h,
            "short_caption_mean_words": self.short_caption_mean_words,
            "structured_caption_mean_words": self.structured_caption_mean_words,
            "short_caption_histogram": {str(k): v for k, v in sorted(self.short_caption_histogram.items())},
            "structured_caption_histogram": {str(k): v for k, v in sorted(self.structured_caption_histogram.items())},
            "mean_identity_refs": self.mean_identity_refs,
        }


def caption_word_count(caption: StructuredCaption) -> int:
    """Words across component bodies (headers excluded), by the shared tokenizer."""
    return sum(len(tokenize(body)) for body in caption.components().values())


def _histogram(counts: list[int], bin_width: int = 10) -> dict[int, int]:
    hist: dict[int, int] = {}
    for count in counts:
        bin_start = (count // bin_width) * bin_width
        hist[bin_start] = hist.get(bin_start, 0) + 1
    return hist


def compute_stats(records: Sequence[CaptionRecord]) -> DatasetStats:
    if not records:
        raise ValueError("compute_stats requires at least one record")
    per_category: dict[str, CategoryStats] = {}
    for category in sorted({r.category for r in records}):
        subset = [r for r in records if r.category == category]
        durations = [r.duration_s for r in subset]
        per_category[category] = CategoryStats(
            instances=len(subset),
            conditions=sum(r.condition_count() for r in subset),
            mean_duration_s=sum(durations) / len(subset),
            total_duration_h=sum(durations) / 3600.0,
        )
    short_words = [len(tokenize(r.short_caption)) for r in records]
    structured_words = [caption_word_count(r.structured_caption) for r in records]
    identity_counts = [
        sum(len(item.refs) for item in r.conditions if item.kind is ConditionKind.IDENTITIES)
        for r in records
        if any(item.kind is ConditionKind.IDENTITIES for item in r.conditions)
    ]
    durations = [r.duration_s for r in records]
    return DatasetStats(
        per_category=per_category,
        total_instances=len(records),
        total_conditions=sum(r.condition_count() for r in records),
        mean_duration_s=sum(durations) / len(records),
        total_duration_h=sum(durations) / 3600.0,
        short_caption_mean_words=sum(short_words) / len(records),
        structured_caption_mean_words=sum(structured_words) / len(records),
        short_caption_histogram=_histogram(short_words),
        structured_caption_histogram=_histogram(structured_words),
        mean_identity_refs=(sum(identity_counts) / len(identity_counts)) if identity_counts else None,
    )


#: Marker pairs delimiting condition features in assembled training sequences.
VISION_MARKERS = ("<|vision_start|>", "<|vision_end|>")
MOTION_MARKERS = ("<|motion_start|>", "<|motion_end|>")
CAMERA_MARKERS = ("<|camera_start|>", "<|camera_end|>")

_MARKERS_BY_KIND = {
    ConditionKind.DEPTH: VISION_MARKERS,
    ConditionKind.IDENTITIES: VISION_MARKERS,
    ConditionKind.POSE: MOTION_MARKERS,
    ConditionKind.CAMERA: CAMERA_MARKERS,
}


def assemble_condition_sequence(record: CaptionRecord) -> str:
    """Token-tagged training-sequence preview: marker-wrapped condition
    placeholders in condition order, followed by the short caption.

    Image/video conditions reuse the vision markers; pose and camera use
    the dedicated motion/camera markers. Marker pairs are always balanced.
    """
    spans = []
    for item in record.conditions:
        markers = _MARKERS_BY_KIND.get(item.kind)
        if markers is None:
            raise ValueError(f"unknown condition tag {item.kind!r}")
        start, end = markers
        for ref in item.refs:
            spans.append(f"{start}[{item.kind.value}:{ref}]{end}")
    return " ".join(spans + [record.short_caption])


#: Stage order for progressive training (one condition family per stage).
STAGE_ORDER = ("identities", "human_pose", "camera", "depth")

#: Allowed auxiliary-instruction mix ratios.
JOINT_TRAIN_RATIOS = (0.0, 0.4, 0.6, 0.8)


@dataclass(frozen=True)
class StageConfig:
    """One training stage: mix ratio plus the dropout rates to apply."""

    stage: str
    joint_train_ratio: float
    sentence_dropout_rate: float = 0.6
    condition_dropout_rate: float = 0.6

    def __post_init__(self) -> None:
        if self.stage not in STAGE_ORDER:
            raise ValueError(f"unknown stage {self.stage!r}")
        if self.joint_train_ratio not in JOINT_TRAIN_RATIOS:
            raise ValueError(
                f"joint_train_ratio must be one of {JOINT_TRAIN_RATIOS}, "
                f"got {self.joint_train_ratio}"
            )
        for name in ("sentence_dropout_rate", "condition_dropout_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {rate}")


#: Default per-stage configuration: the auxiliary ratio rises stage by stage
#: while dropout rates stay at their training values.
STAGE_DEFAULTS = {
    "identities": StageConfig("identities", 0.0, 0.6, 0.4),
    "human_pose": StageConfig("human_pose", 0.4, 0.6, 0.6),
    "camera": StageConfig("camera", 0.6, 0.6, 0.6),
    "depth": StageConfig("depth", 0.8, 0.6, 0.6),
}


@dataclass(frozen=True)
class ManifestEntry:
    source: str  # "data" or "aux"
    ref: str


@dataclass(frozen=True)
class TrainingManifest:
    stage: str
    position: int  # 1-based index in STAGE_ORDER
    joint_train_ratio: float
    sentence_dropout_rate: float
    condition_dropout_rate: float
    seed: int
    entries: tuple[ManifestEntry, ...]

    def aux_fraction(self) -> float:
        if not self.entries:
            return 0.0
        return sum(e.source == "aux" for e in self.entries) / len(self.entries)


def build_manifest(
    records: Sequence[CaptionRecord],
    aux_refs: Sequence[str],
    config: StageConfig,
    seed: int,
) -> TrainingManifest:
    """Interleave dataset records with auxiliary refs at the stage ratio.

    The auxiliary fraction of the manifest matches the ratio within one
    record. Dropout rates are carried as manifest fields; the dropout itself
    happens at load time. Deterministic under ``seed``.
    """
    if not records:
        raise ValueError("build_manifest requires at least one record")
    ratio = config.joint_train_ratio
    n_aux = round(ratio * len(records) / (1.0 - ratio)) if ratio > 0 else 0
    if n_aux > len(aux_refs):
        raise ValueError(
            f"auxiliary pool too small: need {n_aux} records, have {len(aux_refs)}"
        )
    rng = random.Random(seed)
    chosen_aux = rng.sample(list(aux_refs), n_aux)
    entries = [ManifestEntry("data", record.id) for record in records]
    entries += [ManifestEntry("aux", ref) for ref in chosen_aux]
    rng.shuffle(entries)
    return TrainingManifest(
        stage=config.stage,
        position=STAGE_ORDER.index(config.stage) + 1,
        joint_train_ratio=ratio,
        sentence_dropout_rate=config.sentence_dropout_rate,
        condition_dropout_rate=config.condition_dropout_rate,
        seed=seed,
        entries=tuple(entries),
    )


def write_manifest(manifest: TrainingManifest, path: str | Path) -> None:
    """Write manifest entries as line-delimited ``{source, ref, stage, seed}``."""
    with open(path, "w", encoding="utf-8") as fh:
        for entry in manifest.entries:
            fh.write(
                json.dumps(
                    {
                        "source": entry.source,
                        "ref": entry.ref,
                        "stage": manifest.stage,
                        "seed": manifest.seed,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def read_manifest_entries(path: str | Path) -> list[dict]:
    return [
        json.loads(line)
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
