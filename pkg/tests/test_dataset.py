from __future__ import annotations

import json
import random
import re

import pytest

from condcap.captions import COMPONENTS, Condition, ConditionKind, ConditionSet, StructuredCaption
from condcap.dataset import (
    CaptionRecord,
    JOINT_TRAIN_RATIOS,
    RecordError,
    STAGE_DEFAULTS,
    STAGE_ORDER,
    StageConfig,
    assemble_condition_sequence,
    build_manifest,
    compute_stats,
    infer_category,
    read_manifest_entries,
    read_records,
    record_to_dict,
    validate_records_file,
    write_manifest,
    write_records,
)

WORDS = "river dog kite sunset market street harbor garden cloud lantern".split()


def make_record(
    rid: str = "r1",
    kinds: tuple[ConditionKind, ...] = (ConditionKind.CAMERA,),
    duration: float = 8.0,
    short: str = "A dog chases a kite in the park.",
    n_components: int = 6,
) -> CaptionRecord:
    items = []
    for kind in kinds:
        refs = ("a.png", "b.png") if kind is ConditionKind.IDENTITIES else (f"{kind.value}.ref",)
        items.append(Condition(kind, refs))
    conditions = ConditionSet(tuple(items))
    caption = StructuredCaption(**{c: f"{c} text body" for c in COMPONENTS[:n_components]})
    return CaptionRecord(
        id=rid,
        video_ref=f"videos/{rid}.mp4",
        duration_s=duration,
        conditions=conditions,
        short_caption=short,
        structured_caption=caption,
        category=infer_category(conditions),
    )


def random_record(rng: random.Random, rid: str) -> CaptionRecord:
    kind_sets = [
        (ConditionKind.CAMERA,),
        (ConditionKind.DEPTH,),
        (ConditionKind.POSE,),
        (ConditionKind.IDENTITIES,),
        (ConditionKind.CAMERA, ConditionKind.DEPTH),
        (ConditionKind.IDENTITIES, ConditionKind.POSE),
    ]
    short = " ".join(rng.choices(WORDS, k=rng.randint(3, 30))) + "."
    return make_record(
        rid,
        kinds=rng.choice(kind_sets),
        duration=rng.uniform(2.0, 20.0),
        short=short,
        n_components=rng.randint(1, 6),
    )


class TestCategory:
    def test_single_kind_mapping(self):
        assert make_record(kinds=(ConditionKind.CAMERA,)).category == "camera"
        assert make_record(kinds=(ConditionKind.DEPTH,)).category == "depth"
        assert make_record(kinds=(ConditionKind.POSE,)).category == "human_pose"
        assert make_record(kinds=(ConditionKind.IDENTITIES,)).category == "multi_identities"

    def test_multiple_kinds_compositional(self):
        record = make_record(kinds=(ConditionKind.CAMERA, ConditionKind.DEPTH))
        assert record.category == "compositional"

    def test_inconsistent_category_rejected(self):
        record = make_record()
        data = record_to_dict(record)
        data["category"] = "depth"
        with pytest.raises(ValueError, match="inconsistent"):
            from condcap.dataset import record_from_dict

            record_from_dict(data)

    def test_no_conditions_rejected(self):
        with pytest.raises(ValueError):
            infer_category(ConditionSet(()))


class TestRecordIO:
    def test_round_trip_1000_records(self, tmp_path):
        rng = random.Random(123)
        records = [random_record(rng, f"r{i:04d}") for i in range(1000)]
        path = tmp_path / "records.jsonl"
        write_records(records, path)
        assert read_records(path) == records

    def test_missing_structured_caption_is_schema_error(self, tmp_path):
        data = record_to_dict(make_record())
        del data["structured_caption"]
        path = tmp_path / "records.jsonl"
        path.write_text(json.dumps(data) + "\n")
        with pytest.raises(RecordError, match="structured_caption"):
            read_records(path)

    def test_error_names_record_index_and_field(self, tmp_path):
        good = record_to_dict(make_record("r1"))
        bad = record_to_dict(make_record("r2"))
        bad["duration_s"] = -1
        path = tmp_path / "records.jsonl"
        path.write_text(json.dumps(good) + "\n" + json.dumps(bad) + "\n")
        with pytest.raises(RecordError, match=r"record 1.*duration_s"):
            read_records(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "records.jsonl"
        path.write_text("")
        assert read_records(path) == []

    def test_validate_collects_all_diagnostics(self, tmp_path):
        good = record_to_dict(make_record("r1"))
        bad1 = dict(record_to_dict(make_record("r2")), duration_s=-3)
        path = tmp_path / "records.jsonl"
        path.write_text("\n".join([json.dumps(good), json.dumps(bad1), "broken json"]) + "\n")
        n_ok, diagnostics = validate_records_file(path)
        assert n_ok == 1
        assert len(diagnostics) == 2
        assert "record 1" in diagnostics[0]
        assert "record 2" in diagnostics[1]


class TestStats:
    def test_single_record(self):
        stats = compute_stats([make_record(duration=8.0)])
        assert stats.total_instances == 1
        assert stats.mean_duration_s == pytest.approx(8.0)
        assert stats.total_duration_h == pytest.approx(8.0 / 3600)

    def test_totals_are_sums_over_categories(self):
        records = [
            make_record("a", (ConditionKind.CAMERA,), duration=10.0),
            make_record("b", (ConditionKind.DEPTH,), duration=20.0),
            make_record("c", (ConditionKind.DEPTH,), duration=30.0),
        ]
        stats = compute_stats(records)
        assert stats.per_category["camera"].instances == 1
        assert stats.per_category["depth"].instances == 2
        assert stats.total_instances == 3
        assert stats.total_conditions == sum(
            s.conditions for s in stats.per_category.values()
        )
        assert stats.total_duration_h == pytest.approx(60.0 / 3600)

    def test_identity_images_count_as_conditions(self):
        record = make_record("a", (ConditionKind.IDENTITIES,))
        stats = compute_stats([record])
        assert stats.per_category["multi_identities"].conditions == 2
        assert stats.mean_identity_refs == pytest.approx(2.0)

    def test_twelve_record_fixture_hand_computed(self):
        records = []
        for i in range(6):
            records.append(make_record(f"c{i}", (ConditionKind.CAMERA,), duration=4.0,
                                       short="one two three four five.", n_components=6))
        for i in range(4):
            records.append(make_record(f"d{i}", (ConditionKind.DEPTH,), duration=10.0,
                                       short="uno dos tres.", n_components=3))
        for i in range(2):
            records.append(make_record(f"m{i}", (ConditionKind.IDENTITIES,), duration=7.0,
                                       short="alpha beta gamma delta.", n_components=6))
        stats = compute_stats(records)
        assert stats.total_instances == 12
        # camera 6 + depth 4 + identities 2x2 refs
        assert stats.total_conditions == 6 + 4 + 4
        assert stats.mean_duration_s == pytest.approx((6 * 4 + 4 * 10 + 2 * 7) / 12)
        assert stats.per_category["depth"].mean_duration_s == pytest.approx(10.0)
        assert stats.short_caption_mean_words == pytest.approx((6 * 5 + 4 * 3 + 2 * 4) / 12)
        # component bodies are 3 words each ("<name> text body")
        assert stats.structured_caption_mean_words == pytest.approx(
            (6 * 18 + 4 * 9 + 2 * 18) / 12
        )
        assert stats.short_caption_histogram == {0: 12}

    def test_histogram_bins_width_10(self):
        records = [
            make_record("a", short=" ".join(["w"] * 5) + "."),
            make_record("b", short=" ".join(["w"] * 15) + "."),
            make_record("c", short=" ".join(["w"] * 17) + "."),
        ]
        stats = compute_stats(records)
        assert stats.short_caption_histogram == {0: 1, 10: 2}

    def test_partition_additivity(self):
        rng = random.Random(5)
        records = [random_record(rng, f"r{i}") for i in range(40)]
        whole = compute_stats(records)
        left = compute_stats(records[:17])
        right = compute_stats(records[17:])
        assert whole.total_instances == left.total_instances + right.total_instances
        assert whole.total_conditions == left.total_conditions + right.total_conditions
        assert whole.total_duration_h == pytest.approx(
            left.total_duration_h + right.total_duration_h
        )

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            compute_stats([])


BALANCE_RE = re.compile(r"<\|(\w+)_(start|end)\|>")


def marker_pairs_balanced(seq: str) -> bool:
    open_kind = None
    for kind, edge in BALANCE_RE.findall(seq):
        if edge == "start":
            if open_kind is not None:
                return False
            open_kind = kind
        else:
            if open_kind != kind:
                return False
            open_kind = None
    return open_kind is None


class TestAssemble:
    def test_camera_only_single_span(self):
        record = make_record(kinds=(ConditionKind.CAMERA,))
        seq = assemble_condition_sequence(record)
        assert seq.count("<|camera_start|>") == 1
        assert seq.count("<|camera_end|>") == 1
        assert seq.endswith(record.short_caption)
        assert marker_pairs_balanced(seq)

    def test_pose_plus_identities_order(self):
        record = make_record(kinds=(ConditionKind.POSE, ConditionKind.IDENTITIES))
        seq = assemble_condition_sequence(record)
        motion = seq.index("<|motion_start|>")
        vision = seq.index("<|vision_start|>")
        assert motion < vision  # condition order preserved
        assert seq.count("<|vision_start|>") == 2  # one span per identity image
        assert marker_pairs_balanced(seq)

    def test_golden_sequence(self):
        record = make_record("r9", (ConditionKind.DEPTH, ConditionKind.CAMERA), short="A boat drifts.")
        assert assemble_condition_sequence(record) == (
            "<|vision_start|>[depth:depth.ref]<|vision_end|> "
            "<|camera_start|>[camera:camera.ref]<|camera_end|> "
            "A boat drifts."
        )


class TestManifest:
    def test_stage_defaults_follow_training_recipe(self):
        assert STAGE_ORDER == ("identities", "human_pose", "camera", "depth")
        assert [STAGE_DEFAULTS[s].joint_train_ratio for s in STAGE_ORDER] == [0.0, 0.4, 0.6, 0.8]
        assert STAGE_DEFAULTS["identities"].condition_dropout_rate == 0.4
        assert all(STAGE_DEFAULTS[s].sentence_dropout_rate == 0.6 for s in STAGE_ORDER)

    def test_invalid_ratio_rejected(self):
        with pytest.raises(ValueError):
            StageConfig("camera", 0.5)

    def test_invalid_stage_rejected(self):
        with pytest.raises(ValueError):
            StageConfig("warmup", 0.0)

    def test_ratio_zero_no_aux(self):
        records = [make_record(f"r{i}") for i in range(10)]
        manifest = build_manifest(records, ["aux1"], StageConfig("identities", 0.0), seed=1)
        assert all(e.source == "data" for e in manifest.entries)
        assert manifest.aux_fraction() == 0.0

    def test_ratio_08_interleaves_4_to_1(self):
        records = [make_record(f"r{i}") for i in range(20)]
        aux = [f"aux{i}" for i in range(100)]
        manifest = build_manifest(records, aux, StageConfig("depth", 0.8), seed=3)
        n_aux = sum(e.source == "aux" for e in manifest.entries)
        assert n_aux == 80
        assert len(manifest.entries) == 100

    @pytest.mark.parametrize("ratio", JOINT_TRAIN_RATIOS)
    def test_aux_fraction_within_one_record(self, ratio):
        records = [make_record(f"r{i}") for i in range(17)]
        aux = [f"aux{i}" for i in range(200)]
        stage = {0.0: "identities", 0.4: "human_pose", 0.6: "camera", 0.8: "depth"}[ratio]
        manifest = build_manifest(records, aux, StageConfig(stage, ratio), seed=5)
        assert abs(manifest.aux_fraction() - ratio) <= 1.0 / len(manifest.entries)

    def test_insufficient_aux_pool(self):
        records = [make_record(f"r{i}") for i in range(20)]
        with pytest.raises(ValueError, match="too small"):
            build_manifest(records, ["a1", "a2"], StageConfig("depth", 0.8), seed=0)

    def test_deterministic_bytes(self, tmp_path):
        records = [make_record(f"r{i}") for i in range(9)]
        aux = [f"aux{i}" for i in range(50)]
        paths = []
        for run in range(2):
            manifest = build_manifest(records, aux, StageConfig("camera", 0.6), seed=11)
            path = tmp_path / f"m{run}.jsonl"
            write_manifest(manifest, path)
            paths.append(path.read_bytes())
        assert paths[0] == paths[1]

    def test_different_seed_changes_order(self):
        records = [make_record(f"r{i}") for i in range(9)]
        aux = [f"aux{i}" for i in range(50)]
        a = build_manifest(records, aux, StageConfig("camera", 0.6), seed=1)
        b = build_manifest(records, aux, StageConfig("camera", 0.6), seed=2)
        assert a.entries != b.entries

    def test_entries_carry_stage_and_seed(self, tmp_path):
        records = [make_record(f"r{i}") for i in range(4)]
        manifest = build_manifest(records, ["a1", "a2", "a3"], StageConfig("human_pose", 0.4), seed=7)
        path = tmp_path / "m.jsonl"
        write_manifest(manifest, path)
        entries = read_manifest_entries(path)
        assert all(set(e) == {"source", "ref", "stage", "seed"} for e in entries)
        assert all(e["stage"] == "human_pose" and e["seed"] == 7 for e in entries)
        assert manifest.position == 2
