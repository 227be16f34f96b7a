from __future__ import annotations

import json
from pathlib import Path

import pytest

from condcap.captions import Condition, ConditionKind, ConditionSet, StructuredCaption
from condcap.irscore import (
    AspectBreakdown,
    IntentAspect,
    JudgeVerdict,
    PipelineStepError,
    QAPair,
    aggregate,
    answer_from_caption,
    build_qa_pairs,
    extract_intent,
    grade,
    run_irscore,
    summarize_conditions,
)
from condcap.judge import (
    JudgeClient,
    JudgeSchemaError,
    ReplayCache,
    ReplayJudgeClient,
    validate_response,
)


class ScriptedJudge(JudgeClient):
    """Pops canned responses per schema id, validating like a real client."""

    def __init__(self, script: dict[str, list[dict]]):
        self.script = {k: list(v) for k, v in script.items()}
        self.requests = []

    def complete(self, request):
        self.requests.append(request)
        queue = self.script.get(request.schema_id)
        if not queue:
            raise AssertionError(f"no scripted response for {request.schema_id}")
        return validate_response(request.schema_id, queue.pop(0))


def intent_payload(**aspects: str) -> dict:
    return {"aspects": [{"aspect": k, "note": v} for k, v in aspects.items()]}


class TestTypes:
    def test_question_must_end_with_mark(self):
        with pytest.raises(ValueError):
            QAPair(IntentAspect.SUBJECT, "No mark", "x")

    def test_gt_answer_non_empty(self):
        with pytest.raises(ValueError):
            QAPair(IntentAspect.SUBJECT, "Q?", "  ")

    def test_quality_bounds(self):
        with pytest.raises(ValueError):
            JudgeVerdict(True, 6)
        with pytest.raises(ValueError):
            JudgeVerdict(True, -1)


class TestAggregate:
    def test_worked_example(self):
        pairs = [
            (QAPair(IntentAspect.SUBJECT, "Q1?", "a"), JudgeVerdict(True, 4)),
            (QAPair(IntentAspect.CAMERA, "Q2?", "b"), JudgeVerdict(False, 2)),
            (QAPair(IntentAspect.SUBJECT, "Q3?", "c"), JudgeVerdict(True, 3)),
        ]
        report = aggregate(pairs)
        assert report.n_pairs == 3
        assert report.to_dict()["accuracy"] == 66.67
        assert report.to_dict()["mean_quality"] == 3.0
        assert report.per_aspect["subject"] == AspectBreakdown(2, 100.0, 3.5)

    def test_all_correct(self):
        pairs = [
            (QAPair(IntentAspect.STYLE, "Q?", "a"), JudgeVerdict(True, 5)) for _ in range(4)
        ]
        report = aggregate(pairs)
        assert report.accuracy == 100.0
        assert report.mean_quality == 5.0

    def test_permutation_invariant(self):
        pairs = [
            (QAPair(IntentAspect.SUBJECT, f"Q{i}?", "a"), JudgeVerdict(i % 2 == 0, i % 6))
            for i in range(10)
        ]
        fwd = aggregate(pairs)
        rev = aggregate(list(reversed(pairs)))
        assert fwd.accuracy == rev.accuracy
        assert fwd.mean_quality == rev.mean_quality
        assert fwd.per_aspect == rev.per_aspect

    def test_overall_is_weighted_mean_of_aspects(self):
        pairs = [
            (QAPair(IntentAspect.SUBJECT, "Q?", "a"), JudgeVerdict(True, 5)),
            (QAPair(IntentAspect.SUBJECT, "Q?", "a"), JudgeVerdict(False, 1)),
            (QAPair(IntentAspect.CAMERA, "Q?", "a"), JudgeVerdict(True, 3)),
        ]
        report = aggregate(pairs)
        weighted = sum(s.accuracy * s.n_pairs for s in report.per_aspect.values()) / report.n_pairs
        assert report.accuracy == pytest.approx(weighted)

    def test_empty_is_error(self):
        with pytest.raises(ValueError):
            aggregate([])

    def test_200_verdicts_match_independent_fold(self):
        import random

        rng = random.Random(0)
        pairs = []
        for i in range(200):
            aspect = rng.choice(list(IntentAspect))
            pairs.append(
                (QAPair(aspect, f"Q{i}?", "a"), JudgeVerdict(rng.random() < 0.7, rng.randint(0, 5)))
            )
        report = aggregate(pairs)
        n_correct = sum(1 for _, v in pairs if v.correct)
        q_total = sum(v.quality for _, v in pairs)
        assert report.accuracy == pytest.approx(100 * n_correct / 200)
        assert report.mean_quality == pytest.approx(q_total / 200)


class TestSteps:
    def test_extract_intent(self):
        judge = ScriptedJudge(
            {"ir_intent.v1": [intent_payload(subject="a woman", camera="moves back")]}
        )
        out = extract_intent("A woman walks.", ["camera trajectory: c.txt"], judge)
        assert out == {
            IntentAspect.SUBJECT: "a woman",
            IntentAspect.CAMERA: "moves back",
        }
        prompt = judge.requests[0].prompt_text
        assert "A woman walks." in prompt
        assert "camera trajectory: c.txt" in prompt

    def test_extract_intent_empty_prompt(self):
        with pytest.raises(ValueError):
            extract_intent("  ", [], ScriptedJudge({}))

    def test_extract_intent_malformed_reply(self):
        judge = ScriptedJudge({"ir_intent.v1": [{"aspects": [{"aspect": "color", "note": "x"}]}]})
        with pytest.raises(JudgeSchemaError):
            extract_intent("A woman walks.", [], judge)

    def test_build_qa_pairs_roundtrip(self, full_caption):
        payload = {
            "pairs": [
                {"aspect": "subject", "question": "What does she wear?", "gt_answer": "A hat."},
                {"aspect": "camera", "question": "How does it move?", "gt_answer": "Backward."},
            ]
        }
        judge = ScriptedJudge({"ir_qa_pairs.v1": [payload]})
        pairs = build_qa_pairs(
            full_caption,
            {IntentAspect.SUBJECT: "woman", IntentAspect.CAMERA: "backward"},
            judge,
        )
        assert [p.aspect for p in pairs] == [IntentAspect.SUBJECT, IntentAspect.CAMERA]

    def test_build_qa_pairs_missing_aspect_rejected(self, full_caption):
        payload = {
            "pairs": [{"aspect": "subject", "question": "Q?", "gt_answer": "A."}]
        }
        judge = ScriptedJudge({"ir_qa_pairs.v1": [payload]})
        with pytest.raises(JudgeSchemaError, match="no QA pairs"):
            build_qa_pairs(full_caption, [IntentAspect.SUBJECT, IntentAspect.CAMERA], judge)

    def test_build_qa_pairs_unrequested_aspect_rejected(self, full_caption):
        payload = {
            "pairs": [
                {"aspect": "subject", "question": "Q?", "gt_answer": "A."},
                {"aspect": "style", "question": "Q2?", "gt_answer": "B."},
            ]
        }
        judge = ScriptedJudge({"ir_qa_pairs.v1": [payload]})
        with pytest.raises(JudgeSchemaError, match="unrequested"):
            build_qa_pairs(full_caption, [IntentAspect.SUBJECT], judge)

    def test_build_qa_pairs_no_aspects(self, full_caption):
        with pytest.raises(ValueError):
            build_qa_pairs(full_caption, [], ScriptedJudge({}))

    def test_answer_from_caption(self, full_caption):
        judge = ScriptedJudge({"ir_answer.v1": [{"answer": "Light blue."}]})
        out = answer_from_caption(full_caption, "What color is the shirt?", judge)
        assert out == "Light blue."

    def test_answer_requires_caption_content(self):
        with pytest.raises(ValueError):
            answer_from_caption(StructuredCaption(), "Q?", ScriptedJudge({}))

    def test_answer_requires_question(self, full_caption):
        with pytest.raises(ValueError):
            answer_from_caption(full_caption, " ", ScriptedJudge({}))

    def test_grade(self):
        judge = ScriptedJudge(
            {"ir_verdict.v1": [{"correct": True, "quality": 5, "rationale": "same"}]}
        )
        verdict = grade("Q?", "Light blue.", "Light blue.", judge)
        assert verdict == JudgeVerdict(True, 5, "same")

    def test_grade_rejects_empty(self):
        with pytest.raises(ValueError):
            grade("Q?", "", "x", ScriptedJudge({}))


class TestSummaries:
    def test_order_and_format(self):
        cs = ConditionSet(
            (
                Condition(ConditionKind.CAMERA, ("c.txt",)),
                Condition(ConditionKind.IDENTITIES, ("a.png", "b.png")),
                Condition(ConditionKind.DEPTH, ("d.bin",)),
                Condition(ConditionKind.POSE, ("p.jsonl",)),
            )
        )
        assert summarize_conditions(cs) == [
            "camera trajectory: c.txt",
            "identity images: a.png, b.png",
            "depth sequence: d.bin",
            "human pose track: p.jsonl",
        ]


def scripted_full_run(full_caption):
    intent = intent_payload(subject="the woman", camera="camera behavior")
    qa = {
        "pairs": [
            {"aspect": "subject", "question": "What does she adjust?", "gt_answer": "Her hat."},
            {"aspect": "camera", "question": "How does the camera move?", "gt_answer": "Backward."},
        ]
    }
    answers = [{"answer": "Her hat."}, {"answer": "unanswerable"}]
    verdicts = [
        {"correct": True, "quality": 5, "rationale": "exact"},
        {"correct": False, "quality": 0, "rationale": "missing"},
    ]
    return ScriptedJudge(
        {
            "ir_intent.v1": [intent],
            "ir_qa_pairs.v1": [qa],
            "ir_answer.v1": answers,
            "ir_verdict.v1": verdicts,
        }
    )


DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="module")
def replay():
    return ReplayJudgeClient(ReplayCache(DATA / "ir_replay_cache.jsonl"))


@pytest.fixture(scope="module")
def gt_records():
    from condcap.dataset import read_records

    return {r.id: r for r in read_records(DATA / "ir_gt_records.jsonl")}


@pytest.fixture(scope="module")
def pred_records():
    from condcap.dataset import read_records

    return {r.id: r for r in read_records(DATA / "ir_pred_records.jsonl")}


class TestReplayFixture:
    """Drives the pipeline steps against the bundled recorded judge calls."""

    def test_intent_walking_woman_with_camera(self, replay, gt_records):
        record = gt_records["r004"]
        aspects = extract_intent(
            record.short_caption, summarize_conditions(record.conditions), replay
        )
        assert set(aspects) == {
            IntentAspect.SUBJECT,
            IntentAspect.MOVEMENT,
            IntentAspect.CAMERA,
            IntentAspect.BACKGROUND,
        }

    def test_intent_style_only_prompt_without_conditions(self, replay):
        aspects = extract_intent("A watercolor style clip of a lighthouse.", [], replay)
        assert set(aspects) == {IntentAspect.SUBJECT, IntentAspect.STYLE}

    def test_qa_pairs_for_hat_adjusting_woman(self, replay, gt_records):
        record = gt_records["r001"]
        aspects = extract_intent(
            record.short_caption, summarize_conditions(record.conditions), replay
        )
        pairs = build_qa_pairs(record.structured_caption, aspects, replay)
        as_tuples = {(p.question, p.gt_answer) for p in pairs}
        assert ("What color is the young woman's T-shirt?", "Light blue.") in as_tuples
        assert ("How does the camera follow the young woman?", "Moving backward") in as_tuples

    def test_full_replay_run_is_deterministic(self, replay, gt_records, pred_records):
        gt, pred = gt_records["r002"], pred_records["r002"]
        runs = [
            run_irscore(
                gt.structured_caption,
                pred.structured_caption,
                gt.short_caption,
                summarize_conditions(gt.conditions),
                replay,
            )
            for _ in range(2)
        ]
        assert runs[0].report == runs[1].report
        assert runs[0].report.accuracy == 100.0

    def test_absent_detail_answered_unanswerable(self, replay, gt_records, pred_records):
        # r003's candidate caption lacks the style component
        gt, pred = gt_records["r003"], pred_records["r003"]
        run = run_irscore(
            gt.structured_caption,
            pred.structured_caption,
            gt.short_caption,
            summarize_conditions(gt.conditions),
            replay,
        )
        style_answers = [
            answer
            for pair, answer in zip(run.pairs, run.answers)
            if pair.aspect is IntentAspect.STYLE
        ]
        assert style_answers and all(a == "unanswerable" for a in style_answers)
        assert run.report.per_aspect["style"].accuracy == 0.0

    def test_verbatim_answer_graded_correct_quality_5(self, replay, gt_records, pred_records):
        gt, pred = gt_records["r002"], pred_records["r002"]
        run = run_irscore(
            gt.structured_caption,
            pred.structured_caption,
            gt.short_caption,
            summarize_conditions(gt.conditions),
            replay,
        )
        verdict = run.verdicts[0]
        assert verdict.correct and verdict.quality == 5

    def test_incomplete_cache_raises_miss_naming_call(self, tmp_path, gt_records, pred_records):
        lines = (DATA / "ir_replay_cache.jsonl").read_text().splitlines()
        kept = [
            line
            for line in lines
            if "What is the color of the underwater scene?" not in line
            or json.loads(line)["request"]["template_id"] != "ir_grade"
        ]
        assert len(kept) == len(lines) - 1
        partial = tmp_path / "partial.jsonl"
        partial.write_text("\n".join(kept) + "\n")
        judge = ReplayJudgeClient(ReplayCache(partial))
        gt, pred = gt_records["r002"], pred_records["r002"]
        with pytest.raises(PipelineStepError) as err:
            run_irscore(
                gt.structured_caption,
                pred.structured_caption,
                gt.short_caption,
                summarize_conditions(gt.conditions),
                judge,
            )
        assert err.value.step == "answer_grading"
        assert "replay cache miss" in str(err.value)


class TestRun:
    def test_composes_all_steps(self, full_caption, tmp_path):
        judge = scripted_full_run(full_caption)
        run = run_irscore(
            gt_caption=full_caption,
            pred_caption=full_caption,
            short_prompt="A woman walks down a corridor.",
            condition_summaries=["camera trajectory: c.txt"],
            judge=judge,
            audit_dir=tmp_path / "audit",
        )
        assert run.report.n_pairs == 2
        assert run.report.accuracy == pytest.approx(50.0)
        assert run.answers == ["Her hat.", "unanswerable"]
        written = sorted(p.name for p in (tmp_path / "audit").iterdir())
        assert written == [
            "answers.json",
            "aspects.json",
            "qa_pairs.json",
            "report.json",
            "verdicts.json",
        ]
        report = json.loads((tmp_path / "audit" / "report.json").read_text())
        assert report["accuracy"] == 50.0

    def test_step_error_names_the_step(self, full_caption):
        judge = ScriptedJudge({"ir_intent.v1": [{"aspects": [{"aspect": "hue", "note": "x"}]}]})
        with pytest.raises(PipelineStepError) as err:
            run_irscore(full_caption, full_caption, "p", [], judge)
        assert err.value.step == "intent_extraction"

    def test_parallel_answers_match_serial(self, full_caption):
        serial = run_irscore(
            full_caption, full_caption, "p", [], scripted_full_run(full_caption)
        )
        # scripted queues are positional, so parallel workers must preserve
        # pair order for the same outcome
        parallel = run_irscore(
            full_caption, full_caption, "p", [], scripted_full_run(full_caption), max_workers=1
        )
        assert serial.report == parallel.report
