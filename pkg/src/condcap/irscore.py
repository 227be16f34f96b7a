"""Intent-reasoning caption scoring.

A judge decomposes the evaluation into four steps: extract the intent
aspects behind a request, build QA pairs from the reference caption,
answer each question from the candidate caption alone, and grade the
answers for correctness and quality. Aggregates report accuracy (percent
correct) and mean quality (0-5) overall and per aspect.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .captions import (
    Condition,
    ConditionKind,
    ConditionSet,
    StructuredCaption,
    serialize_structured_caption,
)
from .judge import JudgeClient, JudgeRequest, JudgeSchemaError
from .prompts import PromptTemplate, get_template, render_prompt


class IntentAspect(str, Enum):
    """The six intent aspects, a closed enumeration."""

    SUBJECT = "subject"
    BACKGROUND = "background"
    MOVEMENT = "movement"
    CAMERA = "camera"
    INTERACTION = "interaction"
    STYLE = "style"


ASPECT_ORDER = tuple(IntentAspect)


@dataclass(frozen=True)
class QAPair:
    aspect: IntentAspect
    question: str
    gt_answer: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "aspect", IntentAspect(self.aspect))
        if not self.question.endswith("?"):
            raise ValueError(f"question must end with '?': {self.question!r}")
        if not self.gt_answer.strip():
            raise ValueError("gt_answer must be non-empty")


@dataclass(frozen=True)
class JudgeVerdict:
    correct: bool
    quality: int
    rationale: str = ""

    def __post_init__(self) -> None:
        if not isinstance(self.quality, int) or not 0 <= self.quality <= 5:
            raise ValueError(f"quality must be an integer in 0..5, got {self.quality!r}")


@dataclass(frozen=True)
class AspectBreakdown:
    n_pairs: int
    accuracy: float
    mean_quality: float


@dataclass(frozen=True)
class IRReport:
    accuracy: float
    mean_quality: float
    per_aspect: dict[str, AspectBreakdown]
    n_pairs: int

    def to_dict(self) -> dict:
        """Report values rounded half-up to 2 decimals, deterministic order."""
        return {
            "accuracy": round_score(self.accuracy),
            "mean_quality": round_score(self.mean_quality),
            "n_pairs": self.n_pairs,
            "per_aspect": {
                name: {
                    "n_pairs": stats.n_pairs,
                    "accuracy": round_score(stats.accuracy),
                    "mean_quality": round_score(stats.mean_quality),
                }
                for name, stats in sorted(self.per_aspect.items())
            },
        }


def round_score(value: float) -> float:
    """Round half-up to 2 decimals, the reporting precision for scores."""
    return float(Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


class PipelineStepError(RuntimeError):
    """A pipeline step failed; names the step and chains the cause."""

    def __init__(self, step: str, cause: BaseException) -> None:
        super().__init__(f"{step}: {cause}")
        self.step = step
        self.cause = cause


@contextmanager
def _step(name: str):
    try:
        yield
    except PipelineStepError:
        raise
    except Exception as exc:
        raise PipelineStepError(name, exc) from exc


def summarize_conditions(conditions: ConditionSet | Iterable[Condition]) -> list[str]:
    """One-line textual summaries of non-text conditions, in order."""
    lines = []
    for item in conditions:
        if item.kind is ConditionKind.CAMERA:
            lines.append(f"camera trajectory: {item.refs[0]}")
        elif item.kind is ConditionKind.DEPTH:
            lines.append(f"depth sequence: {item.refs[0]}")
        elif item.kind is ConditionKind.POSE:
            lines.append(f"human pose track: {item.refs[0]}")
        else:
            lines.append(f"identity images: {', '.join(item.refs)}")
    return lines


def extract_intent(
    short_prompt: str,
    condition_summaries: Sequence[str],
    judge: JudgeClient,
    templates: list[PromptTemplate] | None = None,
) -> dict[IntentAspect, str]:
    """Step 1: which of the six aspects does the request constrain."""
    if not short_prompt.strip():
        raise ValueError("short_prompt must be non-empty")
    template = get_template("ir_intent", templates=templates)
    prompt = render_prompt(
        template,
        {
            "short_prompt": short_prompt,
            "condition_summaries": "\n".join(condition_summaries) if condition_summaries else "(none)",
        },
    )
    payload = judge.complete(
        JudgeRequest(template.id, template.version, prompt, "ir_intent.v1")
    )
    return {IntentAspect(item["aspect"]): item["note"] for item in payload["aspects"]}


def build_qa_pairs(
    gt_caption: StructuredCaption,
    aspects: Mapping[IntentAspect, str] | Sequence[IntentAspect],
    judge: JudgeClient,
    templates: list[PromptTemplate] | None = None,
) -> list[QAPair]:
    """Step 2: aspect-tagged QA pairs answerable from the reference caption."""
    if isinstance(aspects, Mapping):
        aspect_lines = [f"- {a.value}: {note}" for a, note in aspects.items()]
        requested = set(aspects)
    else:
        aspect_lines = [f"- {IntentAspect(a).value}" for a in aspects]
        requested = {IntentAspect(a) for a in aspects}
    if not requested:
        raise ValueError("at least one aspect is required")
    template = get_template("ir_qa_build", templates=templates)
    prompt = render_prompt(
        template,
        {
            "caption": serialize_structured_caption(gt_caption),
            "aspects": "\n".join(aspect_lines),
        },
    )
    payload = judge.complete(
        JudgeRequest(template.id, template.version, prompt, "ir_qa_pairs.v1")
    )
    pairs = [
        QAPair(IntentAspect(p["aspect"]), p["question"], p["gt_answer"])
        for p in payload["pairs"]
    ]
    returned = {p.aspect for p in pairs}
    if not requested <= returned:
        missing = sorted(a.value for a in requested - returned)
        raise JudgeSchemaError(f"judge produced no QA pairs for aspect(s) {missing}", raw=payload)
    if not returned <= requested:
        extra = sorted(a.value for a in returned - requested)
        raise JudgeSchemaError(f"judge produced QA pairs for unrequested aspect(s) {extra}", raw=payload)
    return pairs


def answer_from_caption(
    pred_caption: StructuredCaption,
    question: str,
    judge: JudgeClient,
    templates: list[PromptTemplate] | None = None,
) -> str:
    """Step 3: answer a question from the candidate caption alone."""
    if not question.strip():
        raise ValueError("question must be non-empty")
    if not pred_caption.components():
        raise ValueError("candidate caption has no components to answer from")
    template = get_template("ir_answer", templates=templates)
    prompt = render_prompt(
        template,
        {"caption": serialize_structured_caption(pred_caption), "question": question},
    )
    payload = judge.complete(
        JudgeRequest(template.id, template.version, prompt, "ir_answer.v1")
    )
    return payload["answer"]


def grade(
    question: str,
    gt_answer: str,
    pred_answer: str,
    judge: JudgeClient,
    templates: list[PromptTemplate] | None = None,
) -> JudgeVerdict:
    """Step 4: correctness and 0-5 quality for one answer."""
    for name, value in (("question", question), ("gt_answer", gt_answer), ("pred_answer", pred_answer)):
        if not value.strip():
            raise ValueError(f"{name} must be non-empty")
    template = get_template("ir_grade", templates=templates)
    prompt = render_prompt(
        template,
        {"question": question, "gt_answer": gt_answer, "pred_answer": pred_answer},
    )
    payload = judge.complete(
        JudgeRequest(template.id, template.version, prompt, "ir_verdict.v1")
    )
    return JudgeVerdict(payload["correct"], payload["quality"], payload.get("rationale", ""))


def aggregate(verdicts: Sequence[tuple[QAPair, JudgeVerdict]]) -> IRReport:
    """Accuracy and mean quality over all pairs, with per-aspect breakdown."""
    if not verdicts:
        raise ValueError("aggregate requires at least one verdict")
    by_aspect: dict[str, list[JudgeVerdict]] = {}
    for pair, verdict in verdicts:
        by_aspect.setdefault(pair.aspect.value, []).append(verdict)
    per_aspect = {
        aspect: AspectBreakdown(
            n_pairs=len(vs),
            accuracy=100.0 * sum(v.correct for v in vs) / len(vs),
            mean_quality=sum(v.quality for v in vs) / len(vs),
        )
        for aspect, vs in by_aspect.items()
    }
    n = len(verdicts)
    return IRReport(
        accuracy=100.0 * sum(v.correct for _, v in verdicts) / n,
        mean_quality=sum(v.quality for _, v in verdicts) / n,
        per_aspect=per_aspect,
        n_pairs=n,
    )


@dataclass(frozen=True)
class IRRun:
    """All intermediate artifacts of one intent-reasoning evaluation."""

    aspects: dict[IntentAspect, str]
    pairs: list[QAPair]
    answers: list[str]
    verdicts: list[JudgeVerdict]
    report: IRReport


def run_irscore(
    gt_caption: StructuredCaption,
    pred_caption: StructuredCaption,
    short_prompt: str,
    condition_summaries: Sequence[str],
    judge: JudgeClient,
    templates: list[PromptTemplate] | None = None,
    max_workers: int = 1,
    audit_dir: str | Path | None = None,
) -> IRRun:
    """Compose the four steps end to end.

    Answer/grade calls for independent QA pairs run concurrently up to
    ``max_workers``. With ``audit_dir`` set, every intermediate artifact is
    written out as JSON for audit.
    """
    with _step("intent_extraction"):
        aspects = extract_intent(short_prompt, condition_summaries, judge, templates)
    with _step("qa_construction"):
        pairs = build_qa_pairs(gt_caption, aspects, judge, templates)

    def _answer_and_grade(pair: QAPair) -> tuple[str, JudgeVerdict]:
        with _step("answer_generation"):
            answer = answer_from_caption(pred_caption, pair.question, judge, templates)
        with _step("answer_grading"):
            verdict = grade(pair.question, pair.gt_answer, answer, judge, templates)
        return answer, verdict

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(_answer_and_grade, pairs))
    else:
        results = [_answer_and_grade(pair) for pair in pairs]
    answers = [answer for answer, _ in results]
    verdicts = [verdict for _, verdict in results]
    report = aggregate(list(zip(pairs, verdicts)))

    run = IRRun(aspects, pairs, answers, verdicts, report)
    if audit_dir is not None:
        _write_audit(run, Path(audit_dir))
    return run


def _write_audit(run: IRRun, audit_dir: Path) -> None:
    audit_dir.mkdir(parents=True, exist_ok=True)
    artifacts = {
        "aspects.json": {a.value: note for a, note in run.aspects.items()},
        "qa_pairs.json": [
            {"aspect": p.aspect.value, "question": p.question, "gt_answer": p.gt_answer}
            for p in run.pairs
        ],
        "answers.json": run.answers,
        "verdicts.json": [
            {"correct": v.correct, "quality": v.quality, "rationale": v.rationale}
            for v in run.verdicts
        ],
        "report.json": run.report.to_dict(),
    }
    for name, payload in artifacts.items():
        (audit_dir / name).write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
