"""Structured caption data model: parsing, serialization, integrity scoring,
and the sentence/condition dropout augmentations used to build training data.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from typing import Iterator, Sequence

#: Canonical component order of a structured caption.
COMPONENTS = ("dense", "main_object", "background", "camera", "style", "action")

#: Exact section headers used by the headed-text serialization.
HEADERS = {
    "dense": "Dense Caption:",
    "main_object": "Main Object Caption:",
    "background": "Background Caption:",
    "camera": "Camera Caption:",
    "style": "Style Caption:",
    "action": "Action Caption:",
}

_HEADER_RE = re.compile(
    r"^\s*(dense|main\s+object|background|camera|style|action)\s+caption\s*:\s*(.*)$",
    re.IGNORECASE,
)


class CaptionParseError(ValueError):
    """Headed caption text that cannot be parsed (e.g. duplicate headers)."""


@dataclass(frozen=True)
class StructuredCaption:
    """Six-component video caption; absent components are ``None``.

    Component bodies are stored stripped of surrounding whitespace, so
    ``parse_structured_caption(serialize_structured_caption(c))`` recovers
    an equal value. A present component is never blank.
    """

    dense: str | None = None
    main_object: str | None = None
    background: str | None = None
    camera: str | None = None
    style: str | None = None
    action: str | None = None

    def __post_init__(self) -> None:
        for name in COMPONENTS:
            value = getattr(self, name)
            if value is None:
                continue
            stripped = value.strip()
            if not stripped:
                raise ValueError(f"component {name!r} is present but blank")
            object.__setattr__(self, name, stripped)

    def components(self) -> dict[str, str]:
        """Present components keyed by name, in canonical order."""
        return {
            name: getattr(self, name)
            for name in COMPONENTS
            if getattr(self, name) is not None
        }

    def missing_components(self) -> list[str]:
        """Names of absent components, in canonical order."""
        return [name for name in COMPONENTS if getattr(self, name) is None]


@dataclass(frozen=True)
class ParsedCaption:
    """Result of :func:`parse_structured_caption`.

    ``preamble_ignored`` flags text found before the first recognized header.
    """

    caption: StructuredCaption
    missing: list[str]
    preamble_ignored: bool


def parse_structured_caption(text: str) -> ParsedCaption:
    """Parse headed multi-section text into a :class:`StructuredCaption`.

    Header matching is case-insensitive and order-free; the body of a
    section runs until the next header or end of input. A section whose
    body is empty counts as missing. Text before the first header is
    ignored and flagged.

    Raises:
        CaptionParseError: on a duplicated section header.
    """
    sections: dict[str, list[str]] = {}
    current: str | None = None
    preamble_ignored = False
    # split on "\n" only: exotic line separators stay inside component bodies
    for line in text.split("\n"):
        match = _HEADER_RE.match(line)
        if match:
            key = re.sub(r"\s+", "_", match.group(1).lower())
            if key in sections:
                raise CaptionParseError(f"duplicate section header {HEADERS[key]!r}")
            sections[key] = [match.group(2)]
            current = key
        elif current is None:
            if line.strip():
                preamble_ignored = True
        else:
            sections[current].append(line)

    values = {}
    for key, lines in sections.items():
        body = "\n".join(lines).strip()
        if body:
            values[key] = body
    caption = StructuredCaption(**values)
    return ParsedCaption(caption, caption.missing_components(), preamble_ignored)


def serialize_structured_caption(caption: StructuredCaption) -> str:
    """Emit present components as headed blocks in canonical order."""
    return "\n".join(
        f"{HEADERS[name]} {body}" for name, body in caption.components().items()
    )


def _quantize2(value: Decimal) -> float:
    return float(value.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def structural_integrity(caption: StructuredCaption) -> float:
    """Percentage of the six components present, rounded half-up to 2 decimals."""
    return _quantize2(Decimal(100 * len(caption.components())) / 6)


def corpus_integrity(captions: Sequence[StructuredCaption]) -> float:
    """Arithmetic mean of per-caption structural integrity."""
    if not captions:
        raise ValueError("corpus_integrity requires a non-empty caption list")
    total = sum(
        (Decimal(100 * len(c.components())) / 6).quantize(
            Decimal("0.01"), rounding=ROUND_HALF_UP
        )
        for c in captions
    )
    return _quantize2(total / len(captions))


# Splits after sentence-final punctuation followed by whitespace. Abbreviations
# ("Dr. Smith") are not special-cased.
_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")


def split_sentences(text: str) -> list[str]:
    """Rule-based sentence split on ``. ! ?`` followed by whitespace."""
    stripped = text.strip()
    if not stripped:
        return []
    return _SENTENCE_SPLIT_RE.split(stripped)


def sentence_dropout(text: str, rate: float, seed: int) -> str:
    """Drop each sentence independently with probability ``rate``.

    Deterministic under ``seed``. At least one sentence is always retained:
    if the draw removes everything, one sentence is picked uniformly by the
    same generator. When nothing is dropped the input text is returned
    unchanged (whitespace included); otherwise retained sentences are joined
    with single spaces, preserving order.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"dropout rate must be in [0, 1], got {rate}")
    sentences = split_sentences(text)
    if not sentences:
        return text
    rng = random.Random(seed)
    kept = [s for s in sentences if not rng.random() < rate]
    if len(kept) == len(sentences):
        return text
    if not kept:
        kept = [sentences[rng.randrange(len(sentences))]]
    return " ".join(kept)


class ConditionKind(str, Enum):
    """The four non-text condition families."""

    DEPTH = "depth"
    IDENTITIES = "identities"
    POSE = "pose"
    CAMERA = "camera"


@dataclass(frozen=True)
class Condition:
    """One tagged condition; ``refs`` are opaque resource references.

    Only identity conditions may carry several refs (one per identity image).
    """

    kind: ConditionKind
    refs: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ConditionKind(self.kind))
        object.__setattr__(self, "refs", tuple(self.refs))
        if not self.refs:
            raise ValueError("condition requires at least one ref")
        if self.kind is not ConditionKind.IDENTITIES and len(self.refs) != 1:
            raise ValueError(
                f"{self.kind.value} condition takes exactly one ref, got {len(self.refs)}"
            )


@dataclass(frozen=True)
class ConditionSet:
    """Ordered collection of conditions; empty means text-only input.

    Non-identity kinds may appear at most once.
    """

    items: tuple[Condition, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        seen: set[ConditionKind] = set()
        for item in self.items:
            if item.kind is ConditionKind.IDENTITIES:
                continue
            if item.kind in seen:
                raise ValueError(f"repeated {item.kind.value} condition")
            seen.add(item.kind)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[Condition]:
        return iter(self.items)

    def kinds(self) -> list[ConditionKind]:
        """Distinct kinds in first-appearance order."""
        out: list[ConditionKind] = []
        for item in self.items:
            if item.kind not in out:
                out.append(item.kind)
        return out


def condition_dropout(conditions: ConditionSet, rate: float, seed: int) -> ConditionSet:
    """Drop condition items independently with probability ``rate``.

    Mirrors :func:`sentence_dropout`: deterministic under ``seed``, order
    preserving, and at least one item survives when the input is non-empty.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"dropout rate must be in [0, 1], got {rate}")
    items = conditions.items
    if not items:
        return conditions
    rng = random.Random(seed)
    kept = [c for c in items if not rng.random() < rate]
    if not kept:
        kept = [items[rng.randrange(len(items))]]
    return ConditionSet(tuple(kept))
