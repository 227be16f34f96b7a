"""Versioned prompt templates with ``{{slot}}`` substitution and
constraint checking for generated short prompts.

Templates ship as text assets next to this module; custom template
directories can be loaded with the same manifest layout.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

from .lexical import tokenize

_SLOT_RE = re.compile(r"\{\{(\w+)\}\}")


class TemplateError(ValueError):
    """Template lookup, validation, or rendering failure."""


@dataclass(frozen=True)
class ForbiddenPattern:
    """Named regex flagged as a constraint violation when it matches."""

    name: str
    pattern: str


@dataclass(frozen=True)
class TemplateConstraints:
    max_words: int | None = None
    forbidden: tuple[ForbiddenPattern, ...] = ()


@dataclass(frozen=True)
class PromptTemplate:
    """A versioned judge-prompt template.

    Every ``{{slot}}`` appearing in the body must be declared in ``slots``.
    """

    id: str
    version: int
    condition_kind: str | None
    body: str
    slots: tuple[str, ...]
    constraints: TemplateConstraints = field(default_factory=TemplateConstraints)

    def __post_init__(self) -> None:
        object.__setattr__(self, "slots", tuple(self.slots))
        if self.version < 1:
            raise TemplateError(f"{self.id}: version must be >= 1")
        used = set(_SLOT_RE.findall(self.body))
        undeclared = used - set(self.slots)
        if undeclared:
            raise TemplateError(
                f"{self.id}: body uses undeclared slots {sorted(undeclared)}"
            )


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str


def render_prompt(template: PromptTemplate, inputs: Mapping[str, str]) -> str:
    """Substitute all slots; unknown input keys are ignored."""
    missing = [slot for slot in set(_SLOT_RE.findall(template.body)) if slot not in inputs]
    if missing:
        raise TemplateError(
            f"{template.id}: missing slot value(s) {sorted(missing)}"
        )
    return _SLOT_RE.sub(lambda m: str(inputs[m.group(1)]), template.body)


def check_prompt_constraints(short_caption: str, template: PromptTemplate) -> list[Violation]:
    """Word-count and forbidden-content checks declared by the template."""
    violations = []
    constraints = template.constraints
    if constraints.max_words is not None:
        words = len(tokenize(short_caption))
        if words > constraints.max_words:
            violations.append(
                Violation(
                    "max_words",
                    f"{words} words exceeds the {constraints.max_words}-word limit",
                )
            )
    for rule in constraints.forbidden:
        match = re.search(rule.pattern, short_caption, re.IGNORECASE)
        if match:
            violations.append(
                Violation(rule.name, f"matched forbidden content {match.group(0)!r}")
            )
    return violations


def _load_manifest(root) -> list[PromptTemplate]:
    manifest = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    templates = []
    for entry in manifest["templates"]:
        constraints = entry.get("constraints", {})
        templates.append(
            PromptTemplate(
                id=entry["id"],
                version=int(entry["version"]),
                condition_kind=entry.get("condition_kind"),
                body=(root / entry["file"]).read_text(encoding="utf-8"),
                slots=tuple(entry["slots"]),
                constraints=TemplateConstraints(
                    max_words=constraints.get("max_words"),
                    forbidden=tuple(
                        ForbiddenPattern(p["name"], p["pattern"])
                        for p in constraints.get("forbidden", [])
                    ),
                ),
            )
        )
    seen = set()
    for t in templates:
        key = (t.id, t.version)
        if key in seen:
            raise TemplateError(f"duplicate template {t.id} v{t.version}")
        seen.add(key)
    return templates


def builtin_templates() -> list[PromptTemplate]:
    """Templates bundled with the package."""
    return _load_manifest(resources.files("condcap") / "templates")


def load_template_dir(path: str | Path) -> list[PromptTemplate]:
    """Load a user template directory laid out like the bundled assets."""
    return _load_manifest(Path(path))


def get_template(
    template_id: str,
    version: int | None = None,
    templates: list[PromptTemplate] | None = None,
) -> PromptTemplate:
    """Fetch a template by id; latest version unless pinned."""
    pool = templates if templates is not None else builtin_templates()
    matches = [t for t in pool if t.id == template_id]
    if not matches:
        raise TemplateError(f"unknown template {template_id!r}")
    if version is None:
        return max(matches, key=lambda t: t.version)
    for t in matches:
        if t.version == version:
            return t
    raise TemplateError(f"template {template_id!r} has no version {version}")
