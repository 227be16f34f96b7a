from __future__ import annotations

import pytest

from condcap.prompts import (
    ForbiddenPattern,
    PromptTemplate,
    TemplateConstraints,
    TemplateError,
    builtin_templates,
    check_prompt_constraints,
    get_template,
    render_prompt,
)


class TestBuiltins:
    def test_all_expected_ids_present(self):
        ids = {t.id for t in builtin_templates()}
        assert ids == {
            "shortprompt_multi_id",
            "shortprompt_depth",
            "ir_intent",
            "ir_qa_build",
            "ir_answer",
            "ir_grade",
        }

    def test_versions_positive(self):
        assert all(t.version >= 1 for t in builtin_templates())

    def test_multi_id_prompt_carries_repetition_rule(self):
        template = get_template("shortprompt_multi_id")
        prompt = render_prompt(
            template,
            {"structured_caption": "A woman walks.", "condition_context": "two identity images"},
        )
        assert "Avoid repeating information that can be inferred from the reference images" in prompt
        assert "A woman walks." in prompt

    def test_depth_prompt_carries_word_limit(self):
        template = get_template("shortprompt_depth")
        assert template.constraints.max_words == 100
        prompt = render_prompt(
            template,
            {"structured_caption": "A dog runs.", "condition_context": "4 depth maps"},
        )
        assert "not exceeding 100" in prompt


class TestRendering:
    def test_missing_slot_names_it(self):
        template = get_template("shortprompt_depth")
        with pytest.raises(TemplateError, match="condition_context"):
            render_prompt(template, {"structured_caption": "x"})

    def test_extra_inputs_ignored(self):
        template = PromptTemplate("t", 1, None, "Hello {{name}}", ("name",))
        assert render_prompt(template, {"name": "world", "unused": "y"}) == "Hello world"

    def test_undeclared_slot_in_body_rejected(self):
        with pytest.raises(TemplateError, match="undeclared"):
            PromptTemplate("t", 1, None, "Hi {{who}}", ())

    def test_bad_version_rejected(self):
        with pytest.raises(TemplateError):
            PromptTemplate("t", 0, None, "x", ())


class TestLookup:
    def test_unknown_id(self):
        with pytest.raises(TemplateError, match="unknown template"):
            get_template("nope")

    def test_unknown_version(self):
        with pytest.raises(TemplateError, match="no version"):
            get_template("ir_intent", version=99)

    def test_latest_version_wins(self):
        pool = [
            PromptTemplate("x", 1, None, "old", ()),
            PromptTemplate("x", 2, None, "new", ()),
        ]
        assert get_template("x", templates=pool).body == "new"
        assert get_template("x", version=1, templates=pool).body == "old"


class TestConstraints:
    def test_word_count_ok(self):
        template = get_template("shortprompt_depth")
        prompt = " ".join(["word"] * 80)
        assert check_prompt_constraints(prompt, template) == []

    def test_word_count_violation(self):
        template = get_template("shortprompt_depth")
        prompt = " ".join(["word"] * 120)
        violations = check_prompt_constraints(prompt, template)
        assert [v.kind for v in violations] == ["max_words"]
        assert "120" in violations[0].message

    def test_repetition_rule_flags_appearance_terms(self):
        template = get_template("shortprompt_multi_id")
        violations = check_prompt_constraints(
            "The woman wearing a red dress walks along the shore.", template
        )
        assert [v.kind for v in violations] == ["identity_appearance_repetition"]
        assert "wearing" in violations[0].message

    def test_no_limit_means_no_word_violation(self):
        template = get_template("shortprompt_multi_id")
        prompt = " ".join(["calm"] * 500)
        assert check_prompt_constraints(prompt, template) == []

    def test_custom_forbidden_pattern(self):
        template = PromptTemplate(
            "t",
            1,
            None,
            "body",
            (),
            TemplateConstraints(forbidden=(ForbiddenPattern("no_digits", r"\d+"),)),
        )
        violations = check_prompt_constraints("scene 42", template)
        assert [v.kind for v in violations] == ["no_digits"]
