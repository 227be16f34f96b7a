from __future__ import annotations

import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from condcap import _porter
from condcap.lexical import (
    EmptyInputWarning,
    bleu_n,
    corpus_lexical,
    meteor,
    meteor_stats,
    rouge_l,
    tokenize,
)

token_lists = st.lists(st.sampled_from("abcdefgh"), min_size=1, max_size=12)


class TestTokenize:
    def test_strips_punctuation_and_lowercases(self):
        assert tokenize("The cat, sat.") == ["the", "cat", "sat"]

    def test_empty(self):
        assert tokenize("") == []
        assert tokenize("...  !!") == []

    def test_twelve_word_sentence(self):
        text = "The quick brown fox jumps over the lazy dog near the river."
        assert len(tokenize(text)) == 12


class TestBleu:
    def test_identity_scores_100(self):
        seq = ["a", "cat", "sat", "on", "a", "mat"]
        for n in (1, 2, 3, 4):
            assert bleu_n(seq, seq, n) == pytest.approx(100.0)

    def test_disjoint_vocabularies(self):
        assert bleu_n(["a", "b"], ["c", "d"], 2) == 0.0

    def test_clipped_counts(self):
        # 1-gram precision is clipped to 1/3; the 2-gram precision is 0
        assert bleu_n(["the", "the", "the"], ["the", "cat"], 2) == 0.0
        assert bleu_n(["the", "the", "the"], ["the", "cat"], 1) == pytest.approx(100 / 3)

    def test_brevity_penalty(self):
        score = bleu_n(["a", "b"], ["a", "b", "c", "d"], 2)
        assert score == pytest.approx(100.0 * math.exp(1 - 4 / 2))

    def test_candidate_shorter_than_n(self):
        assert bleu_n(["a"], ["a", "b"], 2) == 0.0

    def test_empty_inputs_warn_and_return_zero(self):
        with pytest.warns(EmptyInputWarning):
            assert bleu_n([], ["a"], 2) == 0.0
        with pytest.warns(EmptyInputWarning):
            assert bleu_n(["a"], [], 2) == 0.0

    def test_invalid_order(self):
        with pytest.raises(ValueError):
            bleu_n(["a"], ["a"], 0)


class TestRougeL:
    def test_identity(self):
        seq = ["x", "y", "z"]
        assert rouge_l(seq, seq) == pytest.approx(100.0)

    def test_worked_example(self):
        # LCS = 3, P = 3/4, R = 1 -> F1 = 6/7
        assert rouge_l(["a", "b", "c", "d"], ["a", "c", "d"]) == pytest.approx(600 / 7)

    def test_no_common_token(self):
        assert rouge_l(["a"], ["b"]) == 0.0

    def test_empty_warns(self):
        with pytest.warns(EmptyInputWarning):
            assert rouge_l([], ["a"]) == 0.0

    @given(token_lists, token_lists)
    def test_bounded_and_f1_symmetric_roles(self, cand, ref):
        score = rouge_l(cand, ref)
        assert 0.0 <= score <= 100.0
        assert score == pytest.approx(rouge_l(ref, cand))


class TestMeteor:
    def test_no_match(self):
        assert meteor(["aaa"], ["bbb"]) == 0.0

    def test_single_identical_token(self):
        # m=1, chunks=1, penalty=0.5 -> 50.0
        assert meteor(["cat"], ["cat"]) == pytest.approx(50.0, abs=1e-6)

    def test_identical_ten_tokens(self):
        seq = [f"w{i}" for i in range(10)]
        assert meteor(seq, seq) == pytest.approx(99.95, abs=1e-6)

    def test_stem_stage_matches_inflections(self):
        stats = meteor_stats(["running"], ["runs"])
        assert stats.matches == 1
        assert stats.score == pytest.approx(50.0, abs=1e-6)

    def test_stem_stage_can_be_disabled(self):
        assert meteor(["running"], ["runs"], use_stems=False) == 0.0

    def test_reversed_order_fragments_into_chunks(self):
        stats = meteor_stats(["a", "b", "c"], ["c", "b", "a"])
        assert stats.matches == 3
        assert stats.chunks == 3
        assert stats.score == pytest.approx(50.0, abs=1e-6)

    def test_appending_shared_token_keeps_chunks(self):
        for cand, ref in ([(["a", "b"], ["a", "b"])] + [(["x", "q"], ["z", "q"])]):
            before = meteor_stats(cand, ref).chunks
            after = meteor_stats(cand + ["tail"], ref + ["tail"]).chunks
            assert before == after

    def test_empty_warns(self):
        with pytest.warns(EmptyInputWarning):
            assert meteor([], ["a"]) == 0.0


class TestCorpus:
    def test_single_pair(self):
        seq = ["a", "b", "c"]
        out = corpus_lexical([seq], [seq])
        assert out["bleu_2"] == pytest.approx(100.0)
        assert out["rouge_l"] == pytest.approx(100.0)

    def test_mean_of_opposite_pairs(self):
        same = (["a", "b", "c"], ["a", "b", "c"])
        diff = (["x", "y"], ["p", "q"])
        out = corpus_lexical([same[0], diff[0]], [same[1], diff[1]])
        assert out["bleu_2"] == pytest.approx(50.0)
        assert out["rouge_l"] == pytest.approx(50.0)

    def test_matches_per_pair_oracle(self):
        rng = random.Random(5)
        cands = [[rng.choice("abcd") for _ in range(rng.randint(1, 8))] for _ in range(20)]
        refs = [[rng.choice("abcd") for _ in range(rng.randint(1, 8))] for _ in range(20)]
        out = corpus_lexical(cands, refs)
        assert out["rouge_l"] == pytest.approx(
            sum(rouge_l(c, r) for c, r in zip(cands, refs)) / 20
        )
        assert out["meteor"] == pytest.approx(
            sum(meteor(c, r) for c, r in zip(cands, refs)) / 20
        )

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            corpus_lexical([["a"]], [])

    def test_empty(self):
        with pytest.raises(ValueError):
            corpus_lexical([], [])


@given(token_lists, token_lists)
def test_all_metrics_bounded(cand, ref):
    for score in (bleu_n(cand, ref, 2), rouge_l(cand, ref), meteor(cand, ref)):
        assert 0.0 <= score <= 100.0


@given(
    st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=126), max_size=40),
    st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=126), max_size=40),
)
def test_case_invariance_via_tokenizer(a, b):
    assert tokenize(a.upper()) == tokenize(a.lower())
    if tokenize(a) and tokenize(b):
        assert bleu_n(tokenize(a.upper()), tokenize(b), 1) == pytest.approx(
            bleu_n(tokenize(a.lower()), tokenize(b), 1)
        )


# Known input/output pairs of the classic suffix-stripping algorithm.
PORTER_VECTORS = [
    ("caresses", "caress"),
    ("ponies", "poni"),
    ("ties", "ti"),
    ("caress", "caress"),
    ("cats", "cat"),
    ("feed", "feed"),
    ("agreed", "agre"),
    ("plastered", "plaster"),
    ("bled", "bled"),
    ("motoring", "motor"),
    ("sing", "sing"),
    ("conflated", "conflat"),
    ("troubled", "troubl"),
    ("sized", "size"),
    ("hopping", "hop"),
    ("tanned", "tan"),
    ("falling", "fall"),
    ("hissing", "hiss"),
    ("failing", "fail"),
    ("filing", "file"),
    ("happy", "happi"),
    ("sky", "sky"),
    ("relational", "relat"),
    ("conditional", "condit"),
    ("rational", "ration"),
    ("digitizer", "digit"),
    ("conformabli", "conform"),
    ("radicalli", "radic"),
    ("differentli", "differ"),
    ("analogousli", "analog"),
    ("vietnamization", "vietnam"),
    ("predication", "predic"),
    ("operator", "oper"),
    ("feudalism", "feudal"),
    ("decisiveness", "decis"),
    ("hopefulness", "hope"),
    ("callousness", "callous"),
    ("formaliti", "formal"),
    ("sensitiviti", "sensit"),
    ("sensibiliti", "sensibl"),
    ("triplicate", "triplic"),
    ("formative", "form"),
    ("formalize", "formal"),
    ("electriciti", "electr"),
    ("electrical", "electr"),
    ("effective", "effect"),
    ("bowdlerize", "bowdler"),
    ("allowance", "allow"),
    ("inference", "infer"),
    ("airliner", "airlin"),
    ("gyroscopic", "gyroscop"),
    ("adjustable", "adjust"),
    ("defensible", "defens"),
    ("irritant", "irrit"),
    ("replacement", "replac"),
    ("adjustment", "adjust"),
    ("dependent", "depend"),
    ("adoption", "adopt"),
    ("communism", "commun"),
    ("activate", "activ"),
    ("angulariti", "angular"),
    ("homologous", "homolog"),
    ("probate", "probat"),
    ("rate", "rate"),
    ("cease", "ceas"),
    ("controll", "control"),
    ("roll", "roll"),
    ("running", "run"),
]


@pytest.mark.parametrize("word,expected", PORTER_VECTORS)
def test_porter_vectors(word, expected):
    assert _porter.stem(word) == expected


def test_porter_short_words_unchanged():
    for word in ("a", "is", "by"):
        assert _porter.stem(word) == word
