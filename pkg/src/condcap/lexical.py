"""From-scratch lexical caption metrics: BLEU-n, ROUGE-L, and METEOR.

All scores are on a 0-100 scale. Candidate/reference pairs share one
tokenization rule (:func:`tokenize`), so every metric is case-insensitive.
"""

from __future__ import annotations

import math
import string
import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from . import _porter

TokenSeq = Sequence[str]


class EmptyInputWarning(UserWarning):
    """Signals that a metric received an empty candidate or reference."""


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip surrounding punctuation per token."""
    tokens = []
    for raw in text.lower().split():
        token = raw.strip(string.punctuation)
        if token:
            tokens.append(token)
    return tokens


def _warn_empty(metric: str) -> float:
    warnings.warn(f"{metric}: empty candidate or reference, score is 0", EmptyInputWarning, stacklevel=3)
    return 0.0


def _ngrams(tokens: TokenSeq, k: int) -> Counter:
    return Counter(tuple(tokens[i : i + k]) for i in range(len(tokens) - k + 1))


def bleu_n(cand: TokenSeq, ref: TokenSeq, n: int = 2) -> float:
    """Sentence BLEU-n: geometric mean of clipped k-gram precisions, k=1..n.

    The brevity penalty exp(1 - |ref|/|cand|) applies when the candidate is
    shorter than the reference. Any zero k-gram precision zeroes the score.
    Unlike ROUGE-L's F1, this score is not symmetric in (cand, ref).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not cand or not ref:
        return _warn_empty("bleu_n")
    log_sum = 0.0
    for k in range(1, n + 1):
        cand_grams = _ngrams(cand, k)
        total = sum(cand_grams.values())
        if total == 0:
            return 0.0
        ref_grams = _ngrams(ref, k)
        clipped = sum(min(count, ref_grams[gram]) for gram, count in cand_grams.items())
        if clipped == 0:
            return 0.0
        log_sum += math.log(clipped / total)
    brevity = math.exp(1.0 - len(ref) / len(cand)) if len(cand) < len(ref) else 1.0
    return 100.0 * math.exp(log_sum / n) * brevity


def _lcs_length(a: TokenSeq, b: TokenSeq) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        for j, y in enumerate(b, 1):
            if x == y:
                curr.append(prev[j - 1] + 1)
            else:
                curr.append(max(prev[j], curr[j - 1]))
        prev = curr
    return prev[-1]


def rouge_l(cand: TokenSeq, ref: TokenSeq) -> float:
    """ROUGE-L F1 from the longest common subsequence."""
    if not cand or not ref:
        return _warn_empty("rouge_l")
    lcs = _lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return 100.0 * 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class MeteorStats:
    """Alignment diagnostics behind a METEOR score."""

    matches: int
    chunks: int
    precision: float
    recall: float
    score: float


def _align(cand: TokenSeq, ref: TokenSeq, use_stems: bool) -> list[tuple[int, int]]:
    # Greedy leftmost one-to-one alignment: exact matches first, then
    # stem-equal matches among the leftovers.
    mapping: dict[int, int] = {}
    used_ref: set[int] = set()
    for i, token in enumerate(cand):
        for j, ref_token in enumerate(ref):
            if j not in used_ref and token == ref_token:
                mapping[i] = j
                used_ref.add(j)
                break
    if use_stems:
        ref_stems = [_porter.stem(t) for t in ref]
        for i, token in enumerate(cand):
            if i in mapping:
                continue
            cand_stem = _porter.stem(token)
            for j, ref_stem in enumerate(ref_stems):
                if j not in used_ref and cand_stem == ref_stem:
                    mapping[i] = j
                    used_ref.add(j)
                    break
    return sorted(mapping.items())


def _count_chunks(pairs: list[tuple[int, int]]) -> int:
    chunks = 0
    prev: tuple[int, int] | None = None
    for i, j in pairs:
        if prev is None or i != prev[0] + 1 or j != prev[1] + 1:
            chunks += 1
        prev = (i, j)
    return chunks


def meteor_stats(cand: TokenSeq, ref: TokenSeq, use_stems: bool = True) -> MeteorStats:
    """METEOR with the 2005 constants: Fmean weighted 9:1 toward recall,
    fragmentation penalty 0.5 * (chunks/matches)^3.

    Matching is exact-then-stem with a greedy leftmost alignment; the synonym
    stage is omitted so the metric needs no external lexical resources.
    """
    if not cand or not ref:
        return MeteorStats(0, 0, 0.0, 0.0, _warn_empty("meteor"))
    pairs = _align(cand, ref, use_stems)
    m = len(pairs)
    if m == 0:
        return MeteorStats(0, 0, 0.0, 0.0, 0.0)
    precision = m / len(cand)
    recall = m / len(ref)
    fmean = 10.0 * precision * recall / (recall + 9.0 * precision)
    chunks = _count_chunks(pairs)
    penalty = 0.5 * (chunks / m) ** 3
    return MeteorStats(m, chunks, precision, recall, 100.0 * fmean * (1.0 - penalty))


def meteor(cand: TokenSeq, ref: TokenSeq, use_stems: bool = True) -> float:
    return meteor_stats(cand, ref, use_stems).score


def corpus_lexical(
    cands: Sequence[TokenSeq], refs: Sequence[TokenSeq], bleu_order: int = 2
) -> dict[str, float]:
    """Arithmetic means of per-pair BLEU-n, ROUGE-L, and METEOR."""
    if len(cands) != len(refs):
        raise ValueError(f"length mismatch: {len(cands)} candidates vs {len(refs)} references")
    if not cands:
        raise ValueError("corpus_lexical requires at least one pair")
    n = len(cands)
    sums = {f"bleu_{bleu_order}": 0.0, "rouge_l": 0.0, "meteor": 0.0}
    for cand, ref in zip(cands, refs):
        sums[f"bleu_{bleu_order}"] += bleu_n(cand, ref, bleu_order)
        sums["rouge_l"] += rouge_l(cand, ref)
        sums["meteor"] += meteor(cand, ref)
    return {name: total / n for name, total in sums.items()}
