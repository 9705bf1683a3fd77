"""Reference-based lexical baselines: BLEU-1..4 and ROUGE-L.

Single-reference, no smoothing. These are deliberately plain
re-implementations (n-gram clipping, LCS dynamic programming) so the
harness does not depend on any external metric toolkit; published
numbers from other toolkits may differ in tokenization details.
"""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass

from .errors import EmptyInput


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[str]:
    """Casefold, split on whitespace, strip punctuation off token edges."""
    tokens = []
    for raw in text.casefold().split():
        start, end = 0, len(raw)
        while start < end and _is_punct(raw[start]):
            start += 1
        while end > start and _is_punct(raw[end - 1]):
            end -= 1
        if start < end:
            tokens.append(raw[start:end])
    return tokens


def ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu_n(candidate: list[str], reference: list[str], max_n: int = 4) -> float:
    """BLEU with clipped precisions, uniform weights, no smoothing.

    Any zero n-gram precision zeroes the whole score. Brevity penalty is
    1 when the candidate is longer than the reference, exp(1 - r/c)
    otherwise.
    """
    if not 1 <= max_n <= 4:
        raise ValueError(f"max_n must be in 1..4, got {max_n}")
    if not candidate or not reference:
        raise EmptyInput("bleu_n requires non-empty candidate and reference")

    log_precision_sum = 0.0
    for n in range(1, max_n + 1):
        cand = ngram_counts(candidate, n)
        guess = sum(cand.values())
        if guess == 0:  # candidate shorter than n
            return 0.0
        clipped = sum((cand & ngram_counts(reference, n)).values())
        if clipped == 0:
            return 0.0
        log_precision_sum += math.log(clipped / guess)

    c, r = len(candidate), len(reference)
    brevity = 1.0 if c > r else math.exp(1 - r / c)
    return brevity * math.exp(log_precision_sum / max_n)


def lcs_length(a: list[str], b: list[str]) -> int:
    """Longest common subsequence length, O(|a|*|b|) with an O(|b|) row."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for tok in a:
        curr = [0] * (len(b) + 1)
        for j, other in enumerate(b, start=1):
            if tok == other:
                curr[j] = prev[j - 1] + 1
            else:
                curr[j] = max(prev[j], curr[j - 1])
        prev = curr
    return prev[-1]


@dataclass(frozen=True)
class RougeL:
    precision: float
    recall: float
    f: float

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f": self.f}


def rouge_l(candidate: list[str], reference: list[str], beta: float = 1.0) -> RougeL:
    """LCS-based precision/recall/F; beta weights recall (F1 by default)."""
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    if not candidate or not reference:
        raise EmptyInput("rouge_l requires non-empty candidate and reference")
    lcs = lcs_length(candidate, reference)
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    if precision == 0.0 and recall == 0.0:
        return RougeL(0.0, 0.0, 0.0)
    b2 = beta * beta
    f = (1 + b2) * precision * recall / (recall + b2 * precision)
    return RougeL(precision, recall, f)
