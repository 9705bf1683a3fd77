"""Lexical baselines against a brute-force n-gram counter and LCS oracle."""

import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import oracle_bleu, oracle_clipped_precision, oracle_lcs
from qeva.baselines import bleu_n, lcs_length, ngram_counts, rouge_l, tokenize
from qeva.errors import EmptyInput

# --- tokenize ----------------------------------------------------------------


def test_tokenize_examples():
    assert tokenize("The cat sat.") == ["the", "cat", "sat"]
    assert tokenize("") == []
    assert tokenize("Don't stop") == ["don't", "stop"]
    assert tokenize("  (Hello), WORLD!! ") == ["hello", "world"]
    assert tokenize("...") == []


# --- BLEU --------------------------------------------------------------------


def test_bleu_identity():
    tokens = ["a", "chef", "fries", "eggs", "daily"]
    assert bleu_n(tokens, tokens, 4) == pytest.approx(1.0)


def test_bleu_derived_brevity_example():
    candidate = ["the", "cat", "sat"]
    reference = ["the", "cat", "sat", "on", "the", "mat"]
    # p1 = 1, BP = exp(1 - 6/3)
    assert bleu_n(candidate, reference, max_n=1) == pytest.approx(
        math.exp(-1.0), abs=1e-4
    )
    assert bleu_n(candidate, reference, max_n=1) == pytest.approx(0.3679, abs=1e-4)


def test_bleu_zero_on_no_overlap():
    assert bleu_n(["x", "y"], ["a", "b", "c"], 1) == 0.0


def test_bleu_zero_when_any_order_has_no_match():
    # unigrams overlap but no common bigram
    assert bleu_n(["a", "c", "b"], ["a", "b", "c", "d"], 2) == 0.0


def test_bleu_input_validation():
    with pytest.raises(EmptyInput):
        bleu_n([], ["a"], 1)
    with pytest.raises(EmptyInput):
        bleu_n(["a"], [], 1)
    with pytest.raises(ValueError):
        bleu_n(["a"], ["a"], 0)
    with pytest.raises(ValueError):
        bleu_n(["a"], ["a"], 5)


def test_bleu_matches_brute_force_oracle_on_random_inputs():
    rng = random.Random(21)
    vocab = ["a", "b", "c", "d", "e"]
    for _ in range(500):
        cand = [rng.choice(vocab) for _ in range(rng.randint(1, 12))]
        ref = [rng.choice(vocab) for _ in range(rng.randint(1, 12))]
        for max_n in (1, 2, 3, 4):
            assert bleu_n(cand, ref, max_n) == pytest.approx(
                oracle_bleu(cand, ref, max_n), abs=1e-12
            )


def test_bleu_clipping_property():
    # repeating a matching token cannot push clipped precision above
    # the reference's own count of that token
    reference = ["the", "cat"]
    candidate = ["the"] * 7
    counts = ngram_counts(candidate, 1)
    clipped = sum((counts & ngram_counts(reference, 1)).values())
    assert clipped == 1
    assert oracle_clipped_precision(candidate, reference, 1) == pytest.approx(1 / 7)
    assert bleu_n(candidate, reference, 1) == pytest.approx(
        oracle_bleu(candidate, reference, 1), abs=1e-12
    )


@given(
    st.lists(st.sampled_from("abc"), min_size=1, max_size=10),
    st.lists(st.sampled_from("abc"), min_size=1, max_size=10),
)
def test_bleu_range_and_identity(cand, ref):
    value = bleu_n(cand, ref, 2)
    assert 0.0 <= value <= 1.0
    if len(cand) >= 2:  # identity needs at least one n-gram of every order
        assert bleu_n(cand, cand, 2) == pytest.approx(1.0)
    else:
        assert bleu_n(cand, cand, 2) == 0.0


# --- LCS / ROUGE-L -----------------------------------------------------------


def test_lcs_examples():
    assert lcs_length(["a", "b", "c"], ["a", "b", "c"]) == 3
    assert lcs_length(["a", "b", "c"], ["c", "b", "a"]) == 1
    assert oracle_lcs(["a", "b", "c"], ["c", "b", "a"]) == 1
    assert lcs_length([], ["a"]) == 0
    assert lcs_length(["a"], []) == 0


def test_lcs_matches_exhaustive_oracle():
    rng = random.Random(22)
    for _ in range(200):
        a = [rng.choice("abcd") for _ in range(rng.randint(0, 8))]
        b = [rng.choice("abcd") for _ in range(rng.randint(0, 10))]
        assert lcs_length(a, b) == oracle_lcs(a, b)


def test_rouge_l_identity_and_disjoint():
    tokens = ["winter", "comes", "early"]
    assert rouge_l(tokens, tokens).f == pytest.approx(1.0)
    result = rouge_l(["x", "y"], ["a", "b"])
    assert result == rouge_l(["x", "y"], ["a", "b"])
    assert result.f == 0.0


def test_rouge_l_derived_example():
    result = rouge_l(["the", "cat", "sat"], ["the", "cat", "sat", "on", "the", "mat"])
    assert result.precision == pytest.approx(1.0)
    assert result.recall == pytest.approx(0.5)
    assert result.f == pytest.approx(0.6667, abs=1e-4)


def test_rouge_l_beta_weighting():
    prec_heavy = rouge_l(["a", "b", "x", "y"], ["a", "b"], beta=1.0)
    assert prec_heavy.precision == pytest.approx(0.5)
    assert prec_heavy.recall == pytest.approx(1.0)
    recall_weighted = rouge_l(["a", "b", "x", "y"], ["a", "b"], beta=2.0)
    assert recall_weighted.f > prec_heavy.f
    with pytest.raises(ValueError):
        rouge_l(["a"], ["a"], beta=0.0)
    with pytest.raises(EmptyInput):
        rouge_l([], ["a"])


@given(
    st.lists(st.sampled_from("abcd"), min_size=1, max_size=12),
    st.lists(st.sampled_from("abcd"), min_size=1, max_size=12),
)
def test_rouge_l_bounds_and_lcs_consistency(cand, ref):
    result = rouge_l(cand, ref)
    lcs = lcs_length(cand, ref)
    assert result.precision == pytest.approx(lcs / len(cand))
    assert result.recall == pytest.approx(lcs / len(ref))
    assert 0.0 <= result.f <= 1.0
    assert lcs <= min(len(cand), len(ref))
