from __future__ import annotations

from hypothesis import given
from hypothesis import strategies as st

from ems_eval.text import is_numeric_token, lcs_length, ngram_counts, split_sentences, tokenize

from .oracles import lcs_exhaustive

words = st.lists(st.sampled_from(list("abcde")), max_size=8)


def test_tokenize_keeps_numbers_whole():
    assert tokenize("Revenue rose 35% to $11.4 billion (1,200 units).") == [
        "revenue", "rose", "35", "to", "11.4", "billion", "1,200", "units",
    ]


def test_tokenize_lowercases_and_drops_punctuation():
    assert tokenize("Year-over-Year GROWTH!") == ["year", "over", "year", "growth"]
    assert tokenize("  ...  ") == []


def test_numeric_token():
    assert is_numeric_token("11.4") and is_numeric_token("3q")
    assert not is_numeric_token("billion")


def test_sentences_split_on_terminators():
    assert split_sentences("First one. Second one! Third? 4 more.") == [
        "First one.", "Second one!", "Third?", "4 more.",
    ]


def test_decimals_and_abbreviations_do_not_split():
    text = "Tesla Inc. reported $11.4 billion in the U.S. market. Margins vs. peers improved."
    assert split_sentences(text) == [
        "Tesla Inc. reported $11.4 billion in the U.S. market.",
        "Margins vs. peers improved.",
    ]


def test_lowercase_continuation_does_not_split():
    assert split_sentences("Costs fell. the rest stayed flat.") == ["Costs fell. the rest stayed flat."]


def test_quoted_sentence_start():
    assert split_sentences('He said "Growth." "Next year" looks good.') == ['He said "Growth."', '"Next year" looks good.']


def test_ngram_counts():
    assert ngram_counts(["a", "b", "a", "b"], 2) == {("a", "b"): 2, ("b", "a"): 1}
    assert ngram_counts(["a"], 2) == {}


def test_lcs_example():
    assert lcs_length("a b c d".split(), "b a d c".split()) == 2


@given(words, words)
def test_lcs_matches_exhaustive_search(a, b):
    assert lcs_length(a, b) == lcs_exhaustive(a, b)


@given(words, words)
def test_lcs_symmetric(a, b):
    assert lcs_length(a, b) == lcs_length(b, a)
