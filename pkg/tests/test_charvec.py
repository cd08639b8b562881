import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cevkit.charvec import (
    CharDistribution,
    CharVector,
    CountUnit,
    EmptyDistributionError,
    IncomparableVectorsError,
    NormalizationPolicy,
    char_vector,
    l1_distance,
    normalize_text,
    to_distribution,
)

ALPHA = "abcdefg"
vectors = st.dictionaries(st.sampled_from(ALPHA), st.integers(0, 6)).map(CharVector)


# --- normalize_text ---------------------------------------------------------


def test_normalize_collapses_and_lowercases():
    assert normalize_text("A  B") == "a b"


def test_normalize_empty():
    assert normalize_text("") == ""
    assert normalize_text("", NormalizationPolicy(lowercase=False, collapse_whitespace=False)) == ""


def test_normalize_folds_typographic_punctuation():
    # apostrophe and em dash map onto ASCII
    assert normalize_text("Don’t — stop") == "don't - stop"


def test_normalize_ellipsis_and_quotes():
    assert normalize_text("“Wait…”") == '"wait..."'


def test_policy_switches_are_honoured():
    pol = NormalizationPolicy(lowercase=False, unify_punctuation=False, collapse_whitespace=False)
    assert normalize_text("A —  B", pol) == "A —  B"


def test_nfc_composes_decomposed_input():
    assert normalize_text("é") == "é"
    assert normalize_text("é", NormalizationPolicy(unicode_form="none")) == "é"


def test_bad_unicode_form_rejected():
    with pytest.raises(ValueError):
        NormalizationPolicy(unicode_form="NFKD")


@settings(max_examples=1000)
@given(st.text())
def test_normalize_idempotent(raw):
    once = normalize_text(raw)
    assert normalize_text(once) == once


# --- char_vector ------------------------------------------------------------


def test_char_vector_counts():
    assert char_vector("aab").to_dict() == {"a": 2, "b": 1}


def test_word_vector():
    assert char_vector("a b", CountUnit.WORD).to_dict() == {"a": 1, "b": 1}


def test_spaces_counted_on_request():
    assert char_vector("a a", count_spaces=True).to_dict() == {"a": 2, " ": 1}
    assert char_vector("a a").to_dict() == {"a": 2}


def test_zero_counts_dropped_and_total():
    v = CharVector({"a": 0, "b": 3, "c": 1})
    assert "a" not in v
    assert v.total() == 4 == sum(v.values())


def test_negative_or_fractional_counts_rejected():
    with pytest.raises(ValueError):
        CharVector({"a": -1})
    with pytest.raises(TypeError):
        CharVector({"a": 1.5})


def test_units_must_match():
    with pytest.raises(IncomparableVectorsError):
        l1_distance(char_vector("ab"), char_vector("ab", CountUnit.WORD))
    with pytest.raises(IncomparableVectorsError):
        char_vector("a") + char_vector("a", CountUnit.WORD)


@given(st.text(alphabet="ab cé", max_size=30), st.text(alphabet="ab cé", max_size=30))
def test_character_additivity(s1, s2):
    assert char_vector(s1 + s2) == char_vector(s1) + char_vector(s2)
    assert char_vector(s1 + s2, count_spaces=True) == char_vector(s1, count_spaces=True) + char_vector(s2, count_spaces=True)


@given(st.lists(st.text(alphabet="abc", min_size=1, max_size=4), max_size=8),
       st.lists(st.text(alphabet="abc", min_size=1, max_size=4), max_size=8))
def test_word_additivity_on_whole_words(w1, w2):
    # only holds when the concatenation point is a word boundary
    s1, s2 = " ".join(w1), " ".join(w2)
    joined = s1 + " " + s2
    assert char_vector(joined, CountUnit.WORD) == char_vector(s1, CountUnit.WORD) + char_vector(s2, CountUnit.WORD)


# --- l1 -----------------------------------------------------------------------


def test_l1_examples():
    assert l1_distance(CharVector({"a": 2, "b": 1}), CharVector({"a": 1, "b": 1})) == 1
    v = CharVector({"x": 4})
    assert l1_distance(v, v) == 0
    assert l1_distance(CharVector({"a": 1}), CharVector({"b": 2})) == 3


@given(vectors, vectors, vectors)
def test_l1_is_a_metric(a, b, c):
    assert l1_distance(a, b) == l1_distance(b, a)
    assert (l1_distance(a, b) == 0) == (a == b)
    assert l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c)


# --- distributions --------------------------------------------------------------


def test_to_distribution_examples():
    assert to_distribution(CharVector({"a": 1, "b": 1})).probs == {"a": 0.5, "b": 0.5}
    assert to_distribution(CharVector({"a": 3})).probs == {"a": 1.0}
    assert to_distribution(CharVector({"a": 1, "b": 3})).probs == {"a": 0.25, "b": 0.75}


def test_empty_distribution_raises():
    with pytest.raises(EmptyDistributionError):
        to_distribution(CharVector())


def test_distribution_validation():
    with pytest.raises(ValueError):
        CharDistribution({"a": 0.5, "b": 0.6})
    with pytest.raises(ValueError):
        CharDistribution({"a": 0.0, "b": 1.0})


@given(vectors.filter(lambda v: v.total() > 0))
def test_distribution_sums_to_one(v):
    d = to_distribution(v)
    assert abs(math.fsum(d.probs.values()) - 1.0) <= 1e-12
    assert all(0 < p <= 1 for p in d.probs.values())
