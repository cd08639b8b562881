import math
import random
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from cevkit.charvec import CharDistribution, CharVector, char_vector, to_distribution
from cevkit.geometry import Box, Region
from cevkit.metrics import (
    JensenShannonDistance,
    SpacerInputs,
    UndefinedMetricError,
    cdd_jsd,
    cer,
    detection_f1,
    edit_counts,
    shannon_entropy,
    spacd,
    spacer_macro,
    spacer_micro,
    spearman,
)

from oracles import jsd_entropy_form, levenshtein_oracle, spacer_by_hand

cv = char_vector


# --- SpACER / SpACD -----------------------------------------------------------


def test_swap_is_invisible():
    assert spacer_macro(CharVector({"a": 1, "b": 1}), CharVector({"b": 1, "a": 1})) == 0.0
    assert spacer_macro(cv("ab"), cv("ba")) == 0.0


def test_spacer_hand_values():
    assert spacer_macro(cv("aab"), cv("ab")) == pytest.approx(1 / 3)
    assert spacer_macro(cv("ab"), cv("abc")) == 0.25


def test_spacer_empty_gt_undefined():
    with pytest.raises(UndefinedMetricError, match="empty ground truth"):
        spacer_macro(CharVector(), cv("a"))


@given(st.text("abcd", min_size=1, max_size=30), st.text("abcd", max_size=30))
def test_spacer_matches_counter_arithmetic(g, p):
    assert spacer_macro(cv(g), cv(p)) == float(spacer_by_hand(g, p))


def test_micro_all_perfect():
    pairs = [(cv("ab"), cv("ab")), (cv("cd"), cv("cd"))]
    assert spacer_micro(SpacerInputs(cv("abcd"), cv("abcd"), pairs)) == 0.0


def test_micro_does_not_let_insertions_cancel_deletions():
    # box A lost "xy", box B gained "xy": page totals agree
    pairs = [(cv("xyab"), cv("ab")), (cv("cd"), cv("xycd"))]
    g, p = cv("xyabcd"), cv("abxycd")
    assert spacer_macro(g, p) == 0.0
    assert spacer_micro(SpacerInputs(g, p, pairs)) == pytest.approx(2 / 12)


def test_micro_single_pair_equals_macro():
    g, p = cv("hello"), cv("hallo!")
    assert spacer_micro(SpacerInputs(g, p, [(g, p)])) == spacer_macro(g, p)


def test_micro_rejects_inconsistent_pairs():
    with pytest.raises(ValueError):
        spacer_micro(SpacerInputs(cv("ab"), cv("ab"), [(cv("a"), cv("ab"))]))
    with pytest.raises(ValueError):
        spacer_micro(SpacerInputs(cv("ab"), cv("ab")))


@given(st.lists(st.tuples(st.text("abc", max_size=8), st.text("abc", max_size=8)), min_size=1, max_size=6))
def test_micro_never_below_macro(pairs):
    gs = [cv(a) for a, _ in pairs]
    ps = [cv(b) for _, b in pairs]
    g, p = CharVector.sum(gs), CharVector.sum(ps)
    assume(g.total() > 0)
    assert spacer_micro(SpacerInputs(g, p, list(zip(gs, ps)))) >= spacer_macro(g, p)


def test_spacd_values():
    v = cv("abc")
    assert spacd(v, v) == 0
    assert spacd(cv("aab"), cv("ab")) == 1.0
    assert spacd(cv("ab"), cv("aab")) == 0.5


@given(st.text("abc", max_size=12), st.text("abc", max_size=12))
def test_symmetric_spacd_is_symmetric(a, b):
    assert spacd(cv(a), cv(b), symmetric=True) == spacd(cv(b), cv(a), symmetric=True)


def test_literal_spacd_is_not_symmetric():
    assert spacd(cv("aab"), cv("ab")) != spacd(cv("ab"), cv("aab"))


# --- entropy / JSD --------------------------------------------------------------


def test_entropy_values():
    assert shannon_entropy(CharDistribution({"a": 0.5, "b": 0.5})) == 1.0
    assert shannon_entropy(CharDistribution({"a": 1.0})) == 0.0
    assert shannon_entropy(CharDistribution({"a": 0.25, "b": 0.75})) == pytest.approx(0.8113, abs=1e-4)


def test_jsd_values():
    d = CharDistribution({"a": 0.3, "b": 0.7})
    assert cdd_jsd(d, d) == 0.0
    assert cdd_jsd(CharDistribution({"a": 1.0}), CharDistribution({"b": 1.0})) == 1.0
    assert cdd_jsd(CharDistribution({"a": 1.0}), CharDistribution({"a": 0.5, "b": 0.5})) == pytest.approx(0.5579, abs=1e-4)


def test_jsd_measure_object():
    m = JensenShannonDistance()
    assert m.is_true_metric and m.is_bounded_unit
    d = CharDistribution({"x": 1.0})
    assert m(d, d) == 0.0


weights = st.dictionaries(st.sampled_from("abcdef"), st.integers(1, 50), min_size=1)


def _dist(w):
    return to_distribution(CharVector(w))


@given(weights, weights)
def test_jsd_agrees_with_entropy_form(a, b):
    p, q = _dist(a), _dist(b)
    assert cdd_jsd(p, q) == pytest.approx(jsd_entropy_form(p.probs, q.probs), abs=1e-7)


@given(weights, weights, weights)
def test_jsd_axioms(a, b, c):
    p, q, r = _dist(a), _dist(b), _dist(c)
    assert cdd_jsd(p, q) == cdd_jsd(q, p)
    assert -1e-12 <= cdd_jsd(p, q) <= 1 + 1e-12
    assert cdd_jsd(p, r) <= cdd_jsd(p, q) + cdd_jsd(q, r) + 1e-9
    assert cdd_jsd(p, p) == 0.0


def test_jsd_keeps_precision_for_close_distributions():
    eps = 1e-9
    p = CharDistribution({"a": 0.5 + eps, "b": 0.5 - eps})
    q = CharDistribution({"a": 0.5, "b": 0.5})
    # divergence ~ eps^2 / (2 ln 2), so the distance is linear in eps
    got = cdd_jsd(p, q)
    assert got == pytest.approx(eps / math.sqrt(2 * math.log(2)), rel=1e-6)


# --- CER ------------------------------------------------------------------------


def test_cer_examples():
    assert cer("abc", "abc")[0] == 0.0
    assert cer("kitten", "sitting")[0] == 0.5
    rate, counts = cer("ab", "")
    assert rate == 1.0 and counts.deletions == 2 and counts.substitutions == counts.insertions == 0


def test_cer_empty_gt():
    with pytest.raises(UndefinedMetricError):
        cer("", "x")


def test_cer_astral_characters():
    assert edit_counts("a😀b", "ab").deletions == 1


@given(st.text("abc", max_size=15), st.text("abc", max_size=15))
def test_edit_counts_match_dp_oracle(a, b):
    dist, s, d, i = levenshtein_oracle(a, b)
    c = edit_counts(a, b)
    assert (c.distance, c.substitutions, c.deletions, c.insertions) == (dist, s, d, i)


@given(st.text("abcd", max_size=20), st.text("abcd", max_size=20))
def test_distance_symmetric(a, b):
    assert edit_counts(a, b).distance == edit_counts(b, a).distance
    assert edit_counts(a, a).distance == 0


@settings(max_examples=300)
@given(st.text("abcde ", min_size=1, max_size=40), st.text("abcde ", max_size=40))
def test_spacer_never_exceeds_cer(g, p):
    rate, _ = cer(g, p)
    assert spacer_macro(cv(g, count_spaces=True), cv(p, count_spaces=True)) <= rate


@given(st.text("abcdef", min_size=1, max_size=40), st.data())
def test_spacer_equals_cer_for_pure_deletions(g, data):
    keep = data.draw(st.lists(st.booleans(), min_size=len(g), max_size=len(g)))
    p = "".join(c for c, k in zip(g, keep) if k)
    assert spacer_macro(cv(g), cv(p)) == cer(g, p)[0]


def test_permutation_blind_spot():
    rng = random.Random(5)
    g = "the quick brown fox"
    for _ in range(20):
        p = list(g)
        rng.shuffle(p)
        assert spacer_macro(cv(g), cv("".join(p))) == 0.0


# --- detection F1 / Spearman ----------------------------------------------------------


def _r(i, *c):
    return Region(str(i), Box(*c))


def test_detection_f1_examples():
    gt = [_r(0, 0, 0, 10, 10), _r(1, 20, 0, 30, 10)]
    assert detection_f1(gt, list(gt), 0.5) == (1.0, 1.0, 1.0)
    assert detection_f1(gt, [], 0.5) == (0.0, 0.0, 0.0)
    f1, p, r = detection_f1([gt[0]], [_r("a", 0, 0, 10, 10), _r("b", 0, 0, 10, 10)], 0.5)
    assert (p, r) == (0.5, 1.0)
    assert f1 == pytest.approx(2 / 3)


def test_spearman_examples():
    assert spearman([1, 2, 3], [1, 2, 3]) == 1.0
    assert spearman([1, 2, 3], [3, 2, 1]) == -1.0
    assert spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)


def test_spearman_errors():
    with pytest.raises(ValueError):
        spearman([1, 2], [1])
    with pytest.raises(ValueError):
        spearman([1, 1, 1], [1, 2, 3])


def test_exact_fraction_oracle_sanity():
    assert spacer_by_hand("aab", "ab") == Fraction(1, 3)
