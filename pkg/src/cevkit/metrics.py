"""Scalar page metrics over character vectors, plus the sequential baselines.

SpACER family (count based)::

    E = ||g - p||_1
    D = max(0, |g| - |p|)
    spacer = (D + E) / (2 |g|)

CDD (distribution based) defaults to the Jensen-Shannon distance in bits.
CER, detection F1 and Spearman correlation are included so validation
harnesses can compare against the usual baselines.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np
from scipy.stats import rankdata

from .charvec import (
    CharDistribution,
    CharVector,
    IncomparableVectorsError,
    l1_distance,
)

__all__ = [
    "UndefinedMetricError",
    "SpacerInputs",
    "EditCounts",
    "DivergenceMeasure",
    "JensenShannonDistance",
    "spacer_macro",
    "spacer_micro",
    "spacd",
    "shannon_entropy",
    "cdd_jsd",
    "cer",
    "edit_counts",
    "detection_f1",
    "spearman",
]


class UndefinedMetricError(ValueError):
    """The metric has no defined value for these inputs (e.g. empty ground truth)."""


# --------------------------------------------------------------------------
# SpACER / SpACD
# --------------------------------------------------------------------------


def _deletions(g: CharVector, p: CharVector) -> int:
    return max(0, g.total() - p.total())


def spacer_macro(g: CharVector, p: CharVector) -> float:
    """Spatially aware character error rate on page totals.

    ``g`` is the reference (ground truth) vector and ``p`` the prediction.
    """
    if g.unit != p.unit:
        raise IncomparableVectorsError(f"incomparable vectors: {g.unit.value} vs {p.unit.value}")
    c = g.total()
    if c == 0:
        raise UndefinedMetricError("undefined: empty ground truth")
    return (_deletions(g, p) + l1_distance(g, p)) / (2 * c)


@dataclass(frozen=True)
class SpacerInputs:
    g: CharVector
    p: CharVector
    per_prediction: Sequence[tuple[CharVector, CharVector]] | None = None


def spacer_micro(inputs: SpacerInputs) -> float:
    """SpACER with the deletion term summed per prediction.

    Insertions in one prediction can no longer hide deletions in another, so
    the result is never below :func:`spacer_macro` on the same page.
    """
    if not inputs.per_prediction:
        raise ValueError("spacer_micro needs per-prediction (g_j, p_j) pairs")
    g, p = inputs.g, inputs.p
    sum_g = CharVector.sum((gj for gj, _ in inputs.per_prediction), g.unit)
    sum_p = CharVector.sum((pj for _, pj in inputs.per_prediction), p.unit)
    if sum_g != g or sum_p != p:
        raise ValueError("per-prediction vectors do not sum to the page-level vectors")
    c = g.total()
    if c == 0:
        raise UndefinedMetricError("undefined: empty ground truth")
    d_micro = sum(_deletions(gj, pj) for gj, pj in inputs.per_prediction)
    return (d_micro + l1_distance(g, p)) / (2 * c)


def spacd(g: CharVector, p: CharVector, symmetric: bool = False) -> float:
    """SpACER numerator halved, without the length normalisation.

    The default keeps the one-sided deletion term ``max(0, |g| - |p|)``.
    With ``symmetric=True`` the deletion term becomes ``abs(|g| - |p|)``,
    which makes the function symmetric in its arguments.
    """
    if g.unit != p.unit:
        raise IncomparableVectorsError(f"incomparable vectors: {g.unit.value} vs {p.unit.value}")
    d = abs(g.total() - p.total()) if symmetric else _deletions(g, p)
    return (d + l1_distance(g, p)) / 2


# --------------------------------------------------------------------------
# Entropy / Jensen-Shannon
# --------------------------------------------------------------------------


def shannon_entropy(d: CharDistribution) -> float:
    """Entropy in bits."""
    h = -math.fsum(p * math.log2(p) for p in d.probs.values() if p > 0)
    return h + 0.0  # avoid -0.0


def _pair_term(r: float) -> float:
    """(1+r) ln(1+r) + (1-r) ln(1-r) for r in [-1, 1].

    Uses the even power series near zero, where the closed form cancels
    catastrophically.
    """
    a = abs(r)
    if a == 0.0:
        return 0.0
    if a == 1.0:
        return 2.0 * math.log(2.0)
    if a < 0.1:
        r2 = a * a
        term, total, k = r2, 0.0, 1
        while True:
            contrib = term / (k * (2 * k - 1))
            total += contrib
            if contrib <= 1e-18 * total:
                return total
            term *= r2
            k += 1
    return (1.0 + a) * math.log1p(a) + (1.0 - a) * math.log1p(-a)


def cdd_jsd(s: CharDistribution, q: CharDistribution) -> float:
    """Jensen-Shannon distance (square root of the divergence), base 2.

    Evaluated term by term on the union support; each key contributes
    ``m * h(r)`` with ``m`` the mixture mass and ``r = (s-q)/(s+q)``, which
    is algebraically the entropy form H(M) - (H(S)+H(Q))/2 but keeps full
    relative precision when the two distributions are close.
    """
    if s.unit != q.unit:
        raise IncomparableVectorsError(f"incomparable distributions: {s.unit.value} vs {q.unit.value}")
    terms = []
    for key in sorted(s.probs.keys() | q.probs.keys()):
        a = s.probs.get(key, 0.0)
        b = q.probs.get(key, 0.0)
        m = 0.5 * (a + b)
        r = (a - b) / (a + b)
        terms.append(m * _pair_term(r))
    divergence = 0.5 * math.fsum(terms) / math.log(2.0)
    return math.sqrt(min(1.0, max(0.0, divergence)))


class DivergenceMeasure(abc.ABC):
    """Pluggable distance between two character distributions."""

    name: str = "custom"
    is_true_metric: bool = False
    is_bounded_unit: bool = False

    @abc.abstractmethod
    def evaluate(self, a: CharDistribution, b: CharDistribution) -> float: ...

    def __call__(self, a, b):
        return self.evaluate(a, b)


class JensenShannonDistance(DivergenceMeasure):
    name = "cdd_jsd"
    is_true_metric = True
    is_bounded_unit = True

    def evaluate(self, a, b):
        return cdd_jsd(a, b)


# --------------------------------------------------------------------------
# CER
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EditCounts:
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    gt_length: int = 0

    @property
    def distance(self) -> int:
        return self.substitutions + self.deletions + self.insertions


@numba.njit(cache=True)
def _levenshtein_counts(a, b):  # pragma: no cover - compiled
    # Rolling-row DP that carries the (sub, del, ins) tally of the chosen
    # predecessor. Preference at each cell: diagonal, then deletion, then
    # insertion. This reproduces following backpointers from the final cell.
    n = a.shape[0]
    m = b.shape[0]
    prev_d = np.empty(m + 1, np.int64)
    prev_s = np.zeros(m + 1, np.int64)
    prev_x = np.zeros(m + 1, np.int64)
    prev_i = np.empty(m + 1, np.int64)
    cur_d = np.empty(m + 1, np.int64)
    cur_s = np.zeros(m + 1, np.int64)
    cur_x = np.zeros(m + 1, np.int64)
    cur_i = np.empty(m + 1, np.int64)
    for j in range(m + 1):
        prev_d[j] = j
        prev_i[j] = j
    for i in range(1, n + 1):
        cur_d[0] = i
        cur_s[0] = 0
        cur_x[0] = i
        cur_i[0] = 0
        ai = a[i - 1]
        for j in range(1, m + 1):
            cost = 0 if ai == b[j - 1] else 1
            diag = prev_d[j - 1] + cost
            up = prev_d[j] + 1
            left = cur_d[j - 1] + 1
            if diag <= up and diag <= left:
                cur_d[j] = diag
                cur_s[j] = prev_s[j - 1] + cost
                cur_x[j] = prev_x[j - 1]
                cur_i[j] = prev_i[j - 1]
            elif up <= left:
                cur_d[j] = up
                cur_s[j] = prev_s[j]
                cur_x[j] = prev_x[j] + 1
                cur_i[j] = prev_i[j]
            else:
                cur_d[j] = left
                cur_s[j] = cur_s[j - 1]
                cur_x[j] = cur_x[j - 1]
                cur_i[j] = cur_i[j - 1] + 1
        prev_d, cur_d = cur_d, prev_d
        prev_s, cur_s = cur_s, prev_s
        prev_x, cur_x = cur_x, prev_x
        prev_i, cur_i = cur_i, prev_i
    return prev_s[m], prev_x[m], prev_i[m]


def _codepoints(text: str) -> np.ndarray:
    return np.frombuffer(text.encode("utf-32-le"), dtype=np.uint32).astype(np.int64)


def edit_counts(gt: str, pred: str) -> EditCounts:
    """Unit-cost Levenshtein alignment of ``pred`` against ``gt``.

    Deletions are ground-truth characters missing from the prediction,
    insertions are extra predicted characters.
    """
    s, d, i = _levenshtein_counts(_codepoints(gt), _codepoints(pred))
    return EditCounts(int(s), int(d), int(i), len(gt))


def cer(gt: str, pred: str) -> tuple[float, EditCounts]:
    if not gt:
        raise UndefinedMetricError("undefined CER: empty ground truth")
    counts = edit_counts(gt, pred)
    return counts.distance / len(gt), counts


# --------------------------------------------------------------------------
# Detection F1 and correlation
# --------------------------------------------------------------------------


def detection_f1(gt_regions, pred_regions, iou_threshold: float = 0.5) -> tuple[float, float, float]:
    """Greedy one-to-one IoU matching; returns ``(f1, precision, recall)``."""
    from .geometry import geometry_area, intersection_area

    if not (0.0 < iou_threshold <= 1.0):
        raise ValueError("iou_threshold must lie in (0, 1]")
    candidates = []
    gt_areas = [geometry_area(r.geometry) for r in gt_regions]
    pred_areas = [geometry_area(r.geometry) for r in pred_regions]
    for gi, g in enumerate(gt_regions):
        for pi, p in enumerate(pred_regions):
            inter = intersection_area(g.geometry, p.geometry)
            if inter <= 0.0:
                continue
            iou = inter / (gt_areas[gi] + pred_areas[pi] - inter)
            if iou >= iou_threshold:
                candidates.append((-iou, gi, pi))
    candidates.sort()
    used_gt, used_pred = set(), set()
    for _, gi, pi in candidates:
        if gi in used_gt or pi in used_pred:
            continue
        used_gt.add(gi)
        used_pred.add(pi)
    tp = len(used_gt)
    precision = tp / len(pred_regions) if pred_regions else 0.0
    recall = tp / len(gt_regions) if gt_regions else 0.0
    if precision + recall == 0.0:
        return 0.0, precision, recall
    return 2 * precision * recall / (precision + recall), precision, recall


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation using average ranks for ties."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ValueError("need at least two observations")
    rx = rankdata(x) - (len(x) + 1) / 2
    ry = rankdata(y) - (len(y) + 1) / 2
    sxx = float(np.dot(rx, rx))
    syy = float(np.dot(ry, ry))
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("spearman undefined for a constant series")
    rho = float(np.dot(rx, ry)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, rho))
