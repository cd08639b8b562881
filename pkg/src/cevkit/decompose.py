"""Four-way error decomposition of a page and the parsing/OCR triage.

Vectors (all bag-of-token counts):

    Q   ground truth text
    R   ground-truth characters as captured by the predicted regions
    S*  OCR output on the ground-truth regions
    S   OCR output on the predicted regions

Components, each written d(prediction || reference):

    d_pars = d(R || Q)    d_ocr = d(S* || Q)
    d_int  = d(S || R)    d_total = d(S || Q)

The components are not additive and the report never pretends they are.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import shapely
from shapely.strtree import STRtree

from .charvec import (
    CharVector,
    CountUnit,
    NormalizationPolicy,
    char_vector,
    normalize_text,
    to_distribution,
)
from .geometry import (
    Granularity,
    PageLayout,
    Region,
    assign_characters,
    infer_char_positions,
    to_shapely,
    word_tokens,
)
from .metrics import DivergenceMeasure, JensenShannonDistance, spacd, spacer_macro

log = logging.getLogger(__name__)

__all__ = [
    "VectorSet",
    "DecompositionReport",
    "CoteComponents",
    "Dominant",
    "TriageVerdict",
    "select_level",
    "build_vectors",
    "compare",
    "decompose",
    "cote_approx",
    "triage",
]

_GRANULARITY_ORDER = [Granularity.WORD, Granularity.LINE, Granularity.PARAGRAPH, Granularity.PAGE]


@dataclass(frozen=True)
class VectorSet:
    Q: CharVector
    R: CharVector | None = None
    S_star: CharVector | None = None
    S: CharVector | None = None
    per_prediction_R: Mapping[str, CharVector] | None = None
    per_prediction_S: Mapping[str, CharVector] | None = None

    def __post_init__(self):
        units = {v.unit for v in (self.Q, self.R, self.S_star, self.S) if v is not None}
        if len(units) > 1:
            raise ValueError("all vectors in a VectorSet must share one unit")


@dataclass
class DecompositionReport:
    metric_name: str
    d_pars: float | None = None
    d_ocr: float | None = None
    d_int: float | None = None
    d_total: float | None = None
    non_additive: bool = True
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> DecompositionReport:
        return cls(
            metric_name=data["metric_name"],
            d_pars=data.get("d_pars"),
            d_ocr=data.get("d_ocr"),
            d_int=data.get("d_int"),
            d_total=data.get("d_total"),
            non_additive=data.get("non_additive", True),
            notes=list(data.get("notes", [])),
        )


@dataclass
class CoteComponents:
    coverage: float
    overlap: float
    trespass: float
    excess: float

    @property
    def score(self) -> float:
        return self.coverage - self.overlap - self.trespass

    def to_dict(self) -> dict:
        d = asdict(self)
        d["score"] = self.score
        return d

    @classmethod
    def from_dict(cls, data: Mapping) -> CoteComponents:
        return cls(data["coverage"], data["overlap"], data["trespass"], data["excess"])


class Dominant(str, enum.Enum):
    PARSING = "parsing"
    OCR = "ocr"
    INDETERMINATE = "indeterminate"


@dataclass
class TriageVerdict:
    dominant: Dominant
    ratio: float | None
    cote_gate_passed: bool | None = None

    def to_dict(self) -> dict:
        return {"dominant": self.dominant.value, "ratio": self.ratio, "cote_gate_passed": self.cote_gate_passed}

    @classmethod
    def from_dict(cls, data: Mapping) -> TriageVerdict:
        return cls(Dominant(data["dominant"]), data.get("ratio"), data.get("cote_gate_passed"))


# --------------------------------------------------------------------------
# Vector construction
# --------------------------------------------------------------------------


def select_level(regions: Sequence[Region], granularity: Granularity | str | None = None) -> list[Region]:
    """Ground-truth regions of one granularity (finest present by default).

    Nested layouts (block/line/word) would otherwise count every character
    several times.
    """
    if not regions:
        return []
    if granularity is None:
        present = {r.granularity for r in regions}
        granularity = next(g for g in _GRANULARITY_ORDER if g in present)
    granularity = Granularity(granularity)
    return [r for r in regions if r.granularity is granularity]


def _text_vector(texts, policy: NormalizationPolicy, unit: CountUnit) -> CharVector:
    return CharVector.sum(
        (char_vector(normalize_text(t, policy), unit, policy.count_spaces) for t in texts),
        unit,
    )


def build_vectors(
    page: PageLayout,
    ocr_on_gt: Mapping[str, str] | None = None,
    ocr_on_pred: Mapping[str, str] | None = None,
    policy: NormalizationPolicy | None = None,
    unit: CountUnit = CountUnit.CHARACTER,
    granularity: Granularity | str | None = None,
    with_parsing: bool = True,
) -> VectorSet:
    policy = policy or NormalizationPolicy()
    unit = CountUnit(unit)
    gt = select_level(page.gt_regions, granularity)
    gt_ids = {r.id for r in page.gt_regions}
    Q = _text_vector((r.text for r in gt), policy, unit)

    R = None
    per_pred_R = None
    if with_parsing and page.pred_regions is not None:
        tokens = []
        for r in gt:
            chars = infer_char_positions(r, policy, start_index=len(tokens))
            tokens.extend(word_tokens(chars) if unit is CountUnit.WORD else chars)
        table = assign_characters(tokens, page.pred_regions, unit, policy.count_spaces)
        R = table.aggregate
        per_pred_R = table.per_prediction

    S_star = None
    if ocr_on_gt is not None:
        unknown = sorted(set(ocr_on_gt) - gt_ids)
        if unknown:
            raise KeyError(f"ocr_on_gt references unknown ground-truth regions: {unknown}")
        level_ids = {r.id for r in gt}
        S_star = _text_vector((t for rid, t in ocr_on_gt.items() if rid in level_ids), policy, unit)

    S = None
    per_pred_S = None
    if ocr_on_pred is not None:
        if page.pred_regions is None:
            raise ValueError("ocr_on_pred given but the page has no predicted regions")
        pred_ids = {r.id for r in page.pred_regions}
        unknown = sorted(set(ocr_on_pred) - pred_ids)
        if unknown:
            raise KeyError(f"ocr_on_pred references unknown predicted regions: {unknown}")
        per_pred_S = {
            r.id: char_vector(normalize_text(ocr_on_pred.get(r.id, ""), policy), unit, policy.count_spaces)
            for r in page.pred_regions
        }
        S = CharVector.sum(per_pred_S.values(), unit)

    return VectorSet(Q, R, S_star, S, per_pred_R, per_pred_S)


# --------------------------------------------------------------------------
# Decomposition
# --------------------------------------------------------------------------


def compare(pred: CharVector, ref: CharVector, measure: str | DivergenceMeasure = "spacer") -> tuple[float | None, str | None]:
    """Score ``d(pred || ref)``; returns the value and an optional note.

    Both empty scores 0. A non-empty prediction against an empty reference
    leaves the rate measures undefined (``None``). Distribution measures
    score total loss (1.0 for bounded measures) when exactly one side is
    empty.
    """
    if pred.total() == 0 and ref.total() == 0:
        return 0.0, None
    name = measure if isinstance(measure, str) else measure.name
    if name == "spacer":
        if ref.total() == 0:
            return None, "spacer undefined: empty reference"
        return spacer_macro(ref, pred), None
    if name == "spacd":
        return spacd(ref, pred), None
    if name == "spacd_symmetric":
        return spacd(ref, pred, symmetric=True), None
    div = JensenShannonDistance() if name == "cdd_jsd" and isinstance(measure, str) else measure
    if not isinstance(div, DivergenceMeasure):
        raise ValueError(f"unknown measure {measure!r}")
    if pred.total() == 0 or ref.total() == 0:
        if div.is_bounded_unit:
            return 1.0, f"{div.name}: one side empty, scored as total loss"
        return None, f"{div.name}: one side empty, undefined"
    return div.evaluate(to_distribution(pred), to_distribution(ref)), None


def decompose(v: VectorSet, measure: str | DivergenceMeasure = "spacer") -> DecompositionReport:
    if v.Q.total() == 0:
        raise ValueError("cannot decompose a page with an empty ground-truth vector")
    name = measure if isinstance(measure, str) else measure.name
    report = DecompositionReport(metric_name=name)
    pairs = {
        "d_pars": (v.R, v.Q),
        "d_ocr": (v.S_star, v.Q),
        "d_int": (v.S, v.R),
        "d_total": (v.S, v.Q),
    }
    for key, (pred, ref) in pairs.items():
        if pred is None or ref is None:
            continue
        value, note = compare(pred, ref, measure)
        setattr(report, key, value)
        if note:
            report.notes.append(f"{key}: {note}")
    return report


# --------------------------------------------------------------------------
# COTe approximation
# --------------------------------------------------------------------------


def _unit_label(r: Region) -> str:
    return r.semantic_class if r.semantic_class is not None else f"__region__:{r.id}"


def cote_approx(
    gt_regions: Sequence[Region],
    pred_regions: Sequence[Region],
    page_area: float | None = None,
) -> CoteComponents:
    """Area-based Coverage / Overlap / Trespass / Excess.

    Ground-truth regions sharing a ``semantic_class`` form one semantic
    unit; regions without a label are their own unit. Fractions:

    * coverage: ground-truth area under at least one prediction;
    * overlap: ground-truth area under two or more predictions;
    * trespass: share of the predictions' in-ground-truth area that belongs
      to predictions touching two or more semantic units;
    * excess: prediction area outside the ground truth, over the page area.
    """
    gt_geoms = [to_shapely(r.geometry) for r in gt_regions]
    gt_union = shapely.union_all(gt_geoms) if gt_geoms else shapely.Polygon()
    gt_area = gt_union.area
    if gt_area <= 0:
        raise ValueError("total ground-truth area is zero")
    if not pred_regions:
        return CoteComponents(0.0, 0.0, 0.0, 0.0)

    pred_geoms = [to_shapely(r.geometry) for r in pred_regions]
    pred_union = shapely.union_all(pred_geoms)
    coverage = pred_union.intersection(gt_union).area / gt_area

    tree = STRtree(pred_geoms)
    doubles = []
    for i, g in enumerate(pred_geoms):
        for j in tree.query(g, predicate="intersects"):
            if j > i:
                inter = g.intersection(pred_geoms[j])
                if inter.area > 0:
                    doubles.append(inter)
    overlap = shapely.union_all(doubles).intersection(gt_union).area / gt_area if doubles else 0.0

    gt_tree = STRtree(gt_geoms)
    labels = [_unit_label(r) for r in gt_regions]
    inside_total = 0.0
    trespassing = 0.0
    for g in pred_geoms:
        inside = g.intersection(gt_union).area
        inside_total += inside
        units = set()
        for k in gt_tree.query(g, predicate="intersects"):
            if g.intersection(gt_geoms[k]).area > 0:
                units.add(labels[k])
                if len(units) > 1:
                    break
        if len(units) > 1:
            trespassing += inside
    trespass = trespassing / inside_total if inside_total > 0 else 0.0

    if page_area is None:
        minx, miny, maxx, maxy = shapely.union(gt_union, pred_union).bounds
        page_area = (maxx - minx) * (maxy - miny)
    excess = pred_union.difference(gt_union).area / page_area if page_area > 0 else 0.0

    return CoteComponents(
        coverage=min(1.0, coverage),
        overlap=min(1.0, overlap),
        trespass=min(1.0, trespass),
        excess=min(1.0, excess),
    )


# --------------------------------------------------------------------------
# Triage
# --------------------------------------------------------------------------


def triage(
    report: DecompositionReport,
    cote: CoteComponents | None = None,
    ratio_threshold: float = 0.5,
    cote_threshold: float = 0.5,
) -> TriageVerdict:
    """Name the dominant error source from ``d_ocr / d_total``.

    A supplied COTe score below ``cote_threshold`` overrides the ratio and
    blames parsing; this catches full-page predictions whose parsing error
    looks near zero.
    """
    if report.d_ocr is None or report.d_total is None:
        raise ValueError("triage needs d_ocr and d_total")
    gate = None if cote is None else cote.score >= cote_threshold
    if report.d_total == 0 or not math.isfinite(report.d_total):
        return TriageVerdict(Dominant.INDETERMINATE, None, gate)
    ratio = report.d_ocr / report.d_total
    if gate is False:
        return TriageVerdict(Dominant.PARSING, ratio, gate)
    dominant = Dominant.OCR if ratio >= ratio_threshold else Dominant.PARSING
    return TriageVerdict(dominant, ratio, gate)
