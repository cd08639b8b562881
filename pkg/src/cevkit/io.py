"""File formats: the native page document, an ALTO subset and report output.

The page document is versioned JSON (``schema_version: "cevkit.page/1"``,
schema shipped in ``cevkit/schema``). Coordinates are stored as given; the
``unit`` is recorded but never converted because every metric is a ratio.
"""

from __future__ import annotations

import csv
import io as _io
import json
import logging
import statistics
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Iterable, Mapping

import jsonschema

from .decompose import CoteComponents, DecompositionReport, TriageVerdict
from .geometry import Box, GeometryError, Granularity, PageLayout, Polygon, Region

log = logging.getLogger(__name__)

SCHEMA_VERSION = "cevkit.page/1"

__all__ = [
    "SCHEMA_VERSION",
    "SchemaError",
    "PageDocument",
    "PageReport",
    "ReportDocument",
    "CSV_COLUMNS",
    "page_schema",
    "load_page_json",
    "dump_page_json",
    "load_alto",
    "write_report",
    "read_report_json",
]


class SchemaError(ValueError):
    """Invalid input document; ``path`` locates the offending field."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class PageDocument:
    layout: PageLayout
    ocr_on_gt: dict[str, str] | None = None
    ocr_on_pred: dict[str, str] | None = None


def page_schema() -> dict:
    text = resources.files("cevkit").joinpath("schema/page_document.v1.json").read_text(encoding="utf-8")
    return json.loads(text)


_VALIDATOR = None


def _validator():
    global _VALIDATOR
    if _VALIDATOR is None:
        _VALIDATOR = jsonschema.Draft202012Validator(page_schema())
    return _VALIDATOR


_KNOWN = {
    "$": {"schema_version", "page", "gt_regions", "pred_regions", "ocr_on_gt", "ocr_on_pred"},
    "page": {"id", "width", "height", "unit"},
    "region": {"id", "geometry", "text", "granularity", "semantic_class", "order_hint"},
}


def _json_path(parts: Iterable) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _warn_unknown(obj: Mapping, known: set, path: str) -> None:
    for key in obj:
        if key not in known:
            log.warning("ignoring unknown field %s.%s", path, key)


def _geometry_from_json(g: Mapping, path: str):
    coords = g["coords"]
    try:
        if g["type"] == "box":
            if len(coords) != 4:
                raise SchemaError(f"box needs 4 numbers, got {len(coords)}", path + ".coords")
            return Box(*coords)
        if len(coords) < 6 or len(coords) % 2:
            raise SchemaError(f"polygon needs an even count of at least 6 numbers, got {len(coords)}", path + ".coords")
        return Polygon(tuple(zip(coords[0::2], coords[1::2])))
    except GeometryError as exc:
        raise SchemaError(str(exc), path) from exc


def _geometry_to_json(g) -> dict:
    if isinstance(g, Box):
        return {"type": "box", "coords": g.coords()}
    return {"type": "polygon", "coords": g.coords()}


def _region_from_json(r: Mapping, path: str, default_granularity: str) -> Region:
    _warn_unknown(r, _KNOWN["region"], path)
    hint = r.get("order_hint")
    return Region(
        id=r["id"],
        geometry=_geometry_from_json(r["geometry"], path + ".geometry"),
        text=r.get("text", ""),
        granularity=Granularity(r.get("granularity", default_granularity)),
        semantic_class=r.get("semantic_class"),
        order_hint=(hint["column"], hint["index"]) if hint else None,
    )


def _region_to_json(r: Region) -> dict:
    return {
        "id": r.id,
        "geometry": _geometry_to_json(r.geometry),
        "text": r.text,
        "granularity": r.granularity.value,
        "semantic_class": r.semantic_class,
        "order_hint": {"column": r.order_hint[0], "index": r.order_hint[1]} if r.order_hint else None,
    }


def load_page_json(data: bytes | str) -> PageDocument:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc}") from exc
    errors = sorted(_validator().iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise SchemaError(err.message, _json_path(err.absolute_path))
    _warn_unknown(doc, _KNOWN["$"], "$")
    _warn_unknown(doc["page"], _KNOWN["page"], "$.page")

    regions = {}
    for key, default in (("gt_regions", "word"), ("pred_regions", "paragraph")):
        if key not in doc:
            continue
        seen: set[str] = set()
        out = []
        for i, r in enumerate(doc[key]):
            path = f"$.{key}[{i}]"
            if r["id"] in seen:
                raise SchemaError(f"duplicate region id {r['id']!r}", path + ".id")
            seen.add(r["id"])
            out.append(_region_from_json(r, path, default))
        regions[key] = out

    page = doc["page"]
    layout = PageLayout(
        page_id=page["id"],
        width=page["width"],
        height=page["height"],
        gt_regions=regions.get("gt_regions", []),
        pred_regions=regions.get("pred_regions"),
        unit=page.get("unit", "px"),
    )
    outside = layout.out_of_bounds()
    if outside:
        log.warning("page %s: regions extend beyond the page: %s", layout.page_id, ", ".join(outside[:10]))
    return PageDocument(layout, doc.get("ocr_on_gt"), doc.get("ocr_on_pred"))


def dump_page_json(doc: PageDocument | PageLayout, indent: int | None = 2) -> bytes:
    if isinstance(doc, PageLayout):
        doc = PageDocument(doc)
    layout = doc.layout
    out: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "page": {"id": layout.page_id, "width": layout.width, "height": layout.height, "unit": layout.unit},
        "gt_regions": [_region_to_json(r) for r in layout.gt_regions],
    }
    if layout.pred_regions is not None:
        out["pred_regions"] = [_region_to_json(r) for r in layout.pred_regions]
    if doc.ocr_on_gt is not None:
        out["ocr_on_gt"] = dict(doc.ocr_on_gt)
    if doc.ocr_on_pred is not None:
        out["ocr_on_pred"] = dict(doc.ocr_on_pred)
    return json.dumps(out, indent=indent, ensure_ascii=False).encode("utf-8")


# --------------------------------------------------------------------------
# ALTO
# --------------------------------------------------------------------------


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _children(el, name: str):
    return [c for c in el if _local(c.tag) == name]


def _descendants(el, name: str):
    return [c for c in el.iter() if _local(c.tag) == name and c is not el]


def _parse_points(points: str) -> list[tuple[float, float]]:
    """Accept ``"x1,y1 x2,y2"`` as well as flat ``"x1 y1 x2 y2"``."""
    nums = [float(t) for t in points.replace(",", " ").split()]
    if len(nums) % 2:
        raise SchemaError(f"odd number of polygon coordinates in {points!r}")
    return list(zip(nums[0::2], nums[1::2]))


def _alto_geometry(el, path: str):
    for shape in _children(el, "Shape"):
        for poly in _children(shape, "Polygon"):
            pts = _parse_points(poly.get("POINTS", ""))
            try:
                return Polygon(tuple(pts))
            except GeometryError as exc:
                raise SchemaError(str(exc), path) from exc
    try:
        x = float(el.get("HPOS"))
        y = float(el.get("VPOS"))
        w = float(el.get("WIDTH"))
        h = float(el.get("HEIGHT"))
    except (TypeError, ValueError) as exc:
        raise SchemaError("missing or non-numeric HPOS/VPOS/WIDTH/HEIGHT", path) from exc
    return Box(x, y, x + w, y + h)


def load_alto(data: bytes | str, page_id: str | None = None) -> PageLayout:
    """Read TextBlock/TextLine/String elements of an ALTO (v2-v4) file.

    Blocks become paragraph regions (lines joined by newlines), lines become
    line regions and strings word regions. Every region carries its block's
    id as ``semantic_class``. Zero-size elements are skipped with a warning.
    """
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise SchemaError(f"malformed XML: {exc}") from exc
    pages = _descendants(root, "Page") if _local(root.tag) != "Page" else [root]
    if not pages:
        raise SchemaError("no Page element", "/alto/Layout")
    page = pages[0]
    try:
        width = float(page.get("WIDTH"))
        height = float(page.get("HEIGHT"))
    except (TypeError, ValueError) as exc:
        raise SchemaError("Page WIDTH/HEIGHT missing", "/alto/Layout/Page") from exc
    space = next(iter(_children(page, "PrintSpace")), page)

    regions: list[Region] = []
    used: set[str] = set()

    def make_id(el, prefix: str) -> str:
        rid = el.get("ID") or f"{prefix}{len(regions)}"
        base, k = rid, 1
        while rid in used:
            rid = f"{base}_{k}"
            k += 1
        used.add(rid)
        return rid

    def add(el, rid: str, text: str, gran: Granularity, unit: str) -> None:
        try:
            geom = _alto_geometry(el, f"{_local(el.tag)}[@ID={rid}]")
        except GeometryError as exc:
            log.warning("skipping %s %s: %s", _local(el.tag), rid, exc)
            return
        regions.append(Region(rid, geom, text, gran, unit))

    for block in _descendants(space, "TextBlock"):
        block_id = make_id(block, "tb")
        lines = []
        for line in _descendants(block, "TextLine"):
            strings = _descendants(line, "String")
            lines.append((line, " ".join(c for c in (s.get("CONTENT", "") for s in strings) if c), strings))
        add(block, block_id, "\n".join(text for _, text, _ in lines), Granularity.PARAGRAPH, block_id)
        for line, line_text, strings in lines:
            add(line, make_id(line, "tl"), line_text, Granularity.LINE, block_id)
            for s in strings:
                add(s, make_id(s, "s"), s.get("CONTENT", ""), Granularity.WORD, block_id)

    units = _descendants(root, "MeasurementUnit")
    unit = (units[0].text or "").strip() if units else ""
    return PageLayout(page_id or page.get("ID") or "alto-page", width, height, regions, None, unit or "pixel")


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------

SCORE_KEYS = ("spacer", "spacer_micro", "spacd", "cdd_jsd", "cer", "spawer")

CSV_COLUMNS = (
    "page_id",
    "measure",
    "d_pars",
    "d_ocr",
    "d_int",
    "d_total",
    "coverage",
    "overlap",
    "trespass",
    "excess",
    "cote_score",
    "dominant",
    "ratio",
    "cote_gate_passed",
    *SCORE_KEYS,
    "error",
)


@dataclass
class PageReport:
    page_id: str
    decomposition: DecompositionReport | None = None
    cote: CoteComponents | None = None
    verdict: TriageVerdict | None = None
    scores: dict[str, float | None] = field(default_factory=dict)
    error: str | None = None

    def numeric_fields(self) -> dict[str, float]:
        out = {}
        if self.decomposition is not None:
            for k in ("d_pars", "d_ocr", "d_int", "d_total"):
                v = getattr(self.decomposition, k)
                if v is not None:
                    out[k] = v
        if self.cote is not None:
            out.update({k: v for k, v in self.cote.to_dict().items()})
        if self.verdict is not None and self.verdict.ratio is not None:
            out["ratio"] = self.verdict.ratio
        out.update({k: v for k, v in self.scores.items() if v is not None})
        return out

    def to_dict(self) -> dict:
        return {
            "page_id": self.page_id,
            "decomposition": self.decomposition.to_dict() if self.decomposition else None,
            "cote": self.cote.to_dict() if self.cote else None,
            "verdict": self.verdict.to_dict() if self.verdict else None,
            "scores": dict(self.scores),
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> PageReport:
        return cls(
            page_id=d["page_id"],
            decomposition=DecompositionReport.from_dict(d["decomposition"]) if d.get("decomposition") else None,
            cote=CoteComponents.from_dict(d["cote"]) if d.get("cote") else None,
            verdict=TriageVerdict.from_dict(d["verdict"]) if d.get("verdict") else None,
            scores=dict(d.get("scores", {})),
            error=d.get("error"),
        )


def compute_aggregates(pages: Iterable[PageReport]) -> dict[str, dict[str, float]]:
    """Mean and median of every numeric field, over pages that have it."""
    values: dict[str, list[float]] = {}
    for p in pages:
        for k, v in p.numeric_fields().items():
            values.setdefault(k, []).append(v)
    return {
        k: {"mean": statistics.fmean(vs), "median": statistics.median(vs), "n": len(vs)}
        for k, vs in sorted(values.items())
    }


@dataclass
class ReportDocument:
    pages: list[PageReport] = field(default_factory=list)
    corpus: PageReport | None = None
    aggregates: dict[str, dict[str, float]] = field(default_factory=dict)

    @classmethod
    def from_pages(cls, pages: Iterable[PageReport], corpus: PageReport | None = None) -> ReportDocument:
        pages = list(pages)
        return cls(pages, corpus, compute_aggregates(pages))

    def to_dict(self) -> dict:
        return {
            "pages": [p.to_dict() for p in self.pages],
            "corpus": self.corpus.to_dict() if self.corpus else None,
            "aggregates": self.aggregates,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> ReportDocument:
        return cls(
            [PageReport.from_dict(p) for p in d.get("pages", [])],
            PageReport.from_dict(d["corpus"]) if d.get("corpus") else None,
            {k: dict(v) for k, v in d.get("aggregates", {}).items()},
        )


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".6g")
    return str(v)


def _csv_row(p: PageReport) -> list[str]:
    dec, cote, ver = p.decomposition, p.cote, p.verdict
    vals = [
        p.page_id,
        dec.metric_name if dec else None,
        dec.d_pars if dec else None,
        dec.d_ocr if dec else None,
        dec.d_int if dec else None,
        dec.d_total if dec else None,
        cote.coverage if cote else None,
        cote.overlap if cote else None,
        cote.trespass if cote else None,
        cote.excess if cote else None,
        cote.score if cote else None,
        ver.dominant.value if ver else None,
        ver.ratio if ver else None,
        ver.cote_gate_passed if ver else None,
        *(p.scores.get(k) for k in SCORE_KEYS),
        p.error,
    ]
    return [_fmt(v) for v in vals]


def write_report(report: ReportDocument, fmt: str = "json") -> bytes:
    """Serialize a report; CSV has one row per page (then the corpus row, if any)."""
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, ensure_ascii=False).encode("utf-8")
    if fmt == "csv":
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for p in report.pages:
            writer.writerow(_csv_row(p))
        if report.corpus is not None:
            writer.writerow(_csv_row(report.corpus))
        return buf.getvalue().encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")


def read_report_json(data: bytes | str) -> ReportDocument:
    return ReportDocument.from_dict(json.loads(data))
