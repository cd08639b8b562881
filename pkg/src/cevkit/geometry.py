"""Region geometry, mono-spaced character placement and character assignment.

Ground-truth datasets rarely carry glyph positions. Characters are therefore
placed at evenly spaced centres inside their word, line or paragraph box and
then attributed to every predicted region that contains that centre.
Containment is boundary-inclusive throughout.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

import numpy as np
import shapely
from shapely.geometry import Polygon as _ShapelyPolygon
from shapely.geometry import box as _shapely_box

from .charvec import CharVector, CountUnit, NormalizationPolicy, normalize_text

__all__ = [
    "GeometryError",
    "Point",
    "Box",
    "Polygon",
    "Granularity",
    "Region",
    "PageLayout",
    "CharToken",
    "AssignmentTable",
    "bounding_box",
    "geometry_area",
    "to_shapely",
    "point_in_geometry",
    "points_in_geometry",
    "intersection_area",
    "infer_char_positions",
    "word_tokens",
    "assign_characters",
]


class GeometryError(ValueError):
    pass


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Box:
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        coords = (self.x0, self.y0, self.x1, self.y1)
        if not all(math.isfinite(c) for c in coords):
            raise GeometryError(f"non-finite box coordinates {coords}")
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise GeometryError(f"degenerate box {coords}: need x0 < x1 and y0 < y1")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    def coords(self) -> list[float]:
        return [self.x0, self.y0, self.x1, self.y1]


@dataclass(frozen=True)
class Polygon:
    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        if len(verts) >= 2 and verts[0] == verts[-1]:
            verts = verts[:-1]
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise GeometryError(f"polygon needs at least 3 vertices, got {len(verts)}")
        if not all(math.isfinite(c) for v in verts for c in v):
            raise GeometryError("non-finite polygon coordinates")
        if _signed_area(verts) == 0.0:
            raise GeometryError("zero-area polygon")
        if not _is_simple(verts):
            raise GeometryError("self-intersecting polygon")

    def coords(self) -> list[float]:
        return [c for v in self.vertices for c in v]


RegionGeometry = Union[Box, Polygon]


class Granularity(str, enum.Enum):
    WORD = "word"
    LINE = "line"
    PARAGRAPH = "paragraph"
    PAGE = "page"


@dataclass(frozen=True)
class Region:
    id: str
    geometry: RegionGeometry
    text: str = ""
    granularity: Granularity = Granularity.WORD
    semantic_class: str | None = None
    order_hint: tuple[int, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "granularity", Granularity(self.granularity))
        if self.order_hint is not None:
            object.__setattr__(self, "order_hint", (int(self.order_hint[0]), int(self.order_hint[1])))


@dataclass
class PageLayout:
    page_id: str
    width: float
    height: float
    gt_regions: list[Region] = field(default_factory=list)
    pred_regions: list[Region] | None = None
    unit: str = "px"

    def __post_init__(self):
        for label, regions in (("gt", self.gt_regions), ("pred", self.pred_regions or [])):
            seen = set()
            for r in regions:
                if r.id in seen:
                    raise GeometryError(f"duplicate {label} region id {r.id!r}")
                seen.add(r.id)

    def out_of_bounds(self) -> list[str]:
        """Ids of regions whose bounding box leaves the page rectangle."""
        bad = []
        for r in list(self.gt_regions) + list(self.pred_regions or []):
            b = bounding_box(r.geometry)
            if b.x0 < 0 or b.y0 < 0 or b.x1 > self.width or b.y1 > self.height:
                bad.append(r.id)
        return bad


@dataclass(frozen=True)
class CharToken:
    token: str
    position: Point
    source_region: str
    sequence_index: int


# --------------------------------------------------------------------------
# Polygon helpers
# --------------------------------------------------------------------------


def _signed_area(verts) -> float:
    s = 0.0
    n = len(verts)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment(a, b, p) -> bool:
    return (
        min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
        and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    )


def _segments_intersect(p1, p2, p3, p4) -> bool:
    d1 = _orient(p3, p4, p1)
    d2 = _orient(p3, p4, p2)
    d3 = _orient(p1, p2, p3)
    d4 = _orient(p1, p2, p4)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    if d1 == 0 and _on_segment(p3, p4, p1):
        return True
    if d2 == 0 and _on_segment(p3, p4, p2):
        return True
    if d3 == 0 and _on_segment(p1, p2, p3):
        return True
    if d4 == 0 and _on_segment(p1, p2, p4):
        return True
    return False


def _is_simple(verts) -> bool:
    n = len(verts)
    if len(set(verts)) != n:
        return False
    edges = [(verts[i], verts[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                # adjacent edges share a vertex; reject only collinear folds
                a, b = edges[i]
                c, d = edges[j]
                shared = b if j == i + 1 else a
                other_i = a if j == i + 1 else b
                other_j = d if j == i + 1 else c
                if _orient(other_i, shared, other_j) == 0 and (
                    (other_j[0] - shared[0]) * (other_i[0] - shared[0])
                    + (other_j[1] - shared[1]) * (other_i[1] - shared[1])
                ) > 0:
                    return False
                continue
            if _segments_intersect(*edges[i], *edges[j]):
                return False
    return True


def bounding_box(g: RegionGeometry) -> Box:
    if isinstance(g, Box):
        return g
    xs = [v[0] for v in g.vertices]
    ys = [v[1] for v in g.vertices]
    return Box(min(xs), min(ys), max(xs), max(ys))


def geometry_area(g: RegionGeometry) -> float:
    if isinstance(g, Box):
        return g.width * g.height
    return abs(_signed_area(g.vertices))


def to_shapely(g: RegionGeometry):
    if isinstance(g, Box):
        return _shapely_box(g.x0, g.y0, g.x1, g.y1)
    return _ShapelyPolygon(g.vertices)


# --------------------------------------------------------------------------
# Containment
# --------------------------------------------------------------------------


def point_in_geometry(p: Point | tuple[float, float], g: RegionGeometry) -> bool:
    """Boundary-inclusive containment test (ray casting for polygons)."""
    x, y = p
    if isinstance(g, Box):
        return g.x0 <= x <= g.x1 and g.y0 <= y <= g.y1
    verts = g.vertices
    n = len(verts)
    inside = False
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        if _orient((ax, ay), (bx, by), (x, y)) == 0 and _on_segment((ax, ay), (bx, by), (x, y)):
            return True
        if (ay > y) != (by > y):
            # x coordinate where the edge crosses the horizontal through p
            cross = (bx - ax) * (y - ay) - (x - ax) * (by - ay)
            if (cross > 0) == (by > ay):
                inside = not inside
    return inside


def points_in_geometry(xs: np.ndarray, ys: np.ndarray, g: RegionGeometry) -> np.ndarray:
    """Vectorised :func:`point_in_geometry` over coordinate arrays."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if isinstance(g, Box):
        return (xs >= g.x0) & (xs <= g.x1) & (ys >= g.y0) & (ys <= g.y1)
    b = bounding_box(g)
    result = np.zeros(xs.shape, dtype=bool)
    cand = (xs >= b.x0) & (xs <= b.x1) & (ys >= b.y0) & (ys <= b.y1)
    if not cand.any():
        return result
    px, py = xs[cand], ys[cand]
    inside = np.zeros(px.shape, dtype=bool)
    boundary = np.zeros(px.shape, dtype=bool)
    verts = g.vertices
    n = len(verts)
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        orient = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        on_seg = (
            (orient == 0)
            & (px >= min(ax, bx)) & (px <= max(ax, bx))
            & (py >= min(ay, by)) & (py <= max(ay, by))
        )
        boundary |= on_seg
        straddle = (ay > py) != (by > py)
        cross = (bx - ax) * (py - ay) - (px - ax) * (by - ay)
        flip = straddle & ((cross > 0) == (by > ay))
        inside ^= flip
    result[cand] = inside | boundary
    return result


def intersection_area(a: RegionGeometry, b: RegionGeometry) -> float:
    """Area of overlap; exact for two boxes, shapely clipping otherwise."""
    if isinstance(a, Box) and isinstance(b, Box):
        w = min(a.x1, b.x1) - max(a.x0, b.x0)
        h = min(a.y1, b.y1) - max(a.y0, b.y0)
        return w * h if w > 0 and h > 0 else 0.0
    return float(shapely.area(shapely.intersection(to_shapely(a), to_shapely(b))))


# --------------------------------------------------------------------------
# Mono-spaced character placement
# --------------------------------------------------------------------------

DEFAULT_LINE_ASPECT = 1 / 80  # virtual lines per character for unbroken paragraphs


def _mono_line(text: str, x0: float, x1: float, y: float):
    n = len(text)
    w = (x1 - x0) / n
    return [(c, x0 + (i + 0.5) * w, y) for i, c in enumerate(text)]


def _snap_inside(x: float, y: float, poly: Polygon) -> tuple[float, float]:
    verts = poly.vertices
    n = len(verts)
    best = None
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        dx, dy = bx - ax, by - ay
        t = ((x - ax) * dx + (y - ay) * dy) / (dx * dx + dy * dy)
        t = min(1.0, max(0.0, t))
        qx, qy = ax + t * dx, ay + t * dy
        d2 = (qx - x) ** 2 + (qy - y) ** 2
        if best is None or d2 < best[0]:
            best = (d2, qx, qy, dx, dy)
    _, qx, qy, dx, dy = best
    if point_in_geometry((qx, qy), poly):
        return qx, qy
    # rounding left the projection just outside: step along the inward normal
    sign = 1.0 if _signed_area(verts) > 0 else -1.0
    norm = math.hypot(dx, dy)
    nx, ny = -dy / norm * sign, dx / norm * sign
    scale = max(abs(c) for v in verts for c in v) or 1.0
    for k in range(1, 60):
        step = scale * 1e-12 * (2**k)
        cx, cy = qx + nx * step, qy + ny * step
        if point_in_geometry((cx, cy), poly):
            return cx, cy
    return qx, qy


def infer_char_positions(
    region: Region,
    policy: NormalizationPolicy | None = None,
    line_height: float | None = None,
    line_aspect: float = DEFAULT_LINE_ASPECT,
    start_index: int = 0,
) -> list[CharToken]:
    """Place the region's normalized characters at mono-spaced centres.

    Word and line regions become one row on the vertical midline of the
    box; spaces get positions too. Paragraph regions are split into virtual
    rows: one per explicit newline when the text has them, otherwise
    ``round(box_height / line_height)`` rows where ``line_height`` defaults
    to ``box_height / max(1, round(n_chars * line_aspect))``. Rows share the
    characters evenly. Polygons use their bounding box and any centre that
    falls outside the polygon is snapped to the nearest point inside it.
    """
    policy = policy or NormalizationPolicy()
    geom = region.geometry
    bb = bounding_box(geom)
    if not (bb.width > 0 and bb.height > 0):
        raise GeometryError(f"degenerate geometry for region {region.id!r}")

    placed: list[tuple[str, float, float]] = []
    if region.granularity is Granularity.PARAGRAPH or region.granularity is Granularity.PAGE:
        raw_lines = [normalize_text(line, policy) for line in region.text.splitlines()]
        raw_lines = [line for line in raw_lines if line]
        if len(raw_lines) > 1:
            rows = [line + " " for line in raw_lines[:-1]] + [raw_lines[-1]]
            # keep token count identical to the flattened text
            joined = "".join(rows)
            if joined != normalize_text(region.text, policy):
                rows = _split_even(normalize_text(region.text, policy), len(raw_lines))
        else:
            text = normalize_text(region.text, policy)
            if not text:
                return []
            if line_height is None:
                k = max(1, round(len(text) * line_aspect))
            else:
                k = max(1, round(bb.height / line_height))
            rows = _split_even(text, k)
        rows = [r for r in rows if r]
        if not rows:
            return []
        row_h = bb.height / len(rows)
        for i, row in enumerate(rows):
            placed.extend(_mono_line(row, bb.x0, bb.x1, bb.y0 + (i + 0.5) * row_h))
    else:
        text = normalize_text(region.text, policy)
        if not text:
            return []
        placed = _mono_line(text, bb.x0, bb.x1, 0.5 * (bb.y0 + bb.y1))

    tokens = []
    for i, (c, x, y) in enumerate(placed):
        if isinstance(geom, Polygon) and not point_in_geometry((x, y), geom):
            x, y = _snap_inside(x, y, geom)
        tokens.append(CharToken(c, Point(x, y), region.id, start_index + i))
    return tokens


def _split_even(text: str, k: int) -> list[str]:
    n = len(text)
    k = max(1, min(k, n))
    bounds = [round(i * n / k) for i in range(k + 1)]
    return [text[bounds[i]:bounds[i + 1]] for i in range(k)]


def word_tokens(chars: Sequence[CharToken]) -> list[CharToken]:
    """Collapse consecutive non-space characters of one region into word tokens.

    Each word sits at the mean position of its characters.
    """
    words: list[CharToken] = []
    buf: list[CharToken] = []

    def flush():
        if buf:
            x = sum(t.position.x for t in buf) / len(buf)
            y = sum(t.position.y for t in buf) / len(buf)
            words.append(CharToken("".join(t.token for t in buf), Point(x, y), buf[0].source_region, len(words)))
            buf.clear()

    for t in chars:
        if t.token.isspace() or (buf and t.source_region != buf[-1].source_region):
            flush()
        if not t.token.isspace():
            buf.append(t)
    flush()
    return words


# --------------------------------------------------------------------------
# Assignment
# --------------------------------------------------------------------------


@dataclass
class AssignmentTable:
    memberships: list[list[str]]
    per_prediction: dict[str, CharVector]
    aggregate: CharVector


def assign_characters(
    tokens: Sequence[CharToken],
    predictions: Sequence[Region],
    unit: CountUnit = CountUnit.CHARACTER,
    count_spaces: bool = False,
) -> AssignmentTable:
    """Attribute each token to every prediction whose geometry contains it.

    A token inside ``k`` overlapping predictions counts ``k`` times in the
    aggregate; a token outside all predictions counts zero times.
    """
    unit = CountUnit(unit)
    keep = [
        i for i, t in enumerate(tokens)
        if count_spaces or not t.token.isspace()
    ]
    xs = np.fromiter((tokens[i].position.x for i in keep), dtype=float, count=len(keep))
    ys = np.fromiter((tokens[i].position.y for i in keep), dtype=float, count=len(keep))
    memberships: list[list[str]] = [[] for _ in tokens]
    per_prediction: dict[str, CharVector] = {}
    for pred in predictions:
        mask = points_in_geometry(xs, ys, pred.geometry) if keep else np.zeros(0, dtype=bool)
        counts: dict[str, int] = {}
        for local in np.flatnonzero(mask):
            idx = keep[local]
            memberships[idx].append(pred.id)
            tok = tokens[idx].token
            counts[tok] = counts.get(tok, 0) + 1
        per_prediction[pred.id] = CharVector(counts, unit)
    aggregate = CharVector.sum(per_prediction.values(), unit)
    return AssignmentTable(memberships, per_prediction, aggregate)
