"""Synthetic pages, the crop-membership experiment and a pipeline simulator.

Pages are abstract layouts: glyphs are rectangles of a per-character
advance width (a stand-in for a proportional font), so every character has
an exact oracle centre. Nothing is rendered.

Randomness is always derived from ``(seed, cell coordinates)`` through
:class:`numpy.random.SeedSequence` or :class:`random.Random`, so results do
not depend on how work is scheduled.
"""

from __future__ import annotations

import math
import random
import statistics
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .charvec import CharVector, CountUnit
from .decompose import (
    CoteComponents,
    Dominant,
    VectorSet,
    cote_approx,
    decompose,
    triage,
)
from .geometry import (
    Box,
    CharToken,
    Granularity,
    PageLayout,
    Point,
    Region,
    assign_characters,
    bounding_box,
    infer_char_positions,
    points_in_geometry,
)

__all__ = [
    "LayoutSpec",
    "SyntheticPage",
    "ConfusionModel",
    "ParsePerturbation",
    "GranularityReport",
    "PipelineCell",
    "PipelineCorpus",
    "generate_page",
    "page_specs",
    "synthetic_page",
    "synthetic_corpus",
    "run_granularity_experiment",
    "corrupt_ocr",
    "perturb_parsing",
    "default_parse_grid",
    "default_ocr_grid",
    "simulate_pipeline_corpus",
    "triage_scores",
]

ALIGNMENTS = ("left", "centered", "justified")

# Relative English letter frequencies (percent).
_LETTER_FREQ = {
    "e": 12.7, "t": 9.1, "a": 8.2, "o": 7.5, "i": 7.0, "n": 6.7, "s": 6.3, "h": 6.1,
    "r": 6.0, "d": 4.3, "l": 4.0, "c": 2.8, "u": 2.8, "m": 2.4, "w": 2.4, "f": 2.2,
    "g": 2.0, "y": 2.0, "p": 1.9, "b": 1.5, "v": 1.0, "k": 0.8, "j": 0.15, "x": 0.15,
    "q": 0.1, "z": 0.07,
}
_WORD_LENGTH_WEIGHTS = [3.0, 17.0, 21.0, 16.0, 11.0, 9.0, 8.0, 6.0, 4.0, 3.0, 1.5, 0.5]


@dataclass(frozen=True)
class LayoutSpec:
    """Geometry and text parameters for one synthetic page (units: mm)."""

    page_width: float = 280.0
    page_height: float = 430.0
    columns: int = 1
    alignment: str = "left"
    char_width: float = 2.2
    width_spread: float = 0.45
    line_height: float = 5.0
    margins: float = 15.0
    gutter: float = 8.0
    words_per_paragraph: tuple[int, int] = (25, 140)
    max_words: int | None = None
    font_seed: int = 0

    def __post_init__(self):
        if self.columns < 1:
            raise ValueError("columns must be >= 1")
        if self.alignment not in ALIGNMENTS:
            raise ValueError(f"alignment must be one of {ALIGNMENTS}")
        if not (0 <= self.width_spread < 1):
            raise ValueError("width_spread must lie in [0, 1)")
        if self.char_width <= 0 or self.line_height <= 0 or self.margins < 0 or self.gutter < 0:
            raise ValueError("sizes must be positive")

    @property
    def column_width(self) -> float:
        return (self.page_width - 2 * self.margins - (self.columns - 1) * self.gutter) / self.columns

    def glyph_widths(self) -> dict[str, float]:
        rng = random.Random(self.font_seed)
        return {
            c: self.char_width * (1 + self.width_spread * rng.uniform(-1, 1))
            for c in sorted(_LETTER_FREQ)
        }


@dataclass
class SyntheticPage:
    layout: PageLayout
    spec: LayoutSpec
    seed: int
    chars: list[str]
    positions: np.ndarray  # (n, 2) glyph centres
    char_word: list[str]  # word region id of every character
    region_chars: dict[str, np.ndarray]  # region id -> oracle ids in text order

    def oracle_tokens(self) -> list[CharToken]:
        return [
            CharToken(c, Point(float(x), float(y)), w, i)
            for i, (c, (x, y), w) in enumerate(zip(self.chars, self.positions, self.char_word))
        ]

    def regions(self, granularity: Granularity | str) -> list[Region]:
        g = Granularity(granularity)
        return [r for r in self.layout.gt_regions if r.granularity is g]


def _random_word(rng: random.Random, letters, weights) -> str:
    n = rng.choices(range(1, len(_WORD_LENGTH_WEIGHTS) + 1), weights=_WORD_LENGTH_WEIGHTS)[0]
    return "".join(rng.choices(letters, weights=weights, k=n))


def generate_page(spec: LayoutSpec, seed: int, page_id: str | None = None) -> SyntheticPage:
    """Lay out random words in columns, top to bottom.

    Paragraphs are separated by a blank line and may continue into the next
    column; each column segment is its own paragraph region, and all
    segments (plus their lines and words) share the paragraph's
    ``semantic_class``.
    """
    rng = random.Random(seed)
    widths = spec.glyph_widths()
    letters = sorted(_LETTER_FREQ)
    weights = [_LETTER_FREQ[c] for c in letters]
    space = spec.char_width
    col_w = spec.column_width
    max_word_w = max(widths.values()) * len(_WORD_LENGTH_WEIGHTS)
    n_lines = int((spec.page_height - 2 * spec.margins) // spec.line_height)
    if col_w < max_word_w or n_lines < 1:
        raise ValueError("layout cannot fit a single line of text")

    def word_width(w: str) -> float:
        return sum(widths[c] for c in w)

    # ---- text: paragraphs of words broken greedily into lines ----
    total_slots = spec.columns * n_lines
    paragraphs: list[list[list[str]]] = []
    used = 0
    n_words = 0
    while used < total_slots and (spec.max_words is None or n_words < spec.max_words):
        k = rng.randint(*spec.words_per_paragraph)
        if spec.max_words is not None:
            k = min(k, spec.max_words - n_words)
        words = [_random_word(rng, letters, weights) for _ in range(k)]
        n_words += k
        lines, cur, cur_w = [], [], 0.0
        for w in words:
            ww = word_width(w)
            extra = ww if not cur else space + ww
            if cur and cur_w + extra > col_w:
                lines.append(cur)
                cur, cur_w = [w], ww
            else:
                cur.append(w)
                cur_w += extra
        if cur:
            lines.append(cur)
        paragraphs.append(lines)
        used += len(lines) + 1

    # ---- placement ----
    chars: list[str] = []
    positions: list[tuple[float, float]] = []
    char_word: list[str] = []
    region_chars: dict[str, list[int]] = {}
    words_out: list[Region] = []
    lines_out: list[Region] = []
    paras_out: list[Region] = []
    half = 0.4 * spec.line_height
    col, row = 0, 0
    full = False
    n_para_seg = 0

    def col_x0(c: int) -> float:
        return spec.margins + c * (col_w + spec.gutter)

    for p_idx, lines in enumerate(paragraphs):
        if full:
            break
        unit = f"p{p_idx}"
        seg_lines: list[Region] = []
        seg_chars: list[int] = []
        seg_text: list[str] = []

        def close_segment():
            nonlocal n_para_seg
            if not seg_lines:
                return
            boxes = [r.geometry for r in seg_lines]
            rid = f"{unit}.{n_para_seg}"
            n_para_seg += 1
            paras_out.append(Region(
                rid,
                Box(min(b.x0 for b in boxes), min(b.y0 for b in boxes), max(b.x1 for b in boxes), max(b.y1 for b in boxes)),
                " ".join(seg_text),
                Granularity.PARAGRAPH,
                unit,
                (seg_lines[0].order_hint[0], len([r for r in paras_out if r.order_hint[0] == seg_lines[0].order_hint[0]])),
            ))
            region_chars[rid] = list(seg_chars)
            seg_lines.clear()
            seg_chars.clear()
            seg_text.clear()

        for l_idx, line_words in enumerate(lines):
            if row >= n_lines:
                close_segment()
                col, row = col + 1, 0
                if col >= spec.columns:
                    full = True
                    break
            y_mid = spec.margins + (row + 0.5) * spec.line_height
            natural = sum(word_width(w) for w in line_words) + space * (len(line_words) - 1)
            gap = space
            x = col_x0(col)
            last_line = l_idx == len(lines) - 1
            if spec.alignment == "centered":
                x += (col_w - natural) / 2
            elif spec.alignment == "justified" and not last_line and len(line_words) > 1:
                gap = space + (col_w - natural) / (len(line_words) - 1)
            line_chars: list[int] = []
            line_start = x
            for w_i, w in enumerate(line_words):
                if w_i:
                    x += gap
                wid = f"w{len(words_out)}"
                w_chars = []
                w_x0 = x
                for c in w:
                    cw = widths[c]
                    positions.append((x + cw / 2, y_mid))
                    chars.append(c)
                    char_word.append(wid)
                    w_chars.append(len(chars) - 1)
                    x += cw
                words_out.append(Region(wid, Box(w_x0, y_mid - half, x, y_mid + half), w, Granularity.WORD, unit, (col, len(words_out))))
                region_chars[wid] = w_chars
                line_chars.extend(w_chars)
            lid = f"l{len(lines_out)}"
            line_region = Region(lid, Box(line_start, y_mid - half, x, y_mid + half), " ".join(line_words), Granularity.LINE, unit, (col, len(lines_out)))
            lines_out.append(line_region)
            region_chars[lid] = line_chars
            seg_lines.append(line_region)
            seg_chars.extend(line_chars)
            seg_text.append(" ".join(line_words))
            row += 1
        close_segment()
        row += 1  # blank line between paragraphs

    layout = PageLayout(
        page_id or f"synthetic-{seed}",
        spec.page_width,
        spec.page_height,
        paras_out + lines_out + words_out,
        None,
        "mm",
    )
    return SyntheticPage(
        layout,
        spec,
        seed,
        chars,
        np.asarray(positions, dtype=float).reshape(-1, 2),
        char_word,
        {k: np.asarray(v, dtype=np.int64) for k, v in region_chars.items()},
    )


def page_specs(n_pages: int, base: LayoutSpec | None = None) -> list[LayoutSpec]:
    """Cycle pages through every (columns, alignment) combination."""
    base = base or LayoutSpec()
    combos = [(c, a) for c in (1, 2, 3) for a in ALIGNMENTS]
    return [replace(base, columns=combos[i % len(combos)][0], alignment=combos[i % len(combos)][1]) for i in range(n_pages)]


def _seed_for(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)).generate_state(1)[0])


def synthetic_page(index: int, seed: int = 0, base: LayoutSpec | None = None) -> SyntheticPage:
    """Page ``index`` of the corpus defined by ``(seed, base)``; independent of the other pages."""
    spec = page_specs(index + 1, base)[index]
    return generate_page(spec, _seed_for(seed, 0, index), page_id=f"sim-{index}")


def synthetic_corpus(n_pages: int, seed: int = 0, base: LayoutSpec | None = None) -> list[SyntheticPage]:
    return [synthetic_page(i, seed, base) for i in range(n_pages)]


# --------------------------------------------------------------------------
# Crop-membership experiment
# --------------------------------------------------------------------------

GRANULARITIES = (Granularity.WORD, Granularity.LINE, Granularity.PARAGRAPH)


def inferred_positions(page: SyntheticPage, granularity: Granularity | str) -> np.ndarray:
    """Mono-spaced centre of every oracle character when inferred from regions of one level."""
    g = Granularity(granularity)
    out = np.full_like(page.positions, np.nan)
    for region in page.regions(g):
        toks = [t for t in infer_char_positions(region) if not t.token.isspace()]
        ids = page.region_chars[region.id]
        if len(toks) != len(ids):
            raise RuntimeError(f"token mismatch in region {region.id}")
        out[ids, 0] = [t.position.x for t in toks]
        out[ids, 1] = [t.position.y for t in toks]
    return out


@dataclass
class GranularityReport:
    """One row per crop, plus summary statistics per (granularity, size)."""

    samples: list[dict]
    granularities: tuple[str, ...] = tuple(g.value for g in GRANULARITIES)

    def summary(self) -> list[dict]:
        groups: dict[tuple, list[dict]] = {}
        for s in self.samples:
            groups.setdefault((s["width_frac"], s["height_frac"]), []).append(s)
        rows = []
        for g in self.granularities:
            for (wf, hf), items in sorted(groups.items()):
                vals = [s[f"error_{g}"] for s in items if s["n_truth"] > 0]
                rows.append({
                    "granularity": g,
                    "width_frac": wf,
                    "height_frac": hf,
                    "n": len(vals),
                    "n_skipped": len(items) - len(vals),
                    "mean": statistics.fmean(vals) if vals else math.nan,
                    "median": statistics.median(vals) if vals else math.nan,
                })
        return rows

    def lookup(self, granularity: str, width_frac: float, height_frac: float, stat: str = "median") -> float:
        for row in self.summary():
            if row["granularity"] == granularity and row["width_frac"] == width_frac and row["height_frac"] == height_frac:
                return row[stat]
        raise KeyError((granularity, width_frac, height_frac))

    def aggregate_by_width(self, granularity: str, stat: str = "median") -> dict[float, float]:
        by_w: dict[float, list[float]] = {}
        for s in self.samples:
            if s["n_truth"] > 0:
                by_w.setdefault(s["width_frac"], []).append(s[f"error_{granularity}"])
        fn = statistics.median if stat == "median" else statistics.fmean
        return {w: fn(v) for w, v in sorted(by_w.items())}


SAMPLE_COLUMNS = ("page", "columns", "alignment", "width_frac", "height_frac", "repeat", "x0", "y0", "n_truth")


def _crop_cells(width_fracs, height_fracs, paired: bool):
    if paired:
        if len(width_fracs) != len(height_fracs):
            raise ValueError("paired crops need as many widths as heights")
        return [(i, i, w, h) for i, (w, h) in enumerate(zip(width_fracs, height_fracs))]
    return [(wi, hi, w, h) for wi, w in enumerate(width_fracs) for hi, h in enumerate(height_fracs)]


def _page_crop_samples(page_index: int, page: SyntheticPage, width_fracs, height_fracs, repeats, seed, granularities,
                       inferred=None, paired: bool = False):
    if inferred is None:
        inferred = {g.value: inferred_positions(page, g) for g in granularities}
    W, H = page.layout.width, page.layout.height
    tx, ty = page.positions[:, 0], page.positions[:, 1]
    rows = []
    for wi, hi, wf, hf in _crop_cells(width_fracs, height_fracs, paired):
        cw, ch = wf * W, hf * H
        for rep in range(repeats):
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(page_index, wi, hi, rep)))
            x0 = float(rng.uniform(0.0, W - cw))
            y0 = float(rng.uniform(0.0, H - ch))
            x1, y1 = x0 + cw, y0 + ch
            truth = (tx >= x0) & (tx <= x1) & (ty >= y0) & (ty <= y1)
            n_truth = int(truth.sum())
            row = {
                "page": page_index,
                "columns": page.spec.columns,
                "alignment": page.spec.alignment,
                "width_frac": wf,
                "height_frac": hf,
                "repeat": rep,
                "x0": x0,
                "y0": y0,
                "n_truth": n_truth,
            }
            for g in granularities:
                ix, iy = inferred[g.value][:, 0], inferred[g.value][:, 1]
                got = (ix >= x0) & (ix <= x1) & (iy >= y0) & (iy <= y1)
                if n_truth:
                    row[f"error_{g.value}"] = int((truth ^ got).sum()) / n_truth
                else:
                    row[f"error_{g.value}"] = math.nan
            rows.append(row)
    return rows


def run_granularity_experiment(
    pages: Sequence[SyntheticPage],
    width_fracs: Sequence[float] = (0.1, 0.2, 0.3, 0.4, 0.5),
    height_fracs: Sequence[float] = (0.1, 0.2, 0.3, 0.4, 0.5),
    repeats: int = 30,
    seed: int = 0,
    granularities: Sequence[Granularity | str] = GRANULARITIES,
    page_offset: int = 0,
    paired: bool = False,
) -> GranularityReport:
    """Random crops compared under oracle and inferred character positions.

    For each crop the membership error is the size of the symmetric
    difference between the oracle and inferred character sets inside the
    crop, divided by the oracle count. Crops with no oracle character are
    kept in the samples with ``n_truth == 0`` and excluded from summaries.
    Crops are placed uniformly so that they lie fully on the page. With
    ``paired=True`` the i-th width goes with the i-th height instead of
    crossing every width with every height.
    """
    for f in list(width_fracs) + list(height_fracs):
        if not (0 < f <= 1):
            raise ValueError(f"crop fraction {f} outside (0, 1]")
    grans = tuple(Granularity(g) for g in granularities)
    samples = []
    for i, page in enumerate(pages):
        samples.extend(_page_crop_samples(page_offset + i, page, width_fracs, height_fracs, repeats, seed, grans, paired=paired))
    return GranularityReport(samples, tuple(g.value for g in grans))


# --------------------------------------------------------------------------
# OCR corruption
# --------------------------------------------------------------------------

# Visually confusable lowercase letters (source -> targets).
_VISUAL_CONFUSIONS = {
    "a": "oe", "b": "h", "c": "e", "d": "cl", "e": "c", "f": "t", "g": "q", "h": "b",
    "i": "l", "j": "i", "k": "h", "l": "i", "m": "n", "n": "mu", "o": "a", "p": "q",
    "q": "g", "r": "n", "s": "a", "t": "f", "u": "n", "v": "y", "w": "v", "x": "k",
    "y": "v", "z": "x",
}
NOISE_SYMBOLS = "$#%&@*~^|"


@dataclass(frozen=True)
class ConfusionModel:
    """Independent per-character OCR noise.

    ``substitution[c]`` maps replacement characters to probabilities; the
    remaining mass keeps ``c``. After every character one ordinary insertion
    (from ``insertion_alphabet``) and one noise symbol (from ``symbols``)
    may each follow.
    """

    substitution: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    insertion_rate: float = 0.0
    deletion_rate: float = 0.0
    symbol_noise_rate: float = 0.0
    insertion_alphabet: str = "abcdefghijklmnopqrstuvwxyz"
    symbols: str = NOISE_SYMBOLS
    label: str = ""

    def __post_init__(self):
        for name in ("insertion_rate", "deletion_rate", "symbol_noise_rate"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be a probability, got {v}")
        for src, row in self.substitution.items():
            if any(p < 0 for p in row.values()) or sum(row.values()) > 1.0 + 1e-12:
                raise ValueError(f"substitution row for {src!r} is not a sub-probability vector")

    @classmethod
    def visual(cls, substitution_rate: float = 0.0, deletion_rate: float = 0.0, insertion_rate: float = 0.0,
               symbol_noise_rate: float = 0.0, label: str = "") -> ConfusionModel:
        sub = {
            src: {t: substitution_rate / len(targets) for t in targets}
            for src, targets in _VISUAL_CONFUSIONS.items()
        } if substitution_rate > 0 else {}
        return cls(sub, insertion_rate, deletion_rate, symbol_noise_rate, label=label)


def _corrupt_char(c: str, model: ConfusionModel, rng: random.Random) -> str:
    out = c
    if not c.isspace():
        if rng.random() < model.deletion_rate:
            out = ""
        else:
            row = model.substitution.get(c)
            if row:
                v = rng.random()
                acc = 0.0
                for target, p in row.items():
                    acc += p
                    if v < acc:
                        out = target
                        break
    if model.insertion_rate and rng.random() < model.insertion_rate:
        out += rng.choice(model.insertion_alphabet)
    if model.symbol_noise_rate and rng.random() < model.symbol_noise_rate:
        out += rng.choice(model.symbols)
    return out


def corrupt_ocr(text: str, model: ConfusionModel, seed: int) -> str:
    """Apply the confusion model character by character; spaces are never deleted or substituted."""
    rng = random.Random(seed)
    return "".join(_corrupt_char(c, model, rng) for c in text)


# --------------------------------------------------------------------------
# Parsing perturbation
# --------------------------------------------------------------------------

PERTURBATION_KINDS = ("identity", "drop_regions", "merge_columns", "jitter", "degenerate_full_page", "crop_random")


@dataclass(frozen=True)
class ParsePerturbation:
    kind: str
    params: Mapping[str, float] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in PERTURBATION_KINDS:
            raise ValueError(f"unknown perturbation kind {self.kind!r}")
        p = dict(self.params)
        if self.kind == "drop_regions" and not (0.0 <= p.get("p", 0.0) <= 1.0):
            raise ValueError("drop probability must lie in [0, 1]")
        if self.kind == "jitter" and p.get("sigma", 0.0) < 0:
            raise ValueError("jitter sigma must be >= 0")
        if self.kind == "crop_random":
            if int(p.get("n", 1)) < 0:
                raise ValueError("crop count must be >= 0")
            for k in ("width_frac", "height_frac"):
                if not (0 < p.get(k, 0.2) <= 1):
                    raise ValueError(f"{k} must lie in (0, 1]")
        object.__setattr__(self, "params", p)

    @property
    def label(self) -> str:
        if not self.params:
            return self.kind
        inner = ",".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        return f"{self.kind}({inner})"

    @property
    def degenerate(self) -> bool:
        return self.kind == "degenerate_full_page"

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def drop(cls, p: float, seed: int = 0):
        return cls("drop_regions", {"p": p}, seed)

    @classmethod
    def jitter(cls, sigma: float, seed: int = 0):
        return cls("jitter", {"sigma": sigma}, seed)

    @classmethod
    def merge(cls):
        return cls("merge_columns")

    @classmethod
    def full_page(cls):
        return cls("degenerate_full_page")

    @classmethod
    def crops(cls, n: int, width_frac: float, height_frac: float, seed: int = 0):
        return cls("crop_random", {"n": n, "width_frac": width_frac, "height_frac": height_frac}, seed)


def _extent(regions, page_size):
    if page_size is not None:
        return 0.0, 0.0, float(page_size[0]), float(page_size[1])
    boxes = [bounding_box(r.geometry) for r in regions]
    return min(b.x0 for b in boxes), min(b.y0 for b in boxes), max(b.x1 for b in boxes), max(b.y1 for b in boxes)


def perturb_parsing(
    regions: Sequence[Region],
    p: ParsePerturbation,
    page_size: tuple[float, float] | None = None,
) -> list[Region]:
    """Turn ground-truth regions into simulated parser output (text cleared)."""
    rng = np.random.default_rng(p.seed)
    bare = [replace(r, text="") for r in regions]
    if p.kind == "identity":
        return bare
    if p.kind == "drop_regions":
        keep = rng.random(len(bare)) >= p.params["p"]
        return [r for r, k in zip(bare, keep) if k]
    if p.kind == "jitter":
        sigma = p.params.get("sigma", 0.0)
        if sigma == 0:
            return bare
        out = []
        px0, py0, px1, py1 = _extent(regions, page_size) if page_size is not None else (-math.inf, -math.inf, math.inf, math.inf)
        for r in bare:
            b = bounding_box(r.geometry)
            d = rng.normal(0.0, sigma, 4)
            x0, x1 = sorted((b.x0 + d[0], b.x1 + d[2]))
            y0, y1 = sorted((b.y0 + d[1], b.y1 + d[3]))
            x0, y0 = max(x0, px0), max(y0, py0)
            x1, y1 = min(x1, px1), min(y1, py1)
            if x1 - x0 <= 1e-9 or y1 - y0 <= 1e-9:
                continue
            out.append(replace(r, geometry=Box(x0, y0, x1, y1)))
        return out
    if p.kind == "merge_columns":
        groups: dict[int, list[Region]] = {}
        loose = []
        for r in bare:
            if r.order_hint is None:
                loose.append(r)
            else:
                groups.setdefault(r.order_hint[1], []).append(r)
        out = []
        for idx in sorted(groups):
            members = groups[idx]
            boxes = [bounding_box(m.geometry) for m in members]
            out.append(Region(
                f"merge-{idx}",
                Box(min(b.x0 for b in boxes), min(b.y0 for b in boxes), max(b.x1 for b in boxes), max(b.y1 for b in boxes)),
                "",
                members[0].granularity,
                None,
                (0, idx),
            ))
        return out + loose
    if p.kind == "degenerate_full_page":
        if not regions and page_size is None:
            return []
        x0, y0, x1, y1 = _extent(regions, page_size)
        return [Region("full-page", Box(x0, y0, x1, y1), "", Granularity.PAGE, None, (0, 0))]
    if p.kind == "crop_random":
        x0, y0, x1, y1 = _extent(regions, page_size)
        w = p.params.get("width_frac", 0.2) * (x1 - x0)
        h = p.params.get("height_frac", 0.2) * (y1 - y0)
        out = []
        for i in range(int(p.params.get("n", 1))):
            cx = x0 + rng.uniform(0, (x1 - x0) - w)
            cy = y0 + rng.uniform(0, (y1 - y0) - h)
            out.append(Region(f"crop-{i}", Box(cx, cy, cx + w, cy + h), "", Granularity.PARAGRAPH, None, (0, i)))
        return out
    raise AssertionError(p.kind)


# --------------------------------------------------------------------------
# Pipeline corpus
# --------------------------------------------------------------------------


def default_parse_grid() -> list[ParsePerturbation]:
    return [
        ParsePerturbation.identity(),
        ParsePerturbation.jitter(1.0),
        ParsePerturbation.jitter(3.0),
        ParsePerturbation.drop(0.05),
        ParsePerturbation.drop(0.15),
        ParsePerturbation.drop(0.35),
        ParsePerturbation.merge(),
        ParsePerturbation.full_page(),
    ]


def default_ocr_grid() -> list[ConfusionModel]:
    return [
        ConfusionModel(label="perfect"),
        ConfusionModel.visual(0.005, 0.002, 0.001, 0.001, label="light"),
        ConfusionModel.visual(0.01, 0.005, 0.002, 0.002, label="fair"),
        ConfusionModel.visual(0.03, 0.01, 0.005, 0.005, label="poor"),
        ConfusionModel.visual(0.06, 0.02, 0.01, 0.01, label="bad"),
        ConfusionModel.visual(0.12, 0.04, 0.02, 0.02, label="awful"),
        ConfusionModel.visual(0.02, 0.01, 0.0, 0.04, label="symbol-noise"),
    ]


@dataclass
class PipelineCell:
    page: int
    parse: str
    ocr: str
    degenerate: bool
    parse_magnitude: float
    ocr_magnitude: float
    label: Dominant | None
    vectors: VectorSet
    cote: CoteComponents

    def row(self) -> dict:
        return {
            "page": self.page,
            "parse": self.parse,
            "ocr": self.ocr,
            "degenerate": self.degenerate,
            "parse_magnitude": self.parse_magnitude,
            "ocr_magnitude": self.ocr_magnitude,
            "label": self.label.value if self.label else "",
        }


@dataclass
class PipelineCorpus:
    cells: list[PipelineCell]


def _label(parse_mag: float, ocr_mag: float, degenerate: bool) -> Dominant | None:
    if degenerate:
        return Dominant.PARSING
    if parse_mag == 0 and ocr_mag == 0:
        return None
    return Dominant.OCR if ocr_mag >= parse_mag else Dominant.PARSING


def _vector_from_counts(counts: np.ndarray, alphabet: Sequence[str]) -> CharVector:
    return CharVector({alphabet[k]: int(v) for k, v in enumerate(counts) if v}, CountUnit.CHARACTER)


def _pipeline_page(page_index: int, spec: LayoutSpec, parse_grid, ocr_grid, seed: int) -> list[PipelineCell]:
    page = generate_page(spec, _seed_for(seed, 0, page_index), page_id=f"sim-{page_index}")
    words = page.regions(Granularity.WORD)
    paragraphs = page.regions(Granularity.PARAGRAPH)
    page_size = (page.layout.width, page.layout.height)
    page_area = page_size[0] * page_size[1]

    # R is built the way a real evaluation would: from word boxes
    tokens: list[CharToken] = []
    for w in words:
        tokens.extend(infer_char_positions(w, start_index=len(tokens)))
    n = len(page.chars)

    # OCR outcome of every oracle character, per model
    outcomes = []
    for o_idx, model in enumerate(ocr_grid):
        rng = random.Random(_seed_for(seed, 1, page_index, o_idx))
        outs = [_corrupt_char(c, model, rng) for c in page.chars]
        n_sub = n_del = n_ins = 0
        for c, o in zip(page.chars, outs):
            if not o:
                n_del += 1
            else:
                if o[0] != c:
                    n_sub += 1
                n_ins += len(o) - 1
        outcomes.append((outs, n_sub + n_del + 0.5 * n_ins))
    alphabet = sorted({ch for outs, _ in outcomes for o in outs for ch in o} | set(page.chars))
    index = {ch: k for k, ch in enumerate(alphabet)}
    out_mats = []
    for outs, _ in outcomes:
        mat = np.zeros((n, len(alphabet)), dtype=np.int64)
        for i, o in enumerate(outs):
            for ch in o:
                mat[i, index[ch]] += 1
        out_mats.append(mat)
    Q = _vector_from_counts(np.bincount([index[c] for c in page.chars], minlength=len(alphabet)), alphabet)

    cells = []
    for p_idx, pert in enumerate(parse_grid):
        pert = replace(pert, seed=_seed_for(seed, 2, page_index, p_idx))
        preds = perturb_parsing(paragraphs, pert, page_size)
        mult = np.zeros(n, dtype=np.int64)
        for r in preds:
            mult += points_in_geometry(page.positions[:, 0], page.positions[:, 1], r.geometry)
        parse_mag = float((mult == 0).sum() + 0.5 * np.clip(mult - 1, 0, None).sum())
        R = assign_characters(tokens, preds).aggregate
        cote = cote_approx(paragraphs, preds, page_area)
        for o_idx, model in enumerate(ocr_grid):
            mat = out_mats[o_idx]
            S_star = _vector_from_counts(mat.sum(axis=0), alphabet)
            S = _vector_from_counts(mult @ mat, alphabet)
            ocr_mag = outcomes[o_idx][1]
            cells.append(PipelineCell(
                page=page_index,
                parse=pert.label,
                ocr=model.label or f"ocr{o_idx}",
                degenerate=pert.degenerate,
                parse_magnitude=parse_mag,
                ocr_magnitude=ocr_mag,
                label=_label(parse_mag, ocr_mag, pert.degenerate),
                vectors=VectorSet(Q, R, S_star, S),
                cote=cote,
            ))
    return cells


def simulate_pipeline_corpus(
    n_pages: int,
    parse_grid: Sequence[ParsePerturbation] | None = None,
    ocr_grid: Sequence[ConfusionModel] | None = None,
    seed: int = 0,
    base_spec: LayoutSpec | None = None,
    page_indices: Iterable[int] | None = None,
) -> PipelineCorpus:
    """Cross every page with every parse perturbation and OCR model.

    Ground-truth labels come from the injected noise, in SpACER-like units:
    ``parse magnitude = missed chars + 0.5 * duplicate captures`` and
    ``OCR magnitude = substitutions + deletions + 0.5 * insertions``. The
    larger one is the dominant source; full-page parses are always labelled
    parsing. Cells with no injected noise at all get no label.
    """
    parse_grid = list(parse_grid) if parse_grid is not None else default_parse_grid()
    ocr_grid = list(ocr_grid) if ocr_grid is not None else default_ocr_grid()
    if not parse_grid or not ocr_grid:
        raise ValueError("parse and OCR grids must be non-empty")
    specs = page_specs(n_pages, base_spec)
    indices = range(n_pages) if page_indices is None else page_indices
    cells = []
    for i in indices:
        cells.extend(_pipeline_page(i, specs[i], parse_grid, ocr_grid, seed))
    return PipelineCorpus(cells)


def triage_scores(
    cells: Sequence[PipelineCell],
    measure: str = "spacer",
    use_cote: bool = False,
    include_degenerate: bool = True,
    ratio_threshold: float = 0.5,
    cote_threshold: float = 0.5,
) -> dict:
    """F1 (OCR-dominant as the positive class) of the triage rule against construction labels."""
    tp = fp = fn = tn = skipped = 0
    for cell in cells:
        if cell.label is None or (cell.degenerate and not include_degenerate):
            skipped += 1
            continue
        report = decompose(cell.vectors, measure)
        verdict = triage(report, cell.cote if use_cote else None, ratio_threshold, cote_threshold)
        predicted = Dominant.PARSING if verdict.dominant is Dominant.INDETERMINATE else verdict.dominant
        if predicted is Dominant.OCR:
            if cell.label is Dominant.OCR:
                tp += 1
            else:
                fp += 1
        elif cell.label is Dominant.OCR:
            fn += 1
        else:
            tn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"f1": f1, "precision": precision, "recall": recall, "tp": tp, "fp": fp, "fn": fn, "tn": tn,
            "n": tp + fp + fn + tn, "skipped": skipped}
