"""Hand-built and synthetic page fixtures."""

from __future__ import annotations

import random
from dataclasses import replace

from cevkit.geometry import Box, Granularity, PageLayout, Region
from cevkit.simulate import ConfusionModel, LayoutSpec, corrupt_ocr, generate_page


def three_block_page() -> PageLayout:
    """Three paragraphs side by side, each with two word regions."""
    gt = []
    for k, (x0, words) in enumerate([(10, ("alpha", "beta")), (110, ("gamma", "delta")), (210, ("omega", "psi"))]):
        gt.append(Region(f"p{k}", Box(x0, 10, x0 + 80, 40), " ".join(words), Granularity.PARAGRAPH, f"p{k}"))
        for j, w in enumerate(words):
            gt.append(Region(f"p{k}w{j}", Box(x0, 10 + 15 * j, x0 + 10 * len(w), 22 + 15 * j), w, Granularity.WORD, f"p{k}"))
    return PageLayout("three-blocks", 300, 60, gt)


def words_of(page: PageLayout) -> list[Region]:
    return [r for r in page.gt_regions if r.granularity is Granularity.WORD]


def with_predictions(page: PageLayout, preds) -> PageLayout:
    return replace(page, pred_regions=list(preds))


def noisy(texts: dict[str, str], rate: float, seed: int) -> dict[str, str]:
    model = ConfusionModel.visual(rate, rate / 3, rate / 6)
    return {rid: corrupt_ocr(t, model, seed + i) for i, (rid, t) in enumerate(sorted(texts.items()))}


def synthetic_layout(columns: int = 3, seed: int = 0, max_words: int | None = 400) -> PageLayout:
    spec = LayoutSpec(columns=columns, max_words=max_words)
    return generate_page(spec, seed).layout


def contained_text(pred: Region, words: list[Region]) -> str:
    """Concatenated text of every word box lying entirely inside ``pred`` (a Box)."""
    g = pred.geometry
    inside = [w.text for w in words
              if g.x0 <= w.geometry.x0 and w.geometry.x1 <= g.x1 and g.y0 <= w.geometry.y0 and w.geometry.y1 <= g.y1]
    return " ".join(inside)


def random_subset(items, frac: float, seed: int):
    rng = random.Random(seed)
    return [x for x in items if rng.random() < frac]
