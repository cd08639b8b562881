import math
import statistics

import numpy as np
import pytest

from cevkit.decompose import Dominant, cote_approx, decompose
from cevkit.geometry import Box, Granularity, PageLayout, Region, point_in_geometry
from cevkit.simulate import (
    ConfusionModel,
    LayoutSpec,
    ParsePerturbation,
    SyntheticPage,
    corrupt_ocr,
    generate_page,
    page_specs,
    perturb_parsing,
    run_granularity_experiment,
    simulate_pipeline_corpus,
    synthetic_corpus,
    synthetic_page,
    triage_scores,
)

# --- page generation ---------------------------------------------------------------


def test_single_column_positions_inside_column():
    spec = LayoutSpec(columns=1, max_words=10)
    page = generate_page(spec, 1)
    assert len(page.regions("word")) == 10
    x = page.positions[:, 0]
    assert x.min() >= spec.margins and x.max() <= spec.margins + spec.column_width


def test_generation_is_deterministic():
    a, b = generate_page(LayoutSpec(), 9), generate_page(LayoutSpec(), 9)
    assert a.layout == b.layout
    assert np.array_equal(a.positions, b.positions)
    assert generate_page(LayoutSpec(), 10).chars != a.chars


def test_three_columns_have_disjoint_extents():
    page = generate_page(LayoutSpec(columns=3), 4)
    extents = {}
    for w in page.regions("word"):
        col = w.order_hint[0]
        lo, hi = extents.get(col, (math.inf, -math.inf))
        extents[col] = (min(lo, w.geometry.x0), max(hi, w.geometry.x1))
    spans = [extents[c] for c in sorted(extents)]
    assert len(spans) == 3
    for (_, hi), (lo, _) in zip(spans, spans[1:]):
        assert hi < lo


@pytest.mark.parametrize("alignment", ["left", "centered", "justified"])
def test_each_oracle_position_in_its_word_box(alignment):
    page = generate_page(LayoutSpec(columns=2, alignment=alignment), 2)
    boxes = {r.id: r.geometry for r in page.regions("word")}
    for (x, y), wid in zip(page.positions, page.char_word):
        assert point_in_geometry((x, y), boxes[wid])


def test_region_texts_match_oracle_characters():
    page = generate_page(LayoutSpec(columns=2), 3)
    for g in ("word", "line", "paragraph"):
        for r in page.regions(g):
            ids = page.region_chars[r.id]
            assert "".join(page.chars[i] for i in ids) == r.text.replace(" ", "")


def test_invalid_specs():
    with pytest.raises(ValueError):
        LayoutSpec(columns=0)
    with pytest.raises(ValueError):
        LayoutSpec(alignment="ragged")
    with pytest.raises(ValueError, match="cannot fit"):
        generate_page(LayoutSpec(columns=12), 0)


def test_page_specs_cycle_all_combinations():
    specs = page_specs(9)
    assert len({(s.columns, s.alignment) for s in specs}) == 9


def test_synthetic_page_independent_of_corpus_size():
    assert synthetic_page(4, seed=2).layout == synthetic_corpus(6, seed=2)[4].layout


# --- granularity experiment ------------------------------------------------------------


def _one_char_word_page() -> SyntheticPage:
    """Every word is one glyph, so word-level inference is the oracle."""
    rng = np.random.default_rng(0)
    chars, pos, words, region_chars = [], [], [], {}
    for i in range(60):
        x, y = rng.uniform(5, 95), rng.uniform(5, 95)
        wid = f"w{i}"
        words.append(Region(wid, Box(x - 1, y - 1, x + 1, y + 1), "a", Granularity.WORD))
        chars.append("a")
        pos.append((x, y))
        region_chars[wid] = np.array([i])
    layout = PageLayout("oracle", 100, 100, words)
    return SyntheticPage(layout, LayoutSpec(), 0, chars, np.array(pos), [r.id for r in words], region_chars)


def test_oracle_equal_inference_has_zero_error():
    report = run_granularity_experiment([_one_char_word_page()], [0.1, 0.3], [0.2, 0.5], repeats=5, seed=1,
                                        granularities=["word"])
    vals = [s["error_word"] for s in report.samples if s["n_truth"]]
    assert vals and all(v == 0 for v in vals)


def test_full_page_crop_has_zero_error():
    page = generate_page(LayoutSpec(columns=2, max_words=200), 5)
    report = run_granularity_experiment([page], [1.0], [1.0], repeats=2, seed=0)
    for s in report.samples:
        assert s["error_word"] == s["error_line"] == s["error_paragraph"] == 0


def test_sample_count_and_paired_mode():
    pages = synthetic_corpus(2, seed=0, base=LayoutSpec(max_words=150))
    crossed = run_granularity_experiment(pages, [0.1, 0.2], [0.1, 0.2], repeats=2, seed=0)
    paired = run_granularity_experiment(pages, [0.1, 0.2], [0.1, 0.2], repeats=2, seed=0, paired=True)
    assert len(crossed.samples) == 16
    assert len(paired.samples) == 8
    assert {(s["width_frac"], s["height_frac"]) for s in paired.samples} == {(0.1, 0.1), (0.2, 0.2)}


def test_experiment_is_schedule_independent():
    pages = synthetic_corpus(3, seed=4, base=LayoutSpec(max_words=200))
    whole = run_granularity_experiment(pages, [0.2], [0.3], repeats=3, seed=8).samples
    parts = []
    for i, p in enumerate(pages):
        parts.extend(run_granularity_experiment([p], [0.2], [0.3], repeats=3, seed=8, page_offset=i).samples)
    assert repr(whole) == repr(parts)


def test_bad_fraction_rejected():
    with pytest.raises(ValueError):
        run_granularity_experiment([], [0.0], [0.5])


def test_columns_do_not_change_word_error():
    pages = synthetic_corpus(18, seed=11)
    rep = run_granularity_experiment(pages, [0.2, 0.3], [0.2, 0.3], repeats=8, seed=3)
    by_cols = {}
    for s in rep.samples:
        if s["n_truth"]:
            by_cols.setdefault(s["columns"], []).append(s["error_word"])
    quartiles = {c: statistics.quantiles(v, n=4) for c, v in by_cols.items()}
    lo = max(q[0] for q in quartiles.values())
    hi = min(q[2] for q in quartiles.values())
    assert lo <= hi, quartiles  # interquartile ranges share a common interval


# --- OCR corruption ----------------------------------------------------------------------


def test_zero_rates_identity():
    assert corrupt_ocr("hello world", ConfusionModel(), 1) == "hello world"


def test_full_deletion():
    assert corrupt_ocr("abc", ConfusionModel(deletion_rate=1.0), 1) == ""


def test_forced_substitution():
    assert corrupt_ocr("aaa", ConfusionModel({"a": {"b": 1.0}}), 1) == "bbb"


def test_spaces_survive():
    out = corrupt_ocr("a b c", ConfusionModel(deletion_rate=1.0), 3)
    assert out == "  "


def test_confusion_validation():
    with pytest.raises(ValueError):
        ConfusionModel(deletion_rate=1.5)
    with pytest.raises(ValueError):
        ConfusionModel({"a": {"b": 0.7, "c": 0.6}})


# --- parse perturbation --------------------------------------------------------------------


def _paras(seed=0, columns=3):
    page = generate_page(LayoutSpec(columns=columns), seed)
    return page, page.regions("paragraph")


def test_jitter_zero_and_identity():
    _, paras = _paras()
    same = [r.geometry for r in paras]
    assert [r.geometry for r in perturb_parsing(paras, ParsePerturbation.jitter(0.0))] == same
    assert [r.geometry for r in perturb_parsing(paras, ParsePerturbation.identity())] == same
    assert all(r.text == "" for r in perturb_parsing(paras, ParsePerturbation.identity()))


def test_drop_everything():
    _, paras = _paras()
    assert perturb_parsing(paras, ParsePerturbation.drop(1.0)) == []


def test_full_page_prediction_trespasses():
    page, paras = _paras()
    preds = perturb_parsing(paras, ParsePerturbation.full_page(), (page.layout.width, page.layout.height))
    assert len(preds) == 1
    assert cote_approx(paras, preds).trespass >= 0.5


def test_merge_columns_joins_rows():
    _, paras = _paras(columns=2)
    merged = perturb_parsing(paras, ParsePerturbation.merge())
    assert 0 < len(merged) < len(paras)


def test_random_crops():
    page, paras = _paras()
    crops = perturb_parsing(paras, ParsePerturbation.crops(4, 0.2, 0.1, seed=2), (page.layout.width, page.layout.height))
    assert len(crops) == 4


def test_bad_perturbations():
    with pytest.raises(ValueError):
        ParsePerturbation("shred")
    with pytest.raises(ValueError):
        ParsePerturbation.drop(2.0)


# --- pipeline corpus -----------------------------------------------------------------------


def test_construction_labels():
    corpus = simulate_pipeline_corpus(
        1,
        [ParsePerturbation.identity(), ParsePerturbation.drop(0.6)],
        [ConfusionModel(label="clean"), ConfusionModel.visual(0.2, 0.05, 0.02, label="heavy")],
        seed=1,
    )
    cells = {(c.parse, c.ocr): c for c in corpus.cells}
    assert cells[("drop_regions(p=0.6)", "clean")].label is Dominant.PARSING
    assert cells[("identity", "heavy")].label is Dominant.OCR
    assert cells[("identity", "clean")].label is None


def test_degenerate_cells_always_parsing():
    corpus = simulate_pipeline_corpus(1, [ParsePerturbation.full_page()], [ConfusionModel.visual(0.3, label="x")], seed=0)
    assert all(c.degenerate and c.label is Dominant.PARSING for c in corpus.cells)


def test_pipeline_deterministic():
    a = simulate_pipeline_corpus(2, seed=5)
    b = simulate_pipeline_corpus(2, seed=5)
    assert [(c.row(), c.vectors, c.cote) for c in a.cells] == [(c.row(), c.vectors, c.cote) for c in b.cells]


def test_more_deletion_never_lowers_median_d_ocr():
    rates = [0.0, 0.02, 0.05, 0.1, 0.2]
    grid = [ConfusionModel(deletion_rate=r, label=f"del{r}") for r in rates]
    corpus = simulate_pipeline_corpus(6, [ParsePerturbation.identity()], grid, seed=2)
    medians = []
    for model in grid:
        vals = [decompose(c.vectors).d_ocr for c in corpus.cells if c.ocr == model.label]
        medians.append(statistics.median(vals))
    assert medians == sorted(medians)


def test_triage_scores_small_corpus():
    corpus = simulate_pipeline_corpus(2, seed=0)
    s = triage_scores(corpus.cells, include_degenerate=False)
    assert 0 <= s["f1"] <= 1
    assert s["n"] + s["skipped"] == len(corpus.cells)
