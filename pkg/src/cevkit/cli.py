"""``cevkit`` command line.

Exit codes: 0 success, 1 internal error, 2 input error (bad flags, missing
or unreadable files, pages that could not be scored).
"""

from __future__ import annotations

import csv
import functools
import glob
import io as _io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import click

from .charvec import CharVector, CountUnit, NormalizationPolicy, char_vector, normalize_text
from .decompose import (
    build_vectors,
    compare,
    cote_approx,
    decompose,
    select_level,
    triage,
)
from .geometry import Granularity, Region
from .io import (
    PageDocument,
    PageReport,
    ReportDocument,
    SchemaError,
    dump_page_json,
    load_alto,
    load_page_json,
    read_report_json,
    write_report,
)
from .metrics import SpacerInputs, UndefinedMetricError, edit_counts, spacer_micro
from .simulate import (
    SAMPLE_COLUMNS,
    LayoutSpec,
    run_granularity_experiment,
    simulate_pipeline_corpus,
    synthetic_page,
    triage_scores,
)

log = logging.getLogger("cevkit")

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT = 0, 1, 2
MEASURES = ("spacer", "spacd", "spacd-symmetric", "cdd-jsd")
CORPUS_ROW_ID = "__corpus__"


class InputError(click.ClickException):
    exit_code = EXIT_INPUT


@dataclass(frozen=True)
class RunConfig:
    unit: CountUnit = CountUnit.CHARACTER
    measure: str = "spacer"
    policy: NormalizationPolicy = field(default_factory=NormalizationPolicy)
    seed: int = 0
    jobs: int = 1
    out: str | None = None
    fmt: str = "csv"
    ratio_threshold: float = 0.5
    cote_threshold: float = 0.5

    @property
    def measure_key(self) -> str:
        return self.measure.replace("-", "_")


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def _parallel_map(fn: Callable, items: Sequence, jobs: int) -> list:
    """Ordered map; results come back in input order whatever the scheduling."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))


def _expand_inputs(patterns: Iterable[str], suffixes=(".json", ".xml")) -> list[str]:
    paths: list[str] = []
    for pat in patterns:
        if any(ch in pat for ch in "*?["):
            hits = sorted(glob.glob(pat))
            if not hits:
                raise InputError(f"no files match {pat}")
            paths.extend(hits)
        elif os.path.isdir(pat):
            paths.extend(sorted(str(p) for p in Path(pat).iterdir() if p.suffix.lower() in suffixes))
        elif os.path.exists(pat):
            paths.append(pat)
        else:
            raise InputError(f"no such file: {pat}")
    if not paths:
        raise InputError("no input pages")
    return paths


def _load_document(path: str) -> PageDocument:
    data = Path(path).read_bytes()
    if path.lower().endswith(".xml"):
        return PageDocument(load_alto(data, page_id=Path(path).stem))
    return load_page_json(data)


def _emit(data: bytes, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(out).write_bytes(data)


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else format(v, ".6g")
    return str(v)


def _rows_to_bytes(columns: Sequence[str], rows: Sequence[dict], fmt: str) -> bytes:
    if fmt == "json":
        clean = [{k: (None if isinstance(r.get(k), float) and math.isnan(r[k]) else r.get(k)) for k in columns} for r in rows]
        return json.dumps(clean, indent=2).encode("utf-8")
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt_cell(r.get(k)) for k in columns])
    return buf.getvalue().encode("utf-8")


def _policy_from_flags(lowercase, punct, whitespace, nfc, spaces) -> NormalizationPolicy:
    return NormalizationPolicy(
        lowercase=lowercase,
        unify_punctuation=punct,
        collapse_whitespace=whitespace,
        unicode_form="NFC" if nfc else "none",
        count_spaces=spaces,
    )


# --------------------------------------------------------------------------
# per-page work (top level so worker processes can pickle it)
# --------------------------------------------------------------------------


@dataclass
class _Pooled:
    Q: CharVector
    S: CharVector
    Qw: CharVector
    Sw: CharVector
    micro_pairs: list
    cer_dist: int = 0
    cer_len: int = 0


def _texts_vector(texts, policy, unit) -> CharVector:
    return CharVector.sum((char_vector(normalize_text(t, policy), unit, policy.count_spaces) for t in texts), unit)


def _strip(text: str, policy: NormalizationPolicy) -> str:
    return text if policy.count_spaces else "".join(text.split())


def _score_page(args: tuple[str, RunConfig]) -> tuple[PageReport, _Pooled | None]:
    path, cfg = args
    page_id = path
    try:
        doc = _load_document(path)
        layout = doc.layout
        page_id = layout.page_id
        policy, unit = cfg.policy, cfg.unit
        gt = select_level(layout.gt_regions)
        Q = _texts_vector((r.text for r in gt), policy, unit)
        Qw = _texts_vector((r.text for r in gt), policy, CountUnit.WORD)
        if Q.total() == 0:
            raise UndefinedMetricError("undefined: empty ground truth")

        use_pred = doc.ocr_on_pred is not None and layout.pred_regions is not None
        if use_pred:
            system_texts = [doc.ocr_on_pred.get(r.id, "") for r in layout.pred_regions]
        elif doc.ocr_on_gt is not None:
            level_ids = {r.id for r in gt}
            system_texts = [t for rid, t in doc.ocr_on_gt.items() if rid in level_ids]
        else:
            raise ValueError("page has no OCR text (ocr_on_pred or ocr_on_gt)")
        S = _texts_vector(system_texts, policy, unit)
        Sw = _texts_vector(system_texts, policy, CountUnit.WORD)

        scores: dict[str, float | None] = {}
        scores["spacer"], _ = compare(S, Q, "spacer")
        scores["spacd"], _ = compare(S, Q, "spacd")
        scores["cdd_jsd"], _ = compare(S, Q, "cdd_jsd")
        scores["spawer"] = compare(Sw, Qw, "spacer")[0] if Qw.total() else None

        micro_pairs: list = []
        if use_pred:
            v = build_vectors(layout, None, doc.ocr_on_pred, policy, unit)
            for rid, r_j in v.per_prediction_R.items():
                micro_pairs.append((r_j, v.per_prediction_S[rid]))
            # GT characters no prediction captured: all deleted
            missed = {k: c - v.R.get(k, 0) for k, c in Q.items() if c > v.R.get(k, 0)}
            if missed:
                micro_pairs.append((CharVector(missed, unit), CharVector({}, unit)))
            g_micro = CharVector.sum((g for g, _ in micro_pairs), unit)
            if g_micro.total():
                scores["spacer_micro"] = spacer_micro(SpacerInputs(g_micro, S, micro_pairs))

        pooled = _Pooled(Q, S, Qw, Sw, micro_pairs)
        if doc.ocr_on_gt is not None:
            dist = length = 0
            for r in gt:
                g_text = _strip(normalize_text(r.text, policy), policy)
                p_text = _strip(normalize_text(doc.ocr_on_gt.get(r.id, ""), policy), policy)
                counts = edit_counts(g_text, p_text)
                dist += counts.distance
                length += len(g_text)
            if length:
                scores["cer"] = dist / length
                pooled.cer_dist, pooled.cer_len = dist, length
        return PageReport(page_id, scores=scores), pooled
    except (SchemaError, ValueError, KeyError, OSError) as exc:
        return PageReport(page_id, error=f"{type(exc).__name__}: {exc}"), None


def _corpus_row(pooled: list[_Pooled], cfg: RunConfig) -> PageReport:
    unit = cfg.unit
    Q = CharVector.sum((p.Q for p in pooled), unit)
    S = CharVector.sum((p.S for p in pooled), unit)
    Qw = CharVector.sum((p.Qw for p in pooled), CountUnit.WORD)
    Sw = CharVector.sum((p.Sw for p in pooled), CountUnit.WORD)
    scores: dict[str, float | None] = {}
    if Q.total():
        scores["spacer"] = compare(S, Q, "spacer")[0]
        scores["spacd"] = compare(S, Q, "spacd")[0]
        scores["cdd_jsd"] = compare(S, Q, "cdd_jsd")[0]
    if Qw.total():
        scores["spawer"] = compare(Sw, Qw, "spacer")[0]
    if all(p.micro_pairs for p in pooled) and pooled:
        pairs = [pair for p in pooled for pair in p.micro_pairs]
        g_micro = CharVector.sum((g for g, _ in pairs), unit)
        if g_micro.total():
            scores["spacer_micro"] = spacer_micro(SpacerInputs(g_micro, S, pairs))
    cer_len = sum(p.cer_len for p in pooled)
    if cer_len:
        scores["cer"] = sum(p.cer_dist for p in pooled) / cer_len
    return PageReport(CORPUS_ROW_ID, scores=scores)


def _coarsest(regions: Sequence[Region]) -> list[Region]:
    present = {r.granularity for r in regions}
    for g in (Granularity.PAGE, Granularity.PARAGRAPH, Granularity.LINE, Granularity.WORD):
        if g in present:
            return select_level(regions, g)
    return []


def _decompose_doc(doc: PageDocument, cfg: RunConfig) -> PageReport:
    layout = doc.layout
    if layout.pred_regions is None:
        log.warning("page %s: no predicted regions; d_pars, d_int and COTe omitted", layout.page_id)
    if doc.ocr_on_gt is None:
        log.warning("page %s: no OCR on ground-truth regions; d_ocr omitted", layout.page_id)
    if doc.ocr_on_pred is None:
        log.warning("page %s: no OCR on predicted regions; d_int and d_total omitted", layout.page_id)
    v = build_vectors(layout, doc.ocr_on_gt, doc.ocr_on_pred, cfg.policy, cfg.unit)
    report = decompose(v, cfg.measure_key)
    cote = None
    if layout.pred_regions:
        cote = cote_approx(_coarsest(layout.gt_regions), layout.pred_regions, layout.width * layout.height)
    verdict = None
    if report.d_ocr is not None and report.d_total is not None:
        verdict = triage(report, cote, cfg.ratio_threshold, cfg.cote_threshold)
    else:
        log.warning("page %s: triage needs d_ocr and d_total; verdict omitted", layout.page_id)
    return PageReport(layout.page_id, report, cote, verdict)


def _decompose_page(args: tuple[str, RunConfig]) -> PageReport:
    path, cfg = args
    try:
        return _decompose_doc(_load_document(path), cfg)
    except (SchemaError, ValueError, KeyError, OSError) as exc:
        return PageReport(path, error=f"{type(exc).__name__}: {exc}")


def _finish_report(pages: list[PageReport], corpus: PageReport | None, cfg: RunConfig) -> int:
    report = ReportDocument.from_pages(pages, corpus)
    _emit(write_report(report, cfg.fmt), cfg.out)
    failed = [p for p in pages if p.error]
    for p in failed:
        click.echo(f"error: {p.page_id}: {p.error}", err=True)
    return EXIT_INPUT if failed else EXIT_OK


# --------------------------------------------------------------------------
# simulation workers
# --------------------------------------------------------------------------


def _granularity_worker(args) -> list[dict]:
    index, seed, spec, widths, heights, repeats, paired = args
    page = synthetic_page(index, seed, spec)
    return run_granularity_experiment([page], widths, heights, repeats, seed, page_offset=index, paired=paired).samples


PIPELINE_COLUMNS = (
    "page", "parse", "ocr", "degenerate", "parse_magnitude", "ocr_magnitude", "label",
    "measure", "d_pars", "d_ocr", "d_int", "d_total",
    "coverage", "overlap", "trespass", "excess", "cote_score",
    "ratio", "verdict", "verdict_gated",
)


def _pipeline_worker(args) -> tuple[list[dict], list]:
    index, n_pages, seed, spec, measure, ratio_t, cote_t = args
    corpus = simulate_pipeline_corpus(n_pages, seed=seed, base_spec=spec, page_indices=[index])
    rows = []
    for cell in corpus.cells:
        rep = decompose(cell.vectors, measure)
        plain = triage(rep, None, ratio_t, cote_t)
        gated = triage(rep, cell.cote, ratio_t, cote_t)
        row = cell.row()
        row.update(measure=measure, d_pars=rep.d_pars, d_ocr=rep.d_ocr, d_int=rep.d_int, d_total=rep.d_total)
        row.update(cell.cote.to_dict())
        row["cote_score"] = row.pop("score")
        row.update(ratio=plain.ratio, verdict=plain.dominant.value, verdict_gated=gated.dominant.value)
        rows.append(row)
    return rows, corpus.cells


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--unit", type=click.Choice([u.value for u in CountUnit]), default="character", show_default=True,
              help="Count characters or whitespace-separated words.")
@click.option("--measure", type=click.Choice(MEASURES), default="spacer", show_default=True)
@click.option("--policy-lowercase/--no-policy-lowercase", default=True, show_default=True)
@click.option("--policy-punctuation/--no-policy-punctuation", default=True, show_default=True,
              help="Fold typographic quotes and dashes to ASCII.")
@click.option("--policy-whitespace/--no-policy-whitespace", default=True, show_default=True)
@click.option("--policy-nfc/--no-policy-nfc", default=True, show_default=True)
@click.option("--policy-count-spaces/--no-policy-count-spaces", default=False, show_default=True)
@click.option("--ratio-threshold", type=float, default=0.5, show_default=True)
@click.option("--cote-threshold", type=float, default=0.5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", "-j", type=click.IntRange(min=1), default=None, help="Worker processes [default: CPU count].")
@click.option("--out", "-o", type=click.Path(dir_okay=False, writable=True), default=None, help="Output file (stdout if omitted).")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.pass_context
def cli(ctx, unit, measure, policy_lowercase, policy_punctuation, policy_whitespace, policy_nfc,
        policy_count_spaces, ratio_threshold, cote_threshold, seed, jobs, out, fmt):
    """Character error vector metrics for document text extraction."""
    level = getattr(logging, os.environ.get("CEVKIT_LOG", "WARNING").upper(), logging.WARNING)
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    log.setLevel(level)
    ctx.obj = RunConfig(
        unit=CountUnit(unit),
        measure=measure,
        policy=_policy_from_flags(policy_lowercase, policy_punctuation, policy_whitespace, policy_nfc, policy_count_spaces),
        seed=seed,
        jobs=jobs or os.cpu_count() or 1,
        out=out,
        fmt=fmt,
        ratio_threshold=ratio_threshold,
        cote_threshold=cote_threshold,
    )


def _local_overrides(fn):
    """Let ``--out/--format/--jobs/--seed`` also follow the subcommand name."""
    fn = click.option("--seed", "l_seed", type=int, default=None)(fn)
    fn = click.option("--jobs", "-j", "l_jobs", type=click.IntRange(min=1), default=None)(fn)
    fn = click.option("--format", "l_fmt", type=click.Choice(["csv", "json"]), default=None)(fn)
    fn = click.option("--out", "-o", "l_out", type=click.Path(dir_okay=False, writable=True), default=None)(fn)

    @functools.wraps(fn)
    def wrapper(cfg, *args, l_seed, l_jobs, l_fmt, l_out, **kwargs):
        cfg = replace(
            cfg,
            seed=cfg.seed if l_seed is None else l_seed,
            jobs=cfg.jobs if l_jobs is None else l_jobs,
            fmt=cfg.fmt if l_fmt is None else l_fmt,
            out=cfg.out if l_out is None else l_out,
        )
        return fn(cfg, *args, **kwargs)

    return wrapper


@cli.command()
@click.argument("inputs", nargs=-1, required=True)
@click.pass_obj
@_local_overrides
def score(cfg: RunConfig, inputs):
    """Score pages (JSON page documents or ALTO) against their ground truth.

    Writes one row per page followed by a pooled corpus row.
    """
    paths = _expand_inputs(inputs)
    results = _parallel_map(_score_page, [(p, cfg) for p in paths], cfg.jobs)
    pages = [r for r, _ in results]
    pooled = [p for _, p in results if p is not None]
    corpus = _corpus_row(pooled, cfg) if pooled else None
    sys.exit(_finish_report(pages, corpus, cfg))


@cli.command("decompose")
@click.argument("inputs", nargs=-1, required=True)
@click.pass_obj
@_local_overrides
def decompose_cmd(cfg: RunConfig, inputs):
    """Split page error into parsing, OCR and interaction terms, with COTe and triage."""
    paths = _expand_inputs(inputs)
    pages = _parallel_map(_decompose_page, [(p, cfg) for p in paths], cfg.jobs)
    sys.exit(_finish_report(pages, None, cfg))


@cli.command("triage")
@click.argument("inputs", nargs=-1, required=True)
@click.pass_obj
@_local_overrides
def triage_cmd(cfg: RunConfig, inputs):
    """Name the dominant error source per page.

    Accepts page documents (decomposed on the fly) or report JSON written by
    ``decompose --format json`` (re-triaged with the current thresholds).
    """
    paths = _expand_inputs(inputs)
    pages: list[PageReport] = []
    page_paths = []
    for path in paths:
        try:
            data = json.loads(Path(path).read_bytes()) if path.lower().endswith(".json") else None
        except (OSError, json.JSONDecodeError) as exc:
            pages.append(PageReport(path, error=f"{type(exc).__name__}: {exc}"))
            continue
        if isinstance(data, dict) and "pages" in data:
            for p in read_report_json(json.dumps(data)).pages:
                if p.decomposition is not None and p.decomposition.d_ocr is not None and p.decomposition.d_total is not None:
                    p.verdict = triage(p.decomposition, p.cote, cfg.ratio_threshold, cfg.cote_threshold)
                elif p.error is None:
                    p.error = "report row lacks d_ocr or d_total"
                pages.append(p)
        else:
            page_paths.append((len(pages), path))
            pages.append(None)  # type: ignore[arg-type]
    done = _parallel_map(_decompose_page, [(p, cfg) for _, p in page_paths], cfg.jobs)
    for (slot, _), rep in zip(page_paths, done):
        pages[slot] = rep
    sys.exit(_finish_report(pages, None, cfg))


def _fracs(text: str | None) -> list[float] | None:
    if text is None:
        return None
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InputError(f"bad fraction list {text!r}") from exc
    if not vals or any(not (0 < v <= 1) for v in vals):
        raise InputError(f"fractions must lie in (0, 1]: {text!r}")
    return vals


def _layout_spec(char_width, line_height, width_spread) -> LayoutSpec:
    try:
        return LayoutSpec(char_width=char_width, line_height=line_height, width_spread=width_spread)
    except ValueError as exc:
        raise InputError(f"invalid layout: {exc}") from exc


_layout_options = [
    click.option("--pages", "n_pages", type=click.IntRange(min=1), default=20, show_default=True),
    click.option("--char-width", type=float, default=LayoutSpec.char_width, show_default=True),
    click.option("--line-height", type=float, default=LayoutSpec.line_height, show_default=True),
    click.option("--width-spread", type=float, default=LayoutSpec.width_spread, show_default=True),
]


def _with_layout(fn):
    for opt in reversed(_layout_options):
        fn = opt(fn)
    return fn


@cli.command("simulate-granularity")
@_with_layout
@click.option("--fracs", default=None, help="Square crops: comma list used for both width and height.")
@click.option("--width-fracs", default=None, help="Comma list of crop widths (crossed with --height-fracs).")
@click.option("--height-fracs", default=None, help="Comma list of crop heights.")
@click.option("--repeats", type=click.IntRange(min=1), default=10, show_default=True)
@click.pass_obj
@_local_overrides
def simulate_granularity(cfg: RunConfig, n_pages, char_width, line_height, width_spread, fracs, width_fracs, height_fracs, repeats):
    """Crop-membership error of word, line and paragraph position inference.

    One output row per (page, crop size, repeat).
    """
    spec = _layout_spec(char_width, line_height, width_spread)
    square = _fracs(fracs)
    if square is not None and (width_fracs or height_fracs):
        raise InputError("use either --fracs or --width-fracs/--height-fracs")
    if square is not None:
        widths, heights, paired = square, square, True
    else:
        default = [0.1, 0.2, 0.3, 0.4, 0.5]
        widths, heights, paired = _fracs(width_fracs) or default, _fracs(height_fracs) or default, False
    try:
        synthetic_page(0, cfg.seed, spec)
    except ValueError as exc:
        raise InputError(f"invalid layout: {exc}") from exc
    tasks = [(i, cfg.seed, spec, widths, heights, repeats, paired) for i in range(n_pages)]
    rows = [r for chunk in _parallel_map(_granularity_worker, tasks, cfg.jobs) for r in chunk]
    columns = SAMPLE_COLUMNS + ("error_word", "error_line", "error_paragraph")
    _emit(_rows_to_bytes(columns, rows, cfg.fmt), cfg.out)


@cli.command("simulate-pipeline")
@_with_layout
@click.pass_obj
@_local_overrides
def simulate_pipeline(cfg: RunConfig, n_pages, char_width, line_height, width_spread):
    """Cross synthetic pages with parse perturbations and OCR noise models.

    One output row per (page, parse perturbation, OCR model) cell; triage F1
    against the construction labels is printed to stderr.
    """
    spec = _layout_spec(char_width, line_height, width_spread)
    try:
        synthetic_page(0, cfg.seed, spec)
    except ValueError as exc:
        raise InputError(f"invalid layout: {exc}") from exc
    tasks = [(i, n_pages, cfg.seed, spec, cfg.measure_key, cfg.ratio_threshold, cfg.cote_threshold) for i in range(n_pages)]
    results = _parallel_map(_pipeline_worker, tasks, cfg.jobs)
    rows = [r for chunk, _ in results for r in chunk]
    _emit(_rows_to_bytes(PIPELINE_COLUMNS, rows, cfg.fmt), cfg.out)
    cells = [c for _, chunk in results for c in chunk]
    kw = dict(measure=cfg.measure_key, ratio_threshold=cfg.ratio_threshold, cote_threshold=cfg.cote_threshold)
    plain = triage_scores(cells, use_cote=False, include_degenerate=False, **kw)
    gated = triage_scores(cells, use_cote=True, include_degenerate=True, **kw)
    click.echo(f"triage F1 (ratio only, non-degenerate cells): {plain['f1']:.4f} over {plain['n']} cells", err=True)
    click.echo(f"triage F1 (ratio + COTe gate, all cells): {gated['f1']:.4f} over {gated['n']} cells", err=True)


@cli.command()
@click.argument("source", type=click.Path(dir_okay=False))
@click.option("--page-id", default=None, help="Page id (defaults to the Page ID attribute or the file name).")
@click.pass_obj
@_local_overrides
def convert(cfg: RunConfig, source, page_id):
    """Convert an ALTO XML file to a page document (JSON)."""
    try:
        data = Path(source).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {source}: {exc.strerror}") from exc
    if not data.strip():
        raise InputError(f"{source}: empty file")
    try:
        layout = load_alto(data, page_id=page_id)
    except SchemaError as exc:
        raise InputError(f"{source}: {exc}") from exc
    _emit(dump_page_json(layout), cfg.out)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        rv = cli.main(args=list(argv) if argv is not None else None, prog_name="cevkit", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_INTERNAL
    except SystemExit as exc:
        return int(exc.code or 0)
    except Exception:  # noqa: BLE001 - top-level guard
        log.exception("internal error")
        return EXIT_INTERNAL
    return rv or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
