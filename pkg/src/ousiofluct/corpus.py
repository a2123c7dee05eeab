"""Batch processing of books: per-book pipeline, manifests, and aggregation.

A book runs through preprocessing, the eligibility gate, EEMD of the
original series and a shared shuffled-text null for both dimensions, and
cutoff detection under every rescaling mode.  Failures are recorded as reason
codes on the :class:`BookRecord` instead of being raised, so one bad file
never stops a batch.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import hht
from .cutoff import (ALL_MODES, CutoffResult, NullFailed, RescalingError, RescalingMode,
                     build_null_from_arrays, detect_cutoff, diagnostics_rows)
from .emd import DecompositionError, EemdConfig, eemd, mean_preserved
from .lexicon import Lexicon
from .preprocess import MIN_UNIQUE_COVERAGE, CoverageError, CoverageStats, coverage, \
    eligible, read_book
from .series import SERIES_DIMENSIONS, WindowConfig, fmt, scores_from_arrays

logger = logging.getLogger(__name__)

GROUPINGS = ("all", "lcc_class", "lcc_subclass", "title_keyword")
TITLE_KEYWORDS = ("poem", "manual", "play", "collection", "short stor", "report", "essay")
SUMMARY_PERCENTILES = (9, 25, 50, 75, 91)

REASON_COVERAGE = "coverage"
REASON_EMPTY_WINDOW = "empty_window"
REASON_EEMD = "eemd_failed"
REASON_NULL = "null_failed"
REASON_UNREADABLE = "unreadable"


@dataclass(frozen=True)
class PipelineConfig:
    """Everything that determines a book's result, apart from the text itself."""

    window: WindowConfig = WindowConfig()
    ensemble_size: int = 100
    noise_ratio: float = 0.2
    n_shuffles: int = 100
    seed: int = 0
    dimensions: tuple[str, ...] = SERIES_DIMENSIONS
    modes: tuple[RescalingMode, ...] = ALL_MODES
    min_unique_coverage: float = MIN_UNIQUE_COVERAGE
    write_diagnostics: bool = True

    def as_dict(self) -> dict:
        d = asdict(self)
        d["window"] = asdict(self.window)
        d["dimensions"] = list(self.dimensions)
        d["modes"] = [m.value for m in self.modes]
        return d


@dataclass(frozen=True)
class BookMeta:
    book_id: str
    path: Path
    title: str = ""
    lcc: tuple[str, ...] = ()

    @property
    def lcc_classes(self) -> list[str]:
        return sorted({lab[0] for lab in self.lcc if lab})

    @property
    def lcc_subclasses(self) -> list[str]:
        return sorted({lcc_subclass(lab) for lab in self.lcc if lab})


def lcc_subclass(label: str) -> str:
    """Leading letters of an LCC label, at most two (``"PS3545"`` -> ``"PS"``)."""
    m = re.match(r"[A-Za-z]{1,2}", label.strip())
    return m.group(0).upper() if m else label.strip().upper()


@dataclass
class DimensionResult:
    """Outcome for one dimension of one book."""

    status: str = "ok"                       # "ok" or a reason code
    n_imfs: int | None = None
    results: dict[str, CutoffResult] = field(default_factory=dict)
    eemd_mean_error: float | None = None     # |mean(sum) - mean(x)| / |mean(x)|

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "n_imfs": self.n_imfs,
            "eemd_mean_error": self.eemd_mean_error,
            "modes": {m: r.as_dict() for m, r in sorted(self.results.items())},
        }


@dataclass
class BookRecord:
    book_id: str
    title: str
    lcc: tuple[str, ...]
    word_count: int
    coverage: CoverageStats | None
    eligible: bool
    reasons: list[str] = field(default_factory=list)
    boilerplate: str = ""
    n_windows: int = 0
    dimensions: dict[str, DimensionResult] = field(default_factory=dict)
    diagnostics: dict[str, str] = field(default_factory=dict)

    def result(self, dimension: str, mode) -> CutoffResult | None:
        d = self.dimensions.get(dimension)
        if d is None or not d.ok:
            return None
        return d.results.get(RescalingMode.parse(mode).value)

    def as_dict(self) -> dict:
        return {
            "book_id": self.book_id,
            "title": self.title,
            "lcc": list(self.lcc),
            "word_count": self.word_count,
            "coverage": asdict(self.coverage) if self.coverage else None,
            "eligible": self.eligible,
            "reasons": list(self.reasons),
            "boilerplate": self.boilerplate,
            "n_windows": self.n_windows,
            "n_imfs": {d: r.n_imfs for d, r in sorted(self.dimensions.items())},
            "dimensions": {d: r.as_dict() for d, r in sorted(self.dimensions.items())},
            "diagnostics": dict(sorted(self.diagnostics.items())),
        }


def round_sig(obj):
    """Recursively round floats to 6 significant digits; NaN and inf become None."""
    if isinstance(obj, dict):
        return {k: round_sig(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_sig(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return None
        return float(fmt(v))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(round_sig(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_record_json(record: BookRecord, path: str | Path) -> None:
    Path(path).write_text(dumps(record.as_dict()), encoding="utf-8")


def write_rows(path: Path, rows: list[dict]) -> None:
    if not rows:
        return
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (fmt(v) if isinstance(v, (float, np.floating)) else
                            "" if v is None else v) for k, v in r.items()})


def process_book(path: str | Path, meta: BookMeta | None, lex: Lexicon,
                 config: PipelineConfig = PipelineConfig(),
                 out_dir: str | Path | None = None, workers: int = 1) -> BookRecord:
    """Run the full pipeline on one book.

    Parameters
    ----------
    path : path-like
        UTF-8 text file.
    meta : BookMeta or None
        Identifier, title and LCC labels; derived from the file name if None.
    lex : Lexicon
    config : PipelineConfig
    out_dir : path-like, optional
        Where diagnostic CSVs go (``<out_dir>/<book_id>/``).  Paths recorded
        in the record are relative to ``out_dir``.
    workers : int
        Processes for the EEMD ensemble and the null ensemble.

    Returns
    -------
    BookRecord
        ``eligible`` is False and ``reasons`` is non-empty when the book is
        excluded; per-dimension failures are recorded in ``dimensions``.
    """
    path = Path(path)
    if meta is None:
        meta = BookMeta(path.stem, path)
    rec = BookRecord(meta.book_id, meta.title, tuple(meta.lcc), 0, None, False)
    try:
        tokens, rec.boilerplate = read_book(path, meta.book_id)
    except OSError as exc:
        logger.warning("%s: cannot read %s (%s)", meta.book_id, path, exc)
        rec.reasons.append(REASON_UNREADABLE)
        return rec
    rec.word_count = len(tokens)
    try:
        rec.coverage = coverage(tokens, lex)
    except CoverageError:
        rec.reasons.extend([REASON_COVERAGE, REASON_EMPTY_WINDOW])
        return rec

    cfg = config.window
    rec.n_windows = cfg.n_windows(len(tokens))
    dims = tuple(config.dimensions)
    arrays = {d: lex.score_array(tokens, d) for d in dims}
    hits = arrays[dims[0]][1]
    if rec.n_windows == 0:
        window_hits = np.zeros(0)
    else:
        _, window_hits = scores_from_arrays(arrays[dims[0]][0], hits, cfg)
    gate = eligible(rec.coverage, window_hits, config.min_unique_coverage)
    if not gate:
        rec.reasons.extend(gate.reasons)
        return rec
    rec.eligible = True

    sampling_rate = 1.0 / cfg.skip
    targets = {}
    for dim in dims:
        values, _ = scores_from_arrays(arrays[dim][0], hits, cfg)
        dres = DimensionResult()
        rec.dimensions[dim] = dres
        try:
            d = eemd(values, EemdConfig(config.ensemble_size, config.noise_ratio, config.seed),
                     check=False, workers=workers)
        except DecompositionError as exc:
            logger.warning("%s/%s: EEMD not possible (%s)", meta.book_id, dim, exc)
            dres.status = REASON_EEMD
            continue
        mean_x = float(np.mean(values))
        err = abs(float(np.mean(d.reconstruct())) - mean_x)
        dres.eemd_mean_error = err / abs(mean_x) if mean_x else (0.0 if err == 0 else math.inf)
        dres.n_imfs = d.n_imfs
        if not mean_preserved(values, d):
            logger.warning("%s/%s: EEMD output mean outside tolerance", meta.book_id, dim)
            dres.status = REASON_EEMD
            continue
        if d.n_imfs < 1:
            dres.status = REASON_EEMD
            continue
        targets[dim] = d

    if targets:
        try:
            nulls = build_null_from_arrays({dm: arrays[dm][0] for dm in targets}, hits, cfg,
                                           config.n_shuffles, config.seed,
                                           with_periods=config.write_diagnostics,
                                           workers=workers)
        except NullFailed as exc:
            logger.warning("%s: %s", meta.book_id, exc)
            for dm in targets:
                rec.dimensions[dm].status = REASON_NULL
            nulls = {}
        for dim, null in nulls.items():
            dres = rec.dimensions[dim]
            d = targets[dim]
            for mode in config.modes:
                try:
                    dres.results[mode.value] = detect_cutoff(d, null, mode, rec.word_count,
                                                             sampling_rate)
                except RescalingError:
                    dres.results[mode.value] = CutoffResult(mode, "trend_only", None, None,
                                                            None, d.n_imfs,
                                                            flags=["rescaling_undefined"])
            if out_dir is not None and config.write_diagnostics:
                rec.diagnostics.update(_write_diagnostics(Path(out_dir), meta.book_id, dim,
                                                          d, null, config, sampling_rate))

    failed = sorted({r.status for r in rec.dimensions.values() if not r.ok})
    rec.reasons.extend(failed)
    return rec


def _write_diagnostics(out_dir: Path, book_id: str, dim: str, d, null,
                       config: PipelineConfig, sampling_rate: float) -> dict[str, str]:
    sub = out_dir / book_id
    sub.mkdir(parents=True, exist_ok=True)
    paths = {
        f"{dim}_imfs": sub / f"{dim}_imfs.csv",
        f"{dim}_null": sub / f"{dim}_null.csv",
        f"{dim}_spectra": sub / f"{dim}_spectra.csv",
    }
    d.to_csv(paths[f"{dim}_imfs"])
    write_rows(paths[f"{dim}_null"], diagnostics_rows(d, null, config.modes, sampling_rate))
    spectra = []
    for imf in d.imfs:
        try:
            spectra.append(hht.spectrum(imf, sampling_rate=sampling_rate))
        except hht.UndefinedPeriodError:
            spectra.append(hht.HhtSpectrum(np.zeros(hht.BINS.count), hht.BINS, -1, math.nan))
    hht.write_spectra_csv(paths[f"{dim}_spectra"], spectra)
    return {k: p.relative_to(out_dir).as_posix() for k, p in paths.items()}


# ---------------------------------------------------------------- manifests

def read_manifest(path: str | Path) -> list[BookMeta]:
    """Read a TSV manifest with columns book_id, path, title, lcc.

    ``lcc`` may hold several labels separated by ``;``.  Relative paths are
    resolved against the manifest's directory.  Extra columns are ignored.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter="\t")
        cols = {c.strip().lower() for c in reader.fieldnames or []}
        missing = {"book_id", "path"} - cols
        if missing:
            raise ValueError(f"{path}: manifest lacks column(s) {sorted(missing)}")
        out = []
        seen = set()
        for row in reader:
            row = {k.strip().lower(): (v or "").strip() for k, v in row.items() if k}
            bid = row["book_id"]
            if not bid:
                continue
            if bid in seen:
                raise ValueError(f"{path}: duplicate book_id {bid!r}")
            seen.add(bid)
            p = Path(row["path"])
            if not p.is_absolute():
                p = path.parent / p
            labels = tuple(s.strip() for s in row.get("lcc", "").split(";") if s.strip())
            out.append(BookMeta(bid, p, row.get("title", ""), labels))
    return out


_LEX = None


def _init_worker(lex: Lexicon) -> None:
    global _LEX
    _LEX = lex


def _run_one(args):
    meta, config, out_dir = args
    return process_book(meta.path, meta, _LEX, config, out_dir)


def run_corpus(books: Sequence[BookMeta], lex: Lexicon,
               config: PipelineConfig = PipelineConfig(),
               out_dir: str | Path | None = None, jobs: int = 1) -> list[BookRecord]:
    """Process every book; records come back in input order.

    With ``jobs > 1`` books are spread over a process pool and each book runs
    its ensembles serially, so the total number of processes stays at ``jobs``.
    A single book gets all ``jobs`` for its ensembles instead.
    """
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
    if jobs > 1 and len(books) > 1:
        with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(lex,)) as pool:
            records = list(pool.map(_run_one, [(b, config, out_dir) for b in books]))
    else:
        records = [process_book(b.path, b, lex, config, out_dir, workers=jobs) for b in books]
    if out_dir is not None:
        for r in records:
            write_record_json(r, Path(out_dir) / f"{r.book_id}.json")
    return records


# -------------------------------------------------------------- aggregation

@dataclass
class AggregateSummary:
    grouping: str
    group: str
    dimension: str
    mode: str
    n_books: int
    n_trend_only: int
    n_fluctuation: int
    period_percentiles: dict[int, float | None]
    variance_percentiles: dict[int, float | None]

    def as_row(self) -> dict:
        row = {
            "grouping": self.grouping, "group": self.group, "dimension": self.dimension,
            "mode": self.mode, "n_books": self.n_books, "n_trend_only": self.n_trend_only,
            "n_fluctuation": self.n_fluctuation,
        }
        for q in SUMMARY_PERCENTILES:
            row[f"period_p{q:02d}"] = self.period_percentiles.get(q)
        for q in SUMMARY_PERCENTILES:
            row[f"variance_p{q:02d}"] = self.variance_percentiles.get(q)
        return row


def title_words(title: str) -> list[str]:
    return [w for w in (re.sub(r"^[\W_]+|[\W_]+$", "", t) for t in title.lower().split()) if w]


def title_keywords(title: str, keywords: Iterable[str] = TITLE_KEYWORDS) -> list[str]:
    """Keywords matched as case-insensitive prefixes of title words.

    A multi-word keyword such as ``"short stor"`` must match consecutive
    words, with the last one matched as a prefix.
    """
    words = title_words(title)
    found = []
    for kw in keywords:
        parts = kw.lower().split()
        n = len(parts)
        for i in range(len(words) - n + 1):
            if words[i:i + n - 1] == parts[:-1] and words[i + n - 1].startswith(parts[-1]):
                found.append(kw)
                break
    return found


def _groups(rec: BookRecord, grouping: str) -> list[str]:
    meta = BookMeta(rec.book_id, Path(), rec.title, rec.lcc)
    if grouping == "all":
        return ["all"]
    if grouping == "lcc_class":
        return meta.lcc_classes
    if grouping == "lcc_subclass":
        return meta.lcc_subclasses
    if grouping == "title_keyword":
        return title_keywords(rec.title)
    raise ValueError(f"unknown grouping {grouping!r}; expected one of {GROUPINGS}")


def _percentiles(values: list[float]) -> dict[int, float | None]:
    if not values:
        return {q: None for q in SUMMARY_PERCENTILES}
    arr = np.asarray(values, dtype=np.float64)
    return {q: float(np.percentile(arr, q)) for q in SUMMARY_PERCENTILES}


def aggregate(records: Iterable[BookRecord], grouping: str = "all",
              dimensions: Sequence[str] = SERIES_DIMENSIONS,
              modes: Sequence[RescalingMode] = ALL_MODES) -> list[AggregateSummary]:
    """Counts and period/variance percentiles per group, dimension and mode.

    Books without a result for a dimension (ineligible or failed) are left
    out of that dimension's groups.  Groups with no usable book are omitted
    with a warning.  Output is sorted by group, dimension and mode, so it
    does not depend on record order.
    """
    buckets: dict[tuple[str, str, str], list[CutoffResult]] = {}
    seen_groups = set()
    for rec in records:
        for g in _groups(rec, grouping):
            seen_groups.add(g)
            for dim in dimensions:
                for mode in modes:
                    r = rec.result(dim, mode)
                    if r is not None:
                        buckets.setdefault((g, dim, RescalingMode.parse(mode).value),
                                           []).append(r)
    out = []
    for g in sorted(seen_groups):
        for dim in dimensions:
            for mode in modes:
                key = (g, dim, RescalingMode.parse(mode).value)
                rs = buckets.get(key)
                if not rs:
                    logger.warning("group %s/%s/%s has no usable book; omitted", *key)
                    continue
                fl = [r for r in rs if not r.trend_only]
                out.append(AggregateSummary(
                    grouping, g, dim, key[2], len(rs), len(rs) - len(fl), len(fl),
                    _percentiles([r.period for r in fl if r.period is not None]),
                    _percentiles([r.variance for r in fl if r.variance is not None]),
                ))
    return out


def write_aggregates_csv(path: str | Path, summaries: Iterable[AggregateSummary]) -> None:
    rows = [s.as_row() for s in summaries]
    if not rows:
        Path(path).write_text("")
        return
    write_rows(Path(path), rows)
