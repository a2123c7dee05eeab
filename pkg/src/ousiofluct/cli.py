"""Command-line interface.

Subcommands::

    ousiofluct score BOOK --lexicon LEX [--dimension D] [--out DIR]
    ousiofluct decompose INPUT [--lexicon LEX] [--ensemble N] [--out DIR]
    ousiofluct cutoff BOOK --lexicon LEX [--seed N] [--mode M] [--out DIR]
    ousiofluct corpus MANIFEST --lexicon LEX [--jobs N] [--out DIR]
    ousiofluct null BOOK --lexicon LEX [--shuffles N] [--out DIR]

Exit status is 0 on success, 1 on a usage error and 2 on a data error
(unreadable or malformed input, ineligible book).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, hht
from .corpus import (GROUPINGS, BookMeta, PipelineConfig, aggregate, process_book,
                     read_manifest, run_corpus, write_aggregates_csv, write_record_json,
                     write_rows)
from .cutoff import (ALL_MODES, NullFailed, RescalingMode, build_null_from_arrays,
                     diagnostics_rows)
from .emd import DecompositionError, DecompositionFailed, EemdConfig, eemd, emd
from .lexicon import LexiconError, load_lexicon
from .preprocess import CoverageError, coverage, eligible, read_book
from .series import (SERIES_DIMENSIONS, EmptySeriesError, WindowConfig, read_series_csv,
                     scores_from_arrays, window_scores)

logger = logging.getLogger("ousiofluct")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad arguments; we reserve 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--lexicon", metavar="PATH", help="lexicon TSV/CSV (PDS or VAD columns)")
    p.add_argument("--dimension", choices=("power", "danger", "both"), default="both")
    p.add_argument("--window", type=_positive_int, default=50, metavar="N",
                   help="window size in words (default 50)")
    p.add_argument("--skip", type=_positive_int, default=50, metavar="N",
                   help="words between window starts (default 50)")
    p.add_argument("--ensemble", type=_positive_int, default=100, metavar="N",
                   help="EEMD ensemble size (default 100)")
    p.add_argument("--noise", type=_nonneg_float, default=0.2, metavar="R",
                   help="EEMD noise std as a fraction of the series std (default 0.2)")
    p.add_argument("--shuffles", type=_positive_int, default=100, metavar="N",
                   help="shuffled realizations in the null (default 100)")
    p.add_argument("--seed", type=int, default=0, metavar="N")
    p.add_argument("--mode", choices=("median", "p01", "none", "all"), default="all")
    p.add_argument("--out", metavar="DIR", default=".", help="output directory (default .)")
    p.add_argument("--jobs", type=_positive_int, default=1, metavar="N",
                   help="worker processes (default 1)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = _Parser(prog="ousiofluct",
                 description="Ousiometric time series, EMD, and shuffled-text cutoff detection.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("score", parents=[common], help="text -> window-score series CSV")
    p.add_argument("book")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("decompose", parents=[common],
                       help="series CSV or text -> IMF CSV, metadata JSON, spectra CSV")
    p.add_argument("input")
    p.add_argument("--plain", action="store_true", help="plain EMD instead of EEMD")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("cutoff", parents=[common], help="book -> cutoff result JSON")
    p.add_argument("book")
    p.add_argument("--book-id", default=None)
    p.set_defaults(func=cmd_cutoff)

    p = sub.add_parser("corpus", parents=[common],
                       help="manifest TSV -> per-book JSON and aggregate CSV")
    p.add_argument("manifest")
    p.add_argument("--grouping", choices=GROUPINGS + ("every",), default="every")
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("null", parents=[common],
                       help="book -> per-order null/target diagnostics CSV")
    p.add_argument("book")
    p.set_defaults(func=cmd_null)
    return ap


def _dimensions(args) -> tuple[str, ...]:
    return SERIES_DIMENSIONS if args.dimension == "both" else (args.dimension,)


def _modes(args) -> tuple[RescalingMode, ...]:
    return ALL_MODES if args.mode == "all" else (RescalingMode.parse(args.mode),)


def _window(args) -> WindowConfig:
    return WindowConfig(args.window, args.skip)


def _lexicon(args):
    if not args.lexicon:
        raise UsageError("--lexicon is required for this command")
    try:
        return load_lexicon(args.lexicon)
    except OSError as exc:
        raise DataError(f"cannot read lexicon: {exc}")


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _tokens(path: str):
    try:
        return read_book(path)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}")


def _config(args) -> PipelineConfig:
    return PipelineConfig(_window(args), args.ensemble, args.noise, args.shuffles, args.seed,
                          _dimensions(args), _modes(args))


def cmd_score(args) -> int:
    lex = _lexicon(args)
    cfg = _window(args)
    tokens, _ = _tokens(args.book)
    out = _out(args)
    for dim in _dimensions(args):
        try:
            s = window_scores(tokens, lex, cfg, dim)
        except EmptySeriesError as exc:
            raise DataError(str(exc))
        path = out / f"{tokens.source_id}_{dim}_series.csv"
        s.to_csv(path)
        if not s.complete:
            logger.warning("%s: %d window(s) without lexicon words (written as nan)",
                           path.name, int(np.count_nonzero(~np.isfinite(s.values))))
        print(path)
    return EXIT_OK


def _decompose_one(values, args, stem: str, skip: int, out: Path) -> None:
    if not np.all(np.isfinite(values)):
        raise DataError(f"{stem}: series has missing values")
    if args.plain:
        d = emd(values)
    else:
        d = eemd(values, EemdConfig(args.ensemble, args.noise, args.seed), workers=args.jobs)
    d.config = dict(d.config, skip=skip)
    d.to_csv(out / f"{stem}_imfs.csv")
    d.to_json(out / f"{stem}_imfs.json")
    spectra = []
    for imf in d.imfs:
        try:
            spectra.append(hht.spectrum(imf, sampling_rate=1.0 / skip))
        except hht.UndefinedPeriodError:
            spectra.append(hht.HhtSpectrum(np.zeros(hht.BINS.count), hht.BINS, -1, np.nan))
    hht.write_spectra_csv(out / f"{stem}_spectra.csv", spectra)
    print(out / f"{stem}_imfs.csv")


def cmd_decompose(args) -> int:
    out = _out(args)
    src = Path(args.input)
    if src.suffix.lower() == ".csv":
        try:
            values, skip = read_series_csv(src)
        except (OSError, KeyError, ValueError) as exc:
            raise DataError(f"cannot read series {src}: {exc}")
        _decompose_one(values, args, src.stem, skip, out)
        return EXIT_OK
    lex = _lexicon(args)
    cfg = _window(args)
    tokens, _ = _tokens(args.input)
    for dim in _dimensions(args):
        try:
            s = window_scores(tokens, lex, cfg, dim)
        except EmptySeriesError as exc:
            raise DataError(str(exc))
        _decompose_one(s.values, args, f"{tokens.source_id}_{dim}", cfg.skip, out)
    return EXIT_OK


def cmd_cutoff(args) -> int:
    lex = _lexicon(args)
    out = _out(args)
    path = Path(args.book)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    meta = BookMeta(args.book_id or path.stem, path)
    rec = process_book(path, meta, lex, _config(args), out, workers=args.jobs)
    dest = out / f"{rec.book_id}.json"
    write_record_json(rec, dest)
    print(dest)
    if not rec.eligible:
        logger.error("%s: ineligible (%s)", rec.book_id, ",".join(rec.reasons))
        return EXIT_DATA
    return EXIT_OK


def cmd_corpus(args) -> int:
    lex = _lexicon(args)
    out = _out(args)
    try:
        books = read_manifest(args.manifest)
    except OSError as exc:
        raise DataError(f"cannot read manifest: {exc}")
    config = _config(args)
    records = run_corpus(books, lex, config, out, jobs=args.jobs)
    groupings = GROUPINGS if args.grouping == "every" else (args.grouping,)
    summaries = []
    for g in groupings:
        summaries.extend(aggregate(records, g, config.dimensions, config.modes))
    write_aggregates_csv(out / "aggregates.csv", summaries)
    n_ok = sum(r.eligible for r in records)
    print(f"{n_ok}/{len(records)} eligible; results in {out}")
    return EXIT_OK


def cmd_null(args) -> int:
    lex = _lexicon(args)
    out = _out(args)
    cfg = _window(args)
    tokens, _ = _tokens(args.book)
    dims = _dimensions(args)
    try:
        stats = coverage(tokens, lex)
    except CoverageError as exc:
        raise DataError(str(exc))
    arrays = {d: lex.score_array(tokens, d) for d in dims}
    hits = arrays[dims[0]][1]
    if cfg.n_windows(len(tokens)) == 0:
        raise DataError(f"{len(tokens)} tokens is fewer than one window of {cfg.window_size}")
    _, window_hits = scores_from_arrays(arrays[dims[0]][0], hits, cfg)
    gate = eligible(stats, window_hits)
    if not gate:
        raise DataError(f"{tokens.source_id}: ineligible ({gate.reason})")
    nulls = build_null_from_arrays({d: arrays[d][0] for d in dims}, hits, cfg, args.shuffles,
                                   args.seed, workers=args.jobs)
    for dim in dims:
        values, _ = scores_from_arrays(arrays[dim][0], hits, cfg)
        target = eemd(values, EemdConfig(args.ensemble, args.noise, args.seed),
                      workers=args.jobs)
        rows = diagnostics_rows(target, nulls[dim], _modes(args), 1.0 / cfg.skip)
        dest = out / f"{tokens.source_id}_{dim}_null.csv"
        write_rows(dest, rows)
        print(dest)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ousiofluct: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, LexiconError, DecompositionError, DecompositionFailed, NullFailed,
            ValueError) as exc:
        print(f"ousiofluct: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
