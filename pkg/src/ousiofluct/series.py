"""Windowed ousiometric time series in word-time, and shuffled surrogates."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .lexicon import Lexicon
from .preprocess import TokenSequence

SERIES_DIMENSIONS = ("power", "danger")


class EmptySeriesError(ValueError):
    """No full window fits in the token sequence."""


class MissingWindowError(ValueError):
    """A window contains no lexicon word, so its score is undefined."""


@dataclass(frozen=True)
class WindowConfig:
    window_size: int = 50
    skip: int = 50

    def __post_init__(self):
        if int(self.window_size) != self.window_size or self.window_size < 1:
            raise ValueError(f"window_size must be a positive integer, got {self.window_size}")
        if int(self.skip) != self.skip or self.skip < 1:
            raise ValueError(f"skip must be a positive integer, got {self.skip}")

    @property
    def overlapping(self) -> bool:
        return self.skip < self.window_size

    def n_windows(self, n_tokens: int) -> int:
        if n_tokens < self.window_size:
            return 0
        return (n_tokens - self.window_size) // self.skip + 1


@dataclass
class OusioSeries:
    """Window scores indexed by window; NaN marks a window with no lexicon word."""

    values: np.ndarray
    dimension: str
    config: WindowConfig
    source_id: str = ""
    hits: np.ndarray = field(default=None, repr=False)

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def word_time(self) -> np.ndarray:
        """Word offset at which each window starts."""
        return np.arange(len(self)) * self.config.skip

    @property
    def complete(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def require_complete(self) -> np.ndarray:
        if not self.complete:
            bad = int(np.count_nonzero(~np.isfinite(self.values)))
            raise MissingWindowError(f"{self.source_id}: {bad} window(s) without lexicon words")
        return self.values

    def to_csv(self, path: str | Path) -> None:
        write_series_csv(path, self.values, self.config.skip)


def _encode(tokens: Sequence[str] | TokenSequence, lex: Lexicon, dimension: str):
    if dimension not in SERIES_DIMENSIONS:
        raise ValueError(f"dimension must be one of {SERIES_DIMENSIONS}, got {dimension!r}")
    return lex.score_array(tokens, dimension)


def scores_from_arrays(scores: np.ndarray, hits: np.ndarray, cfg: WindowConfig):
    """Window scores from per-token score/hit arrays.

    Returns ``(values, window_hits)``; windows with no hit get NaN.
    """
    sums, counts = kernels.window_sums(np.ascontiguousarray(scores, dtype=np.float64),
                                       np.ascontiguousarray(hits, dtype=np.float64),
                                       cfg.window_size, cfg.skip)
    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.where(counts > 0, sums / np.where(counts > 0, counts, 1.0), np.nan)
    return values, counts


def window_scores(tokens: Sequence[str] | TokenSequence, lex: Lexicon,
                  cfg: WindowConfig = WindowConfig(), dimension: str = "danger") -> OusioSeries:
    """Lexicon-weighted mean score of each window.

    Each window value is the sum over lexicon words of (count x score) divided
    by the number of lexicon tokens in the window.  Windows start every
    ``cfg.skip`` tokens while a full ``cfg.window_size`` window fits; trailing
    tokens are dropped.
    """
    if cfg.n_windows(len(tokens)) == 0:
        raise EmptySeriesError(
            f"{len(tokens)} tokens is fewer than one window of {cfg.window_size}")
    scores, hits = _encode(tokens, lex, dimension)
    values, counts = scores_from_arrays(scores, hits, cfg)
    return OusioSeries(values, dimension, cfg,
                       getattr(tokens, "source_id", ""), hits=counts)


def permutation(n: int, seed: int) -> np.ndarray:
    """Uniform random permutation of ``range(n)`` (Fisher-Yates via numpy)."""
    return np.random.default_rng(seed).permutation(n)


def shuffle(tokens: Sequence[str] | TokenSequence, seed: int) -> TokenSequence:
    """Shuffled copy of the token sequence, deterministic per seed."""
    toks = list(tokens)
    order = permutation(len(toks), seed)
    return TokenSequence([toks[i] for i in order], getattr(tokens, "source_id", ""))


def write_series_csv(path: str | Path, values: np.ndarray, skip: int) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["window_index", "word_time_start", "score"])
        for i, v in enumerate(values):
            w.writerow([i, i * skip, fmt(v)])


def read_series_csv(path: str | Path) -> tuple[np.ndarray, int]:
    """Read a series written by :func:`write_series_csv`; returns values and skip."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise EmptySeriesError(f"{path}: no rows")
    values = np.array([float(r["score"]) for r in rows])
    starts = [int(r["word_time_start"]) for r in rows]
    skip = starts[1] - starts[0] if len(starts) > 1 else 1
    return values, max(skip, 1)


def fmt(v: float) -> str:
    """Six significant digits, stable across platforms."""
    if v is None:
        return ""
    v = float(v)
    if np.isnan(v):
        return "nan"
    out = f"{v:.6g}"
    return "0" if out == "-0" else out
