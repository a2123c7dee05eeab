"""Shuffled-text null ensemble, IMF variance rescaling, and cutoff detection.

Orders are 1-based.  The residual (trend) is appended to every variance
profile as the last "order", so a decomposition with M IMFs has a profile of
length M + 1 and the trend sits at order M + 1.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from . import hht
from .emd import SD_THRESHOLD, MAX_SIFTS, Decomposition, DecompositionError, emd
from .lexicon import Lexicon
from .preprocess import TokenSequence
from .series import WindowConfig, permutation, scores_from_arrays

logger = logging.getLogger(__name__)

NULL_PERCENTILE = 99.0
MIN_SUCCESS_FRACTION = 0.9
MIN_SUPPORT_FRACTION = 0.5


class RescalingMode(str, Enum):
    MEDIAN_FIRST = "median"
    FIRST_PERCENTILE_FIRST = "p01"
    NO_RESCALING = "none"

    @classmethod
    def parse(cls, value: "str | RescalingMode") -> "RescalingMode":
        return value if isinstance(value, cls) else cls(value)


ALL_MODES = tuple(RescalingMode)


class RescalingError(ValueError):
    """First target IMF has zero variance; the rescaling factor is undefined."""


class NullFailed(RuntimeError):
    """Too few shuffled realizations could be decomposed."""


def imf_variance(x) -> float:
    """Mean of squares; the empirical mean is not subtracted."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("variance of an empty series")
    return float(np.dot(x, x) / x.size)


def variance_profile(d: Decomposition) -> np.ndarray:
    """Variances of IMFs 1..M followed by that of the residual."""
    return np.array([imf_variance(c) for c in d.imfs] + [imf_variance(d.residual)])


def imf_periods(d: Decomposition, sampling_rate: float) -> np.ndarray:
    """Characteristic period (words) of each IMF; NaN where undefined."""
    out = np.full(d.n_imfs, np.nan)
    for k, c in enumerate(d.imfs):
        try:
            out[k] = hht.characteristic_period(c, sampling_rate=sampling_rate)
        except hht.UndefinedPeriodError:
            pass
    return out


@dataclass
class NullEnsemble:
    """Per-realization variance profiles of shuffled-text series.

    Each profile holds IMF variances followed by the trend variance.  IMF
    order ``k`` is compared only against realizations that have at least
    ``k`` IMFs; trends are compared with trends.
    """

    profiles: list[np.ndarray]
    n_requested: int
    periods: list[np.ndarray] = field(default_factory=list)
    n_failed: int = 0

    @property
    def n_realizations(self) -> int:
        return len(self.profiles)

    @property
    def max_order(self) -> int:
        """Highest IMF order reached by any realization."""
        return max(p.shape[0] - 1 for p in self.profiles)

    @property
    def min_support(self) -> int:
        return max(1, math.ceil(MIN_SUPPORT_FRACTION * self.n_realizations))

    def values_at(self, order: int) -> np.ndarray:
        """IMF variances at ``order`` from the realizations that reach it."""
        return np.array([p[order - 1] for p in self.profiles if p.shape[0] - 1 >= order])

    def support(self, order: int) -> int:
        return sum(1 for p in self.profiles if p.shape[0] - 1 >= order)

    @property
    def trend_variances(self) -> np.ndarray:
        return np.array([p[-1] for p in self.profiles])

    @property
    def first_imf_variances(self) -> np.ndarray:
        return self.values_at(1)

    def supported_order(self, order: int) -> tuple[int, bool]:
        """``order`` itself if enough realizations reach it, else the highest order
        that does; the flag is True when a fallback was needed."""
        if self.support(order) >= self.min_support:
            return order, False
        k = min(order, self.max_order)
        while k > 1 and self.support(k) < self.min_support:
            k -= 1
        return k, True

    def threshold(self, order: int, q: float = NULL_PERCENTILE) -> tuple[float, bool]:
        k, flagged = self.supported_order(order)
        vals = self.values_at(k)
        if vals.size == 0:
            return math.inf, True
        return float(np.percentile(vals, q)), flagged

    def trend_threshold(self, q: float = NULL_PERCENTILE) -> float:
        return float(np.percentile(self.trend_variances, q))

    def representative_first(self, mode: RescalingMode) -> float:
        mode = RescalingMode.parse(mode)
        first = self.first_imf_variances
        if first.size == 0:
            raise RescalingError("no shuffled realization has an IMF")
        if mode is RescalingMode.MEDIAN_FIRST:
            return float(np.percentile(first, 50))
        if mode is RescalingMode.FIRST_PERCENTILE_FIRST:
            return float(np.percentile(first, 1))
        raise ValueError("no representative value without rescaling")

    def percentile_table(self, q: float = NULL_PERCENTILE) -> np.ndarray:
        """Per-order IMF thresholds for orders 1..max_order (no fallback)."""
        return np.array([np.percentile(self.values_at(k), q)
                         for k in range(1, self.max_order + 1)])


@dataclass
class CutoffResult:
    mode: RescalingMode
    classification: str                # "fluctuation" | "trend_only"
    cutoff_order: int | None
    period: float | None               # words
    variance: float | None             # raw, unrescaled
    n_imfs: int
    first_exceedance: int | None = None  # includes the trend level
    scale: float = 1.0
    flags: list[str] = field(default_factory=list)

    @property
    def trend_only(self) -> bool:
        return self.classification == "trend_only"

    def as_dict(self) -> dict:
        return {
            "classification": self.classification,
            "cutoff_order": self.cutoff_order,
            "period_words": self.period,
            "variance": self.variance,
            "first_exceedance": self.first_exceedance,
            "rescale_factor": self.scale,
            "flags": list(self.flags),
        }


def rescale(target_variances, null: NullEnsemble, mode) -> np.ndarray:
    """Shift the target profile so its first IMF matches the null's representative value."""
    mode = RescalingMode.parse(mode)
    tv = np.asarray(target_variances, dtype=np.float64)
    if tv.size < 1:
        raise ValueError("target has no IMFs")
    if mode is RescalingMode.NO_RESCALING:
        return tv.copy()
    if tv[0] == 0:
        raise RescalingError("first target IMF has zero variance")
    return tv * (null.representative_first(mode) / tv[0])


def detect_cutoff(target: Decomposition, null: NullEnsemble, mode,
                  book_length: int | None = None, sampling_rate: float = 1.0 / 50,
                  q: float = NULL_PERCENTILE) -> CutoffResult:
    """Lowest order whose rescaled variance exceeds the null's ``q``-th percentile.

    The scan starts at order 2 without rescaling and at order 1 otherwise,
    and includes the trend as the final order.  Exceeding only at the trend
    (or nowhere) classifies the book as trend-only.
    """
    mode = RescalingMode.parse(mode)
    if target.n_imfs < 1:
        raise ValueError("target decomposition has no IMFs")
    tv = variance_profile(target)
    rv = rescale(tv, null, mode)
    flags: list[str] = []
    start = 2 if mode is RescalingMode.NO_RESCALING else 1
    trend = tv.shape[0]
    hit = None
    for order in range(start, trend):
        thr, fallback = null.threshold(order, q)
        if fallback and "null_order_fallback" not in flags:
            flags.append("null_order_fallback")
        if rv[order - 1] > thr:
            hit = order
            break
    if hit is None and rv[trend - 1] > null.trend_threshold(q):
        hit = trend
    scale = float(rv[0] / tv[0]) if tv[0] else 1.0
    if hit is None or hit == trend:
        return CutoffResult(mode, "trend_only", None, None, None, target.n_imfs,
                            first_exceedance=hit, scale=scale, flags=flags)
    imf = target.imfs[hit - 1]
    try:
        period = hht.characteristic_period(imf, sampling_rate=sampling_rate)
    except hht.UndefinedPeriodError:
        period = None
        flags.append("undefined_period")
    if book_length is not None and period is not None and period >= book_length:
        flags.append("period_exceeds_length")
        logger.info("cutoff period %.0f >= book length %d", period, book_length)
    return CutoffResult(mode, "fluctuation", hit, period, imf_variance(imf), target.n_imfs,
                        first_exceedance=hit, scale=scale, flags=flags)


def _null_member(args):
    (scores_by_dim, hits, cfg, seed, k, sd_threshold, max_sifts, sampling_rate,
     with_periods) = args
    perm = permutation(hits.shape[0], seed + k)
    out = {}
    for dim, scores in scores_by_dim.items():
        values, counts = scores_from_arrays(scores[perm], hits[perm], cfg)
        if not np.all(counts > 0):
            out[dim] = None
            continue
        try:
            d = emd(values, sd_threshold, max_sifts)
        except DecompositionError:
            out[dim] = None
            continue
        periods = imf_periods(d, sampling_rate) if with_periods else None
        out[dim] = (variance_profile(d), periods)
    return out


def build_null_from_arrays(scores_by_dim: dict[str, np.ndarray], hits: np.ndarray,
                           cfg: WindowConfig = WindowConfig(), n_shuffles: int = 100,
                           seed: int = 0, sd_threshold: float = SD_THRESHOLD,
                           max_sifts: int = MAX_SIFTS, with_periods: bool = True,
                           workers: int = 1) -> dict[str, NullEnsemble]:
    """Null ensembles for several dimensions sharing the same permutations.

    Realization ``k`` (1-based) shuffles with seed ``seed + k``.
    """
    if n_shuffles < 1:
        raise ValueError("n_shuffles must be >= 1")
    hits = np.ascontiguousarray(hits, dtype=np.float64)
    scores_by_dim = {d: np.ascontiguousarray(s, dtype=np.float64)
                     for d, s in scores_by_dim.items()}
    sampling_rate = 1.0 / cfg.skip
    jobs = ((scores_by_dim, hits, cfg, seed, k, sd_threshold, max_sifts, sampling_rate,
             with_periods) for k in range(1, n_shuffles + 1))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_null_member, jobs, chunksize=4))
    else:
        results = [_null_member(j) for j in jobs]

    need = math.ceil(MIN_SUCCESS_FRACTION * n_shuffles)
    out = {}
    for dim in scores_by_dim:
        ok = [r[dim] for r in results if r[dim] is not None]
        failed = n_shuffles - len(ok)
        if len(ok) < need:
            raise NullFailed(f"{dim}: only {len(ok)}/{n_shuffles} shuffled realizations usable")
        out[dim] = NullEnsemble([p for p, _ in ok], n_shuffles,
                                [per for _, per in ok] if with_periods else [], failed)
    return out


def build_null(tokens: Sequence[str] | TokenSequence, lex: Lexicon,
               cfg: WindowConfig = WindowConfig(), n_shuffles: int = 100, seed: int = 0,
               dimension: str = "danger", **kwargs) -> NullEnsemble:
    """Null ensemble for one dimension from ``n_shuffles`` shuffled copies of the text."""
    scores, hits = lex.score_array(tokens, dimension)
    return build_null_from_arrays({dimension: scores}, hits, cfg, n_shuffles, seed,
                                  **kwargs)[dimension]


def period_ratios(target: Decomposition, null: NullEnsemble,
                  sampling_rate: float) -> np.ndarray:
    """Median over realizations of (target IMF period / shuffled IMF period), per order."""
    tp = imf_periods(target, sampling_rate)
    out = np.full(target.n_imfs, np.nan)
    for k in range(target.n_imfs):
        ratios = [tp[k] / per[k] for per in null.periods
                  if per is not None and per.shape[0] > k and np.isfinite(per[k])]
        if ratios and np.isfinite(tp[k]):
            out[k] = float(np.median(ratios))
    return out


def diagnostics_rows(target: Decomposition, null: NullEnsemble,
                     modes: Iterable[RescalingMode] = ALL_MODES,
                     sampling_rate: float = 1.0 / 50) -> list[dict]:
    """Per-order comparison table: target/null variances, thresholds, period ratios."""
    tv = variance_profile(target)
    rescaled = {}
    for m in modes:
        try:
            rescaled[m] = rescale(tv, null, m)
        except RescalingError:
            rescaled[m] = np.full_like(tv, np.nan)
    ratios = period_ratios(target, null, sampling_rate) if null.periods else None
    tp = imf_periods(target, sampling_rate)
    rows = []
    for order in range(1, tv.shape[0] + 1):
        is_trend = order == tv.shape[0]
        if is_trend:
            vals, thr, fallback = null.trend_variances, null.trend_threshold(), False
        else:
            vals = null.values_at(order)
            thr, fallback = null.threshold(order)
        row = {
            "order": order,
            "component": "trend" if is_trend else "imf",
            "target_period_words": None if is_trend else tp[order - 1],
            "target_variance": tv[order - 1],
            "null_support": int(vals.size),
            "null_p01": float(np.percentile(vals, 1)) if vals.size else None,
            "null_median": float(np.median(vals)) if vals.size else None,
            "null_p99": thr,
            "null_fallback": int(fallback),
            "period_ratio_median": (None if is_trend or ratios is None
                                    else ratios[order - 1]),
        }
        for m in modes:
            row[f"rescaled_{m.value}"] = rescaled[m][order - 1]
        rows.append(row)
    return rows
