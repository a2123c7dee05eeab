"""Empirical mode decomposition and its noise-assisted ensemble variant.

The sifting inner loop lives in :mod:`ousiofluct.kernels` (compiled when
available).  Envelopes are natural cubic splines through the local extrema,
with two extrema mirrored across each end of the series.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .series import fmt

logger = logging.getLogger(__name__)

SD_THRESHOLD = 0.2
MAX_SIFTS = 100
MIN_LENGTH = 8
EEMD_MEAN_TOLERANCE = 0.10


class DecompositionError(ValueError):
    """Input unsuitable for decomposition (too short, non-finite)."""


class DecompositionFailed(RuntimeError):
    """Ensemble output failed the mean-preservation check."""


class TooShortError(DecompositionError):
    pass


@dataclass
class Imf:
    values: np.ndarray
    order: int


@dataclass
class Decomposition:
    """IMFs (rows, fastest first) and the non-oscillatory residual.

    ``sift_counts`` and ``unconverged`` are per IMF order; for an ensemble they
    are the mean sift count and the number of members whose sift hit the cap.
    """

    imfs: np.ndarray
    residual: np.ndarray
    sift_counts: list = field(default_factory=list)
    unconverged: list = field(default_factory=list)
    method: str = "emd"
    config: dict = field(default_factory=dict)

    @property
    def n_imfs(self) -> int:
        return int(self.imfs.shape[0])

    @property
    def input_length(self) -> int:
        return int(self.residual.shape[0])

    def imf(self, order: int) -> Imf:
        if not 1 <= order <= self.n_imfs:
            raise IndexError(f"IMF order {order} outside 1..{self.n_imfs}")
        return Imf(self.imfs[order - 1], order)

    def __iter__(self):
        for k in range(self.n_imfs):
            yield Imf(self.imfs[k], k + 1)

    def reconstruct(self) -> np.ndarray:
        return self.imfs.sum(axis=0) + self.residual

    def components(self) -> np.ndarray:
        """IMFs followed by the residual as the last row."""
        return np.vstack([self.imfs, self.residual[None, :]])

    def metadata(self) -> dict:
        return {
            "method": self.method,
            "n_imfs": self.n_imfs,
            "orders": list(range(1, self.n_imfs + 1)),
            "input_length": self.input_length,
            "sift_counts": [float(c) for c in self.sift_counts],
            "unconverged": [int(u) for u in self.unconverged],
            "config": self.config,
        }

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["window_index"] + [f"imf_{k}" for k in range(1, self.n_imfs + 1)]
                       + ["residual"])
            comps = self.components()
            for i in range(self.input_length):
                w.writerow([i] + [fmt(v) for v in comps[:, i]])

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.metadata(), indent=2, sort_keys=True) + "\n")


@dataclass(frozen=True)
class EemdConfig:
    ensemble_size: int = 100
    noise_ratio: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.ensemble_size < 1:
            raise ValueError("ensemble_size must be >= 1")
        if not self.noise_ratio >= 0:
            raise ValueError("noise_ratio must be >= 0")


def _validate(x) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DecompositionError("expected a 1-D series")
    if x.shape[0] < MIN_LENGTH:
        raise TooShortError(f"series of length {x.shape[0]} is shorter than {MIN_LENGTH}")
    if not np.all(np.isfinite(x)):
        raise DecompositionError("series contains non-finite values")
    return x


def find_extrema(x):
    """Strict local maxima and minima as ``((idx, values), (idx, values))``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] < 3:
        raise TooShortError("need at least 3 samples to find extrema")
    maxi, mini = kernels.find_extrema(x)
    return (maxi, x[maxi]), (mini, x[mini])


def envelope_mean(x):
    """Mean of upper and lower spline envelopes; None when extrema are insufficient."""
    return kernels.envelope_mean(np.asarray(x, dtype=np.float64))


def is_imf(x) -> bool:
    """Extrema and zero-crossing counts differ by at most one."""
    maxi, mini = kernels.find_extrema(x)
    return abs(maxi.size + mini.size - kernels.count_zero_crossings(x)) <= 1


def sift(x, sd_threshold: float = SD_THRESHOLD, max_sifts: int = MAX_SIFTS):
    """Extract one IMF.

    Iterates ``h <- h - envelope_mean(h)`` until the Cauchy-type SD between
    iterations drops below ``sd_threshold`` and extrema/zero-crossing counts
    differ by at most one, or ``max_sifts`` is reached.

    Returns
    -------
    imf : Imf
    n_sifts : int
    converged : bool
        False if the cap was hit.
    """
    h, n, ok = kernels.sift(np.ascontiguousarray(x, dtype=np.float64),
                            float(sd_threshold), int(max_sifts))
    return Imf(h, 1), n, ok


def _has_oscillation(r: np.ndarray) -> bool:
    maxi, mini = kernels.find_extrema(r)
    return maxi.size >= 2 and mini.size >= 2


def emd(x, sd_threshold: float = SD_THRESHOLD, max_sifts: int = MAX_SIFTS,
        max_imfs: int | None = None) -> Decomposition:
    """Plain EMD: sift IMFs off the residue until it has < 2 maxima or < 2 minima."""
    x = _validate(x)
    if max_imfs is None:
        max_imfs = int(math.log2(x.shape[0])) + 4
    imfs, counts, unconverged = [], [], []
    r = x.copy()
    while len(imfs) < max_imfs and _has_oscillation(r):
        h, n, ok = kernels.sift(r, float(sd_threshold), int(max_sifts))
        imfs.append(h)
        counts.append(n)
        unconverged.append(0 if ok else 1)
        r = r - h
    arr = np.array(imfs) if imfs else np.zeros((0, x.shape[0]))
    return Decomposition(arr, r, counts, unconverged, "emd",
                         {"sd_threshold": sd_threshold, "max_sifts": max_sifts})


def member_noise(n: int, std: float, seed: int, member: int) -> np.ndarray:
    """Gaussian noise for one ensemble member from a counter-based stream."""
    bitgen = np.random.Philox(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, int(member)]))
    return np.random.Generator(bitgen).standard_normal(n) * std


def _member(args):
    x, std, seed, k, sd_threshold, max_sifts = args
    return emd(x + member_noise(x.shape[0], std, seed, k), sd_threshold, max_sifts)


def mean_preserved(x, d: Decomposition, tol: float = EEMD_MEAN_TOLERANCE) -> bool:
    """Mean of the summed decomposition lies within ``tol`` (relative) of the input mean."""
    target = float(np.mean(x))
    got = float(np.mean(d.reconstruct()))
    return abs(got - target) <= tol * abs(target)


def eemd(x, cfg: EemdConfig = EemdConfig(), sd_threshold: float = SD_THRESHOLD,
         max_sifts: int = MAX_SIFTS, check: bool = True, workers: int = 1) -> Decomposition:
    """Ensemble EMD.

    Each member decomposes ``x`` plus white noise of standard deviation
    ``cfg.noise_ratio * std(x)``; IMFs are averaged order by order.  Members
    with fewer IMFs contribute zeros at the missing orders, and residuals are
    averaged separately, so the output still sums to the mean noisy input.

    Raises
    ------
    DecompositionFailed
        If ``check`` and the summed output mean is not within 10% of the
        input mean.
    """
    x = _validate(x)
    std = cfg.noise_ratio * float(np.std(x))
    meta = asdict(cfg) | {"sd_threshold": sd_threshold, "max_sifts": max_sifts}
    if std == 0.0:
        d = emd(x, sd_threshold, max_sifts)
        d.method, d.config = "eemd", meta
        return d

    jobs = ((x, std, cfg.seed, k, sd_threshold, max_sifts) for k in range(cfg.ensemble_size))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            members = list(pool.map(_member, jobs, chunksize=4))
    else:
        members = map(_member, jobs)

    n = x.shape[0]
    acc = np.zeros((0, n))
    res = np.zeros(n)
    counts = np.zeros(0)
    unconv = np.zeros(0, dtype=int)
    for d in members:  # fixed member order keeps the reduction deterministic
        m = d.n_imfs
        if m > acc.shape[0]:
            grow = m - acc.shape[0]
            acc = np.vstack([acc, np.zeros((grow, n))])
            counts = np.concatenate([counts, np.zeros(grow)])
            unconv = np.concatenate([unconv, np.zeros(grow, dtype=int)])
        acc[:m] += d.imfs
        counts[:m] += d.sift_counts
        unconv[:m] += d.unconverged
        res += d.residual
    e = cfg.ensemble_size
    out = Decomposition(acc / e, res / e, list(counts / e), list(unconv), "eemd", meta)
    if check and not mean_preserved(x, out):
        raise DecompositionFailed("EEMD output mean is not within 10% of the input mean")
    return out


def partial_reconstruction(d: Decomposition, from_order: int) -> np.ndarray:
    """Sum of IMFs with order >= ``from_order`` plus the residual.

    ``from_order = n_imfs + 1`` gives the residual alone.
    """
    if not 1 <= from_order <= d.n_imfs + 1:
        raise IndexError(f"from_order {from_order} outside 1..{d.n_imfs + 1}")
    return d.imfs[from_order - 1:].sum(axis=0) + d.residual
