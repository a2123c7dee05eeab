"""Hilbert spectral analysis of IMFs: characteristic period in words."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .series import fmt

BINS_PER_DECADE = 20
MIN_FREQUENCY = 1e-6  # word^-1
MAX_FREQUENCY = 1.0   # word^-1


class UndefinedPeriodError(ValueError):
    """The IMF carries no energy in any frequency bin."""


@dataclass(frozen=True)
class FrequencyBins:
    edges: np.ndarray

    @property
    def count(self) -> int:
        return int(self.edges.shape[0] - 1)

    @property
    def centers(self) -> np.ndarray:
        """Geometric centre of each bin."""
        return np.sqrt(self.edges[:-1] * self.edges[1:])

    def index_of(self, frequency: float) -> int:
        """Bin holding ``frequency`` (left-closed), or -1 outside the range."""
        if not self.edges[0] <= frequency < self.edges[-1]:
            return -1
        return int(np.searchsorted(self.edges, frequency, side="right") - 1)


def default_bins() -> FrequencyBins:
    """120 log-spaced bins from 1e-6 to 1 word^-1; identical for every text."""
    n = int(round(BINS_PER_DECADE * np.log10(MAX_FREQUENCY / MIN_FREQUENCY)))
    exps = np.linspace(np.log10(MIN_FREQUENCY), np.log10(MAX_FREQUENCY), n + 1)
    return FrequencyBins(10.0 ** exps)


BINS = default_bins()


@dataclass
class HhtSpectrum:
    energies: np.ndarray
    bins: FrequencyBins
    dominant_bin: int
    characteristic_period: float

    def to_csv(self, path: str | Path) -> None:
        write_spectra_csv(path, [self])


def analytic_signal(x) -> np.ndarray:
    """``x + i H[x]`` via the FFT: zero negative frequencies, double positive ones."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if n == 0:
        return np.zeros(0, dtype=complex)
    coeffs = np.fft.fft(x)
    gain = np.zeros(n)
    gain[0] = 1.0
    if n % 2 == 0:
        gain[n // 2] = 1.0
        gain[1:n // 2] = 2.0
    else:
        gain[1:(n + 1) // 2] = 2.0
    return np.fft.ifft(coeffs * gain)


def hilbert_transform(x) -> np.ndarray:
    return analytic_signal(x).imag


def instantaneous_frequency(imf, sampling_rate: float = 1.0 / 50):
    """Instantaneous frequency (word^-1) and amplitude of an IMF.

    ``sampling_rate`` is samples per word, i.e. 1 / skip.  The phase
    derivative uses central differences inside and one-sided differences at
    the two ends.
    """
    z = analytic_signal(imf)
    phase = np.unwrap(np.angle(z))
    if phase.shape[0] < 2:
        return np.zeros_like(phase), np.abs(z)
    freq = np.gradient(phase) / (2.0 * np.pi) * sampling_rate
    return freq, np.abs(z)


def spectrum(imf, bins: FrequencyBins = BINS, sampling_rate: float = 1.0 / 50) -> HhtSpectrum:
    """Amplitude-squared energy per frequency bin and the dominant period.

    Samples with non-positive instantaneous frequency are left out.  Ties go
    to the lower-frequency bin.
    """
    freq, amp = instantaneous_frequency(imf, sampling_rate)
    keep = (freq > 0) & (freq >= bins.edges[0]) & (freq < bins.edges[-1]) & (amp > 0)
    idx = np.searchsorted(bins.edges, freq[keep], side="right") - 1
    energies = np.bincount(idx, weights=amp[keep] ** 2, minlength=bins.count)
    if not np.any(energies > 0):
        raise UndefinedPeriodError("IMF has no positive-frequency energy")
    dominant = int(np.argmax(energies))  # argmax returns the first, i.e. lowest-frequency, tie
    return HhtSpectrum(energies, bins, dominant, float(1.0 / bins.centers[dominant]))


def characteristic_period(imf, bins: FrequencyBins = BINS,
                          sampling_rate: float = 1.0 / 50) -> float:
    """Period in words at the centre of the highest-energy frequency bin."""
    return spectrum(imf, bins, sampling_rate).characteristic_period


def period_bin(period: float, bins: FrequencyBins = BINS) -> int:
    """Index of the bin that contains frequency ``1 / period``."""
    return bins.index_of(1.0 / period)


def write_spectra_csv(path: str | Path, spectra) -> None:
    """One row per (IMF, bin): imf_order, bin_low, bin_high, energy."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["imf_order", "bin_low", "bin_high", "energy"])
        for order, sp in enumerate(spectra, start=1):
            for lo, hi, e in zip(sp.bins.edges[:-1], sp.bins.edges[1:], sp.energies):
                w.writerow([order, fmt(lo), fmt(hi), fmt(e)])
