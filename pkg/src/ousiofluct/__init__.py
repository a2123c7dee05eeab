"""Ousiometric fluctuations in books.

Turn a text into power and danger time series in word-time, split them into
intrinsic mode functions with (ensemble) empirical mode decomposition, and
find the IMF order above which word order matters, using shuffled copies of
the text as the null model.
"""

__version__ = "0.1.0"

from .cutoff import (ALL_MODES, CutoffResult, NullEnsemble, RescalingMode, build_null,
                     detect_cutoff, imf_variance, rescale)
from .emd import Decomposition, EemdConfig, Imf, eemd, emd, partial_reconstruction, sift
from .hht import characteristic_period, instantaneous_frequency
from .kernels import BACKEND
from .lexicon import Lexicon, PdsScore, VadScore, load_lexicon, normalize_vad, vad_to_pds
from .preprocess import TokenSequence, coverage, eligible, read_book, tokenize
from .series import OusioSeries, WindowConfig, shuffle, window_scores

__all__ = [
    "ALL_MODES", "BACKEND", "CutoffResult", "Decomposition", "EemdConfig", "Imf", "Lexicon",
    "NullEnsemble", "OusioSeries", "PdsScore", "RescalingMode", "TokenSequence", "VadScore",
    "WindowConfig", "build_null", "characteristic_period", "coverage", "detect_cutoff", "eemd",
    "eligible", "emd", "imf_variance", "instantaneous_frequency", "load_lexicon",
    "normalize_vad", "partial_reconstruction", "read_book", "rescale", "shuffle", "sift",
    "tokenize", "vad_to_pds", "window_scores",
]
