"""Word-score lexicons and the valence-arousal-dominance to power-danger map."""

from __future__ import annotations

import csv
import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

logger = logging.getLogger(__name__)

DIMENSIONS = ("power", "danger", "structure")

# Singular-vector basis taking centred (valence, arousal, dominance) to
# (goodness, energy, structure).  Two-decimal values, as published.
SVD_MATRIX = np.array([
    [+0.86, -0.15, +0.48],
    [-0.16, +0.83, +0.54],
    [+0.48, +0.55, -0.69],
])

_S = 1.0 / math.sqrt(2.0)
# Clockwise quarter-pi rotation of the goodness-energy plane.
ROTATION = np.array([
    [_S, _S, 0.0],
    [-_S, _S, 0.0],
    [0.0, 0.0, 1.0],
])

VAD_TO_PDS = ROTATION @ SVD_MATRIX

_WORD_RE = re.compile(r"^[^\W\d_]+$")


class LexiconError(ValueError):
    """Raised for malformed lexicon files or entries."""


@dataclass(frozen=True)
class VadScore:
    valence: float
    arousal: float
    dominance: float

    def as_array(self) -> np.ndarray:
        return np.array([self.valence, self.arousal, self.dominance], dtype=float)


@dataclass(frozen=True)
class PdsScore:
    power: float
    danger: float
    structure: float = 0.0

    def __getitem__(self, dim: str) -> float:
        if dim not in DIMENSIONS:
            raise KeyError(dim)
        return getattr(self, dim)


def normalize_vad(raw: VadScore) -> VadScore:
    """Shift VAD components from [0, 1] to [-1/2, 1/2]."""
    vals = raw.as_array()
    if not np.all(np.isfinite(vals)) or np.any(vals < 0.0) or np.any(vals > 1.0):
        raise LexiconError(f"VAD component outside [0, 1]: {raw}")
    return VadScore(*(vals - 0.5))


def denormalize_vad(centred: VadScore) -> VadScore:
    """Inverse of :func:`normalize_vad`."""
    return VadScore(*(centred.as_array() + 0.5))


def vad_to_pds(v: VadScore) -> PdsScore:
    """Map a centred VAD triple to (power, danger, structure)."""
    p, d, s = VAD_TO_PDS @ v.as_array()
    return PdsScore(float(p), float(d), float(s))


@dataclass
class Lexicon:
    """Immutable-after-load map from lowercase word to :class:`PdsScore`.

    Attributes
    ----------
    entries : dict
        word -> PdsScore
    source : str
        Where the lexicon came from (path or ``"<memory>"``).
    form : {"pds", "vad"}
        Column layout of the source file.
    n_duplicates, n_skipped : int
        Rows overwritten by a later duplicate, and rows rejected because the
        word is not a plain letter sequence.
    """

    entries: dict[str, PdsScore]
    source: str = "<memory>"
    form: str = "pds"
    n_duplicates: int = 0
    n_skipped: int = 0

    @classmethod
    def from_mapping(cls, scores: Mapping[str, tuple | PdsScore | float],
                     dimension: str | None = None) -> "Lexicon":
        """Build a lexicon in memory.

        Values may be PdsScore, (power, danger[, structure]) tuples, or plain
        floats when ``dimension`` names the single dimension they score.
        """
        entries = {}
        for word, val in scores.items():
            if isinstance(val, PdsScore):
                score = val
            elif dimension is not None:
                kw = {"power": 0.0, "danger": 0.0, "structure": 0.0}
                kw[dimension] = float(val)
                score = PdsScore(**kw)
            else:
                score = PdsScore(*map(float, val))
            entries[word.lower()] = score
        return cls(entries)

    @property
    def size(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def __iter__(self):
        return iter(self.entries)

    def get(self, word: str) -> PdsScore | None:
        return self.entries.get(word)

    def words(self) -> list[str]:
        return list(self.entries)

    def score_array(self, words: Iterable[str], dimension: str) -> tuple[np.ndarray, np.ndarray]:
        """Scores and hit flags for a sequence of words.

        Misses get score 0 and hit 0, so window sums can be taken directly.
        """
        if dimension not in DIMENSIONS:
            raise ValueError(f"unknown dimension {dimension!r}")
        words = list(words)
        scores = np.zeros(len(words))
        hits = np.zeros(len(words))
        for i, w in enumerate(words):
            s = self.entries.get(w)
            if s is not None:
                scores[i] = getattr(s, dimension)
                hits[i] = 1.0
        return scores, hits


def _sniff_delimiter(header: str) -> str:
    return "\t" if "\t" in header else ","


def load_lexicon(source: str | Path) -> Lexicon:
    """Load a tab- or comma-separated lexicon with a header row.

    Accepted layouts (column names matched case-insensitively):

    * ``word, power, danger[, structure]`` -- loaded verbatim, structure
      defaults to 0;
    * ``word, valence, arousal, dominance`` -- values in [0, 1], centred and
      mapped with :func:`vad_to_pds`.

    Later duplicates replace earlier rows and are counted in
    ``Lexicon.n_duplicates``.
    """
    path = Path(source)
    with path.open(encoding="utf-8-sig", newline="") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise LexiconError(f"{path}: empty lexicon")
        delim = _sniff_delimiter(header_line)
        fh.seek(0)
        reader = csv.reader(fh, delimiter=delim)
        header = [h.strip().lower() for h in next(reader)]
        col = {name: i for i, name in enumerate(header)}
        if "word" not in col:
            raise LexiconError(f"{path}: missing 'word' column")
        if {"power", "danger"} <= col.keys():
            form = "pds"
        elif {"valence", "arousal", "dominance"} <= col.keys():
            form = "vad"
        else:
            raise LexiconError(
                f"{path}: need columns power,danger or valence,arousal,dominance; got {header}")

        entries: dict[str, PdsScore] = {}
        n_dup = n_skip = 0
        for lineno, row in enumerate(reader, start=2):
            if not row or not any(cell.strip() for cell in row):
                continue
            word = row[col["word"]].strip().lower()
            if not _WORD_RE.match(word):
                n_skip += 1
                continue
            try:
                if form == "pds":
                    structure = 0.0
                    if "structure" in col and row[col["structure"]].strip():
                        structure = float(row[col["structure"]])
                    score = PdsScore(float(row[col["power"]]), float(row[col["danger"]]),
                                     structure)
                    if not all(map(math.isfinite, (score.power, score.danger, score.structure))):
                        raise ValueError("non-finite score")
                else:
                    raw = VadScore(float(row[col["valence"]]), float(row[col["arousal"]]),
                                   float(row[col["dominance"]]))
                    score = vad_to_pds(normalize_vad(raw))
            except (ValueError, IndexError) as exc:
                if isinstance(exc, LexiconError):
                    raise LexiconError(f"{path}:{lineno}: {exc}") from None
                raise LexiconError(f"{path}:{lineno}: unparsable row {row!r}") from exc
            if word in entries:
                n_dup += 1
            entries[word] = score

    if not entries:
        raise LexiconError(f"{path}: empty lexicon")
    if n_dup:
        logger.warning("%s: %d duplicate words, last entry kept", path, n_dup)
    return Lexicon(entries, source=str(path), form=form, n_duplicates=n_dup, n_skipped=n_skip)
