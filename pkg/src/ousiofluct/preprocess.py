"""Raw book text to a lowercase token sequence, plus coverage/eligibility."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .lexicon import Lexicon

MIN_UNIQUE_COVERAGE = 0.60

_START_RE = re.compile(r"\*\*\*\s*START OF", re.IGNORECASE)
_END_RE = re.compile(r"\*\*\*\s*END OF", re.IGNORECASE)

_APOS = "['’]"
# Order matters: irregular negations before the generic n't rule.
_CONTRACTIONS = [
    (re.compile(rf"\b(w)on{_APOS}t\b", re.IGNORECASE), r"\1ill not"),
    (re.compile(rf"\b(c)an{_APOS}t\b", re.IGNORECASE), r"\1an not"),
    (re.compile(rf"\b(s)han{_APOS}t\b", re.IGNORECASE), r"\1hall not"),
    (re.compile(rf"(?<=\w)n{_APOS}t\b", re.IGNORECASE), " not"),
    (re.compile(rf"(?<=\w){_APOS}ll\b", re.IGNORECASE), " will"),
    (re.compile(rf"(?<=\w){_APOS}re\b", re.IGNORECASE), " are"),
    (re.compile(rf"(?<=\w){_APOS}ve\b", re.IGNORECASE), " have"),
    (re.compile(rf"(?<=\w){_APOS}m\b", re.IGNORECASE), " am"),
    # 's (is/has/possessive) and 'd (had/would) are ambiguous: drop them
    (re.compile(rf"(?<=\w){_APOS}[sd]\b", re.IGNORECASE), ""),
]

_EDGE_RE = re.compile(r"^[\W_]+|[\W_]+$")
_TOKEN_RE = re.compile(r"^[^\W\d_]+$")


class CoverageError(ValueError):
    """Coverage of an empty token sequence is undefined."""


@dataclass
class TokenSequence:
    tokens: list[str]
    source_id: str = ""

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]

    def to_text(self) -> str:
        """One token per line, for debugging dumps."""
        return "\n".join(self.tokens) + ("\n" if self.tokens else "")


@dataclass(frozen=True)
class CoverageStats:
    unique_coverage: float
    token_coverage: float
    total_tokens: int
    unique_types: int


@dataclass(frozen=True)
class Eligibility:
    eligible: bool
    reasons: tuple[str, ...] = field(default_factory=tuple)

    def __bool__(self) -> bool:
        return self.eligible

    @property
    def reason(self) -> str:
        return ",".join(self.reasons) if self.reasons else "ok"


def strip_boilerplate(text: str) -> tuple[str, str]:
    """Cut a Project Gutenberg file down to the body between its markers.

    Returns
    -------
    body : str
        Lines strictly between the ``*** START OF`` and ``*** END OF`` marker
        lines (matched as case-insensitive substrings).
    flag : {"ok", "no_markers", "no_end_marker", "no_start_marker"}
    """
    lines = text.splitlines()
    start = next((i for i, ln in enumerate(lines) if _START_RE.search(ln)), None)
    search_from = 0 if start is None else start + 1
    end = next((i for i in range(search_from, len(lines)) if _END_RE.search(lines[i])), None)
    if start is None and end is None:
        return text, "no_markers"
    if start is None:
        return "\n".join(lines[:end]), "no_start_marker"
    if end is None:
        return "\n".join(lines[start + 1:]), "no_end_marker"
    return "\n".join(lines[start + 1:end]), "ok"


def expand_contractions(text: str) -> str:
    """Expand unambiguous contractions; delete ambiguous 's and 'd suffixes."""
    for pattern, repl in _CONTRACTIONS:
        text = pattern.sub(repl, text)
    return text


def tokenize(text: str, source_id: str = "") -> TokenSequence:
    """Lowercase, split on whitespace, strip edge punctuation, keep letter-only words."""
    tokens = []
    for cand in text.lower().split():
        cand = _EDGE_RE.sub("", cand)
        if cand and _TOKEN_RE.match(cand):
            tokens.append(cand)
    return TokenSequence(tokens, source_id)


def preprocess_text(text: str, source_id: str = "", strip: bool = True) -> tuple[TokenSequence, str]:
    """Full text pipeline; returns the tokens and the boilerplate flag."""
    flag = "skipped"
    if strip:
        text, flag = strip_boilerplate(text)
    return tokenize(expand_contractions(text), source_id), flag


def read_book(path: str | Path, source_id: str | None = None) -> tuple[TokenSequence, str]:
    path = Path(path)
    text = path.read_text(encoding="utf-8", errors="replace")
    return preprocess_text(text, source_id if source_id is not None else path.stem)


def coverage(tokens: Sequence[str] | TokenSequence, lex: Lexicon) -> CoverageStats:
    counts = Counter(tokens)
    total = sum(counts.values())
    if total == 0:
        raise CoverageError("coverage undefined for an empty token sequence")
    hit_types = [w for w in counts if w in lex]
    return CoverageStats(
        unique_coverage=len(hit_types) / len(counts),
        token_coverage=sum(counts[w] for w in hit_types) / total,
        total_tokens=total,
        unique_types=len(counts),
    )


def eligible(stats: CoverageStats, window_hits: Iterable[float] | np.ndarray,
             min_unique_coverage: float = MIN_UNIQUE_COVERAGE) -> Eligibility:
    """Corpus gate: enough unique-word coverage and no window without a lexicon word."""
    reasons = []
    if stats.unique_coverage < min_unique_coverage:
        reasons.append("coverage")
    hits = np.asarray(list(window_hits) if not isinstance(window_hits, np.ndarray)
                      else window_hits, dtype=float)
    if hits.size == 0 or np.any(hits < 1):
        reasons.append("empty_window")
    return Eligibility(not reasons, tuple(reasons))
