import os
from pathlib import Path

import numpy as np
import pytest

from ousiofluct.lexicon import Lexicon

ROOT = Path(__file__).resolve().parents[1]
DATA = Path(os.environ.get("OUSIOFLUCT_DATA", ROOT / "data"))

# Filled by the acceptance module, printed once at the end of the run.
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def data_dir():
    if not (DATA / "lexicon_vad.tsv").is_file():
        pytest.skip("sample data missing; run scripts/fetch_sample_data.py")
    return DATA


@pytest.fixture(scope="session")
def sample_lexicon(data_dir):
    from ousiofluct.lexicon import load_lexicon
    return load_lexicon(data_dir / "lexicon_vad.tsv")


TOY_WORDS = {
    "calm": (0.3, -0.4), "storm": (0.2, 0.6), "king": (0.8, 0.1), "child": (-0.3, -0.2),
    "sword": (0.4, 0.5), "garden": (0.1, -0.5), "night": (-0.1, 0.3), "light": (0.2, -0.3),
    "river": (0.0, -0.1), "fear": (-0.4, 0.7), "home": (0.1, -0.6), "battle": (0.3, 0.8),
}
FILLER = ["the", "and", "of", "to", "was"]


@pytest.fixture
def toy_lexicon():
    return Lexicon.from_mapping(TOY_WORDS)


def toy_text(n_words: int, seed: int, period: float | None = None) -> str:
    """Random text over ``TOY_WORDS`` plus filler; ``period`` biases word choice
    towards dangerous words on a slow sinusoidal cycle."""
    rng = np.random.default_rng(seed)
    words = sorted(TOY_WORDS)
    danger = np.array([TOY_WORDS[w][1] for w in words])
    out = []
    for i in range(n_words):
        if rng.random() < 0.4:
            out.append(FILLER[rng.integers(len(FILLER))])
            continue
        if period is None:
            p = np.full(len(words), 1.0 / len(words))
        else:
            p = np.exp(1.5 * danger * np.sin(2 * np.pi * i / period))
            p /= p.sum()
        out.append(words[rng.choice(len(words), p=p)])
    return " ".join(out)


@pytest.fixture
def toy_book(tmp_path):
    def make(name: str, n_words: int, seed: int = 0, period: float | None = None) -> Path:
        path = tmp_path / f"{name}.txt"
        path.write_text(toy_text(n_words, seed, period), encoding="utf-8")
        return path
    return make
