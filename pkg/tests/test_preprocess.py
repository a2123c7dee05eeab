import re

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ousiofluct.lexicon import Lexicon
from ousiofluct.preprocess import (CoverageError, CoverageStats, coverage, eligible,
                                   expand_contractions, preprocess_text, read_book,
                                   strip_boilerplate, tokenize)

GUTENBERG = ("header\n*** START OF THE PROJECT GUTENBERG EBOOK X ***\nbody\n"
             "*** END OF THE PROJECT GUTENBERG EBOOK X ***\nlicense")


class TestBoilerplate:
    def test_both_markers(self):
        assert strip_boilerplate(GUTENBERG) == ("body", "ok")

    def test_no_markers(self):
        assert strip_boilerplate("just text\nmore") == ("just text\nmore", "no_markers")

    def test_start_only(self):
        body, flag = strip_boilerplate("junk\n*** START OF THIS EBOOK ***\na\nb")
        assert (body, flag) == ("a\nb", "no_end_marker")

    def test_end_only(self):
        body, flag = strip_boilerplate("a\nb\n*** END OF THIS EBOOK ***\nlicense")
        assert (body, flag) == ("a\nb", "no_start_marker")

    def test_marker_case_and_spacing(self):
        text = "h\n***start of the project gutenberg ebook\nx y\n*** End Of the ebook\nl"
        assert strip_boilerplate(text) == ("x y", "ok")

    def test_older_marker_wording(self):
        text = "h\n*** START OF THIS PROJECT GUTENBERG EBOOK MOBY DICK ***\nCall me\n" \
               "*** END OF THIS PROJECT GUTENBERG EBOOK MOBY DICK ***\n"
        assert strip_boilerplate(text)[0] == "Call me"


class TestContractions:
    @pytest.mark.parametrize("src,out", [
        ("don't", "do not"),
        ("she'd", "she"),
        ("we're we've", "we are we have"),
        ("I'm sure you'll", "I am sure you will"),
        ("won't can't shan't", "will not can not shall not"),
        ("Won't", "Will not"),
        ("the captain's log", "the captain log"),
        ("it’s isn’t", "it is not"),
    ])
    def test_table(self, src, out):
        assert expand_contractions(src) == out

    def test_leaves_quotes_alone(self):
        assert expand_contractions("'tis 'hello' o'clock") == "'tis 'hello' o'clock"


class TestTokenize:
    def test_internal_dash_drops_whole_candidate(self):
        # "War—begins" is one whitespace-delimited candidate with an inner dash
        assert tokenize("The War—begins NOW!").tokens == ["the", "now"]

    def test_digits_dropped(self):
        assert tokenize("abc123 42").tokens == []

    def test_plain(self):
        assert tokenize("Plain text here").tokens == ["plain", "text", "here"]

    def test_edge_punctuation(self):
        assert tokenize('"Hello," (world) _under_ ...end').tokens == \
            ["hello", "world", "under", "end"]

    def test_unicode_letters_kept(self):
        assert tokenize("Café naïve").tokens == ["café", "naïve"]

    def test_source_id(self):
        assert tokenize("a", source_id="b1").source_id == "b1"

    @given(st.text(max_size=200))
    def test_tokens_are_lowercase_letters(self, text):
        for tok in tokenize(text):
            assert tok and re.fullmatch(r"[^\W\d_]+", tok)
            assert tok == tok.lower()

    @given(st.text(max_size=200))
    def test_idempotent(self, text):
        once = tokenize(text).tokens
        assert tokenize(" ".join(once)).tokens == once


def test_pipeline_on_gutenberg_layout():
    toks, flag = preprocess_text(GUTENBERG.replace("body", "It's the whale's day; don't go."))
    assert flag == "ok"
    assert toks.tokens == ["it", "the", "whale", "day", "do", "not", "go"]


def test_read_book(tmp_path):
    p = tmp_path / "b.txt"
    p.write_text("Hello there", encoding="utf-8")
    toks, flag = read_book(p)
    assert toks.source_id == "b" and toks.tokens == ["hello", "there"] and flag == "no_markers"


def test_to_text():
    assert tokenize("a b").to_text() == "a\nb\n"


class TestCoverage:
    lex = Lexicon.from_mapping({"a": 0.1}, dimension="danger")

    def test_counts(self):
        c = coverage(["a", "a", "b"], self.lex)
        assert c.unique_coverage == 0.5
        assert c.token_coverage == pytest.approx(2 / 3)
        assert (c.total_tokens, c.unique_types) == (3, 2)

    def test_full(self):
        c = coverage(["a", "a"], self.lex)
        assert (c.unique_coverage, c.token_coverage) == (1.0, 1.0)

    def test_none(self):
        c = coverage(["b", "c"], self.lex)
        assert (c.unique_coverage, c.token_coverage) == (0.0, 0.0)

    def test_empty(self):
        with pytest.raises(CoverageError):
            coverage([], self.lex)

    @given(st.lists(st.sampled_from(["a", "b", "c", "d"]), min_size=1, max_size=60),
           st.integers(0, 2**31))
    def test_shuffle_invariant(self, tokens, seed):
        perm = np.random.default_rng(seed).permutation(len(tokens))
        assert coverage(tokens, self.lex) == coverage([tokens[i] for i in perm], self.lex)

    @given(st.lists(st.sampled_from(["a", "b", "c"]), min_size=1, max_size=60))
    def test_bounds(self, tokens):
        c = coverage(tokens, self.lex)
        assert 0 <= c.unique_coverage <= 1 and 0 <= c.token_coverage <= 1
        assert c.total_tokens >= c.unique_types


class TestEligible:
    def stats(self, u):
        return CoverageStats(u, u, 100, 50)

    def test_eligible(self):
        e = eligible(self.stats(0.73), [3, 1, 4])
        assert e and e.reason == "ok"

    def test_coverage_boundary(self):
        assert eligible(self.stats(0.60), [1])
        e = eligible(self.stats(0.59), [1, 1])
        assert not e and e.reasons == ("coverage",)

    def test_empty_window(self):
        e = eligible(self.stats(0.9), [2, 0, 5])
        assert not e and e.reasons == ("empty_window",)

    def test_both(self):
        assert eligible(self.stats(0.1), [0]).reasons == ("coverage", "empty_window")

    def test_no_windows(self):
        assert eligible(self.stats(0.9), []).reasons == ("empty_window",)
