import json
import subprocess
import sys

import pytest

from ousiofluct.cli import main

from conftest import TOY_WORDS

FAST = ["--ensemble", "6", "--shuffles", "10"]


@pytest.fixture
def lexfile(tmp_path):
    p = tmp_path / "pds.tsv"
    rows = ["word\tpower\tdanger"] + [f"{w}\t{p}\t{d}" for w, (p, d) in TOY_WORDS.items()]
    p.write_text("\n".join(rows) + "\n")
    return p


@pytest.fixture
def book(toy_book):
    return toy_book("tale", 6000, seed=3, period=1500)


def run(*argv):
    return main([str(a) for a in argv])


class TestUsage:
    def test_no_command(self, capsys):
        with pytest.raises(SystemExit) as e:
            run()
        assert e.value.code == 1

    def test_unknown_flag(self, capsys, book):
        with pytest.raises(SystemExit) as e:
            run("score", book, "--frobnicate")
        assert e.value.code == 1
        assert "usage" in capsys.readouterr().err

    @pytest.mark.parametrize("flag", ["--window", "--skip", "--ensemble", "--shuffles"])
    def test_non_positive(self, flag, book):
        with pytest.raises(SystemExit) as e:
            run("decompose", book, flag, "0")
        assert e.value.code == 1

    def test_bad_choice(self, book):
        with pytest.raises(SystemExit) as e:
            run("cutoff", book, "--mode", "mean")
        assert e.value.code == 1

    def test_lexicon_required(self, book, tmp_path, capsys):
        assert run("score", book, "--out", tmp_path) == 1
        assert "--lexicon" in capsys.readouterr().err

    def test_help(self, capsys):
        with pytest.raises(SystemExit) as e:
            run("--help")
        assert e.value.code == 0


class TestDataErrors:
    def test_missing_book(self, lexfile, tmp_path):
        assert run("score", tmp_path / "nope.txt", "--lexicon", lexfile, "--out", tmp_path) == 2
        assert run("cutoff", tmp_path / "nope.txt", "--lexicon", lexfile,
                   "--out", tmp_path) == 2

    def test_missing_lexicon(self, book, tmp_path):
        assert run("score", book, "--lexicon", tmp_path / "none.tsv", "--out", tmp_path) == 2

    def test_bad_lexicon(self, book, tmp_path):
        bad = tmp_path / "bad.tsv"
        bad.write_text("word\tcolour\nx\t1\n")
        assert run("score", book, "--lexicon", bad, "--out", tmp_path) == 2

    def test_ineligible_book(self, lexfile, tmp_path):
        p = tmp_path / "low.txt"
        p.write_text(" ".join(["zzz", "yyy", "calm", "qqq"] * 100))
        assert run("cutoff", p, "--lexicon", lexfile, "--out", tmp_path, *FAST) == 2
        assert json.loads((tmp_path / "low.json").read_text())["eligible"] is False

    def test_short_text(self, lexfile, tmp_path):
        p = tmp_path / "short.txt"
        p.write_text("calm storm")
        assert run("score", p, "--lexicon", lexfile, "--out", tmp_path) == 2
        assert run("null", p, "--lexicon", lexfile, "--out", tmp_path) == 2

    def test_series_with_gaps(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("window_index,word_time_start,score\n" +
                     "".join(f"{i},{50 * i},{'nan' if i == 3 else i % 3}\n" for i in range(20)))
        assert run("decompose", p, "--out", tmp_path) == 2


class TestCommands:
    def test_score(self, book, lexfile, tmp_path, capsys):
        assert run("score", book, "--lexicon", lexfile, "--out", tmp_path) == 0
        lines = (tmp_path / "tale_danger_series.csv").read_text().splitlines()
        assert lines[0] == "window_index,word_time_start,score" and len(lines) == 121
        assert (tmp_path / "tale_power_series.csv").is_file()

    def test_score_one_dimension_custom_window(self, book, lexfile, tmp_path):
        assert run("score", book, "--lexicon", lexfile, "--out", tmp_path,
                   "--dimension", "power", "--window", "100", "--skip", "25") == 0
        lines = (tmp_path / "tale_power_series.csv").read_text().splitlines()
        assert len(lines) == 1 + (6000 - 100) // 25 + 1
        assert lines[2].startswith("1,25,")
        assert not (tmp_path / "tale_danger_series.csv").exists()

    def test_decompose_series(self, book, lexfile, tmp_path):
        run("score", book, "--lexicon", lexfile, "--out", tmp_path, "--dimension", "danger")
        out = tmp_path / "dec"
        assert run("decompose", tmp_path / "tale_danger_series.csv", "--out", out,
                   "--ensemble", "5", "--seed", "2") == 0
        meta = json.loads((out / "tale_danger_series_imfs.json").read_text())
        assert meta["method"] == "eemd" and meta["config"]["seed"] == 2
        assert meta["config"]["skip"] == 50
        assert (out / "tale_danger_series_imfs.csv").read_text().startswith("window_index,imf_1,")
        assert (out / "tale_danger_series_spectra.csv").is_file()

    def test_decompose_text_plain(self, book, lexfile, tmp_path):
        assert run("decompose", book, "--lexicon", lexfile, "--out", tmp_path, "--plain",
                   "--dimension", "danger") == 0
        meta = json.loads((tmp_path / "tale_danger_imfs.json").read_text())
        assert meta["method"] == "emd"

    def test_cutoff(self, book, lexfile, tmp_path):
        assert run("cutoff", book, "--lexicon", lexfile, "--out", tmp_path, "--seed", "7",
                   "--mode", "median", *FAST) == 0
        rec = json.loads((tmp_path / "tale.json").read_text())
        assert rec["eligible"] and rec["word_count"] == 6000
        assert list(rec["dimensions"]["danger"]["modes"]) == ["median"]
        assert (tmp_path / rec["diagnostics"]["danger_null"]).is_file()

    def test_null(self, book, lexfile, tmp_path):
        assert run("null", book, "--lexicon", lexfile, "--out", tmp_path, *FAST) == 0
        header = (tmp_path / "tale_danger_null.csv").read_text().splitlines()[0]
        assert header.startswith("order,component,target_period_words,target_variance,"
                                 "null_support,null_p01,null_median,null_p99")

    def test_corpus(self, toy_book, lexfile, tmp_path):
        paths = [toy_book(f"b{i}", 3000, seed=i) for i in range(2)]
        manifest = tmp_path / "m.tsv"
        manifest.write_text("book_id\tpath\ttitle\tlcc\n" + "".join(
            f"b{i}\t{p}\tPoems {i}\tPR\n" for i, p in enumerate(paths)))
        out = tmp_path / "results"
        assert run("corpus", manifest, "--lexicon", lexfile, "--out", out, *FAST) == 0
        assert (out / "b0.json").is_file() and (out / "b1.json").is_file()
        agg = (out / "aggregates.csv").read_text().splitlines()
        groupings = {line.split(",")[0] for line in agg[1:]}
        assert groupings == {"all", "lcc_class", "lcc_subclass", "title_keyword"}


class TestDeterminism:
    def test_cutoff_twice(self, book, lexfile, tmp_path):
        for d in ("a", "b"):
            assert run("cutoff", book, "--lexicon", lexfile, "--seed", "7",
                       "--out", tmp_path / d, *FAST) == 0
        files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*")
                       if p.is_file())
        assert files
        for f in files:
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_seed_matters(self, book, lexfile, tmp_path):
        run("decompose", book, "--lexicon", lexfile, "--out", tmp_path / "a", "--seed", "1",
            "--ensemble", "4", "--dimension", "danger")
        run("decompose", book, "--lexicon", lexfile, "--out", tmp_path / "b", "--seed", "2",
            "--ensemble", "4", "--dimension", "danger")
        assert (tmp_path / "a" / "tale_danger_imfs.csv").read_bytes() != \
            (tmp_path / "b" / "tale_danger_imfs.csv").read_bytes()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ousiofluct.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "ousiofluct" in proc.stdout
