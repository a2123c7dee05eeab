#!/usr/bin/env python3
"""Assemble the desk-scale sample corpus and lexicon under ``data/``.

Everything is pulled from package registries (PyPI sdists and npm tarballs)
that happen to bundle public-domain texts or published word norms:

* VAD lexicon: Warriner, Kuperman & Brysbaert (2013) norms shipped inside the
  ``labMTsimple`` sdist.  Ratings (1-9) are mapped to [0, 1] and expanded to
  noun plurals and verb conjugations of each lemma with ``lemminflect``.
* Long texts: Moby Dick (npm ``@stdlib/datasets``), the King James Bible
  (npm ``kjv``), the Canterbury corpus texts in the ``brotli`` sdist (Alice,
  As You Like It, Paradise Lost, LoC e-text workshop proceedings) and Hamlet
  from the ``scattertext`` sdist.
* Short texts: early State of the Union addresses (npm
  ``@stdlib/datasets-sotu``).

Usage::

    python scripts/fetch_sample_data.py [--out data]

Requires pip, npm and the ``lemminflect`` package.
"""

import argparse
import csv
import io
import json
import re
import subprocess
import sys
import tarfile
import tempfile
from pathlib import Path

SOTU_LIMIT = 8
SHORT_MAX_WORDS = 3000


def pip_sdist(name, version, dest):
    subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps", "--no-binary", ":all:",
                    "-q", "-d", str(dest), f"{name}=={version}"], check=True)
    return next(Path(dest).glob(f"{name}-{version}.tar.gz"))


def npm_tarball(spec, dest):
    out = subprocess.run(["npm", "pack", spec, "--silent"], cwd=dest, check=True,
                         capture_output=True, text=True).stdout.strip().splitlines()[-1]
    return Path(dest) / out


def member_text(tar_path, suffix, encoding="utf-8"):
    with tarfile.open(tar_path) as tf:
        for m in tf.getmembers():
            if m.name.endswith(suffix):
                return tf.extractfile(m).read().decode(encoding)
    raise FileNotFoundError(f"{suffix} not in {tar_path}")


def build_lexicon(tmp, out):
    from lemminflect import getAllInflections

    sdist = pip_sdist("labMTsimple", "2.8.8", tmp)
    text = member_text(sdist, "data/WK/BRM-emot-submit.csv")
    base = {}
    for row in csv.DictReader(io.StringIO(text)):
        word = row["Word"].strip().lower()
        if not re.fullmatch(r"[a-z]+", word):
            continue
        base[word] = tuple((float(row[k]) - 1.0) / 8.0
                           for k in ("V.Mean.Sum", "A.Mean.Sum", "D.Mean.Sum"))
    expanded = dict(base)
    for lemma in sorted(base):
        for forms in getAllInflections(lemma).values():
            for form in forms:
                form = form.lower()
                if re.fullmatch(r"[a-z]+", form) and form not in expanded:
                    expanded[form] = base[lemma]
    path = out / "lexicon_vad.tsv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["word", "valence", "arousal", "dominance"])
        for word in sorted(expanded):
            w.writerow([word] + [f"{v:.6f}" for v in expanded[word]])
    print(f"lexicon: {len(base)} lemmas -> {len(expanded)} words ({path})")


def count_words(text):
    sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
    from ousiofluct.preprocess import preprocess_text
    return len(preprocess_text(text)[0])


def build_books(tmp, out):
    books = out / "books"
    books.mkdir(parents=True, exist_ok=True)
    rows = []

    def add(book_id, text, title, lcc, group):
        (books / f"{book_id}.txt").write_text(text, encoding="utf-8")
        rows.append((book_id, f"books/{book_id}.txt", title, lcc, group))

    stdlib = npm_tarball("@stdlib/datasets@0.4.0", tmp)
    add("moby_dick", member_text(stdlib, "moby-dick/data/data.txt"),
        "Moby Dick; Or, The Whale", "PS", "long")

    kjv = npm_tarball("kjv@1.0.0", tmp)
    verses = json.loads(member_text(kjv, "json/verses-1769.json"))
    bible = "\n".join(v.replace("[", "").replace("]", "") for v in verses.values())
    add("kjv_bible", bible, "The King James Version of the Bible", "BS", "long")

    brotli = pip_sdist("brotli", "1.2.0", tmp)
    for fname, book_id, title, lcc in [
        ("plrabn12.txt", "paradise_lost", "Paradise Lost", "PR"),
        ("lcet10.txt", "loc_etext_workshop", "Workshop on Electronic Texts: Proceedings", "Z"),
        ("alice29.txt", "alice", "Alice's Adventures in Wonderland", "PR"),
        ("asyoulik.txt", "as_you_like_it", "As You Like It", "PR"),
    ]:
        add(book_id, member_text(brotli, f"testdata/{fname}", "latin-1"), title, lcc, "long")

    st = pip_sdist("scattertext", "0.1.19", tmp)
    add("hamlet", member_text(st, "scattertext/data/hamlet.txt"),
        "Hamlet, Prince of Denmark", "PR", "long")

    sotu = npm_tarball("@stdlib/datasets-sotu@0.2.3", tmp)
    n_short = 0
    with tarfile.open(sotu) as tf:
        names = sorted(m.name for m in tf.getmembers() if m.name.endswith("_n.txt"))
        for name in names:
            text = tf.extractfile(name).read().decode("utf-8")
            if count_words(text) >= SHORT_MAX_WORDS:
                continue
            stem = Path(name).stem
            year = stem.split("_")[0]
            who = " ".join(p.capitalize() for p in stem.split("_")[1:-1])
            add(f"sotu_{stem}", text, f"State of the Union Address, {year} ({who})", "JK", "short")
            n_short += 1
            if n_short >= SOTU_LIMIT:
                break

    with (out / "manifest.tsv").open("w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["book_id", "path", "title", "lcc", "group"])
        w.writerows(rows)
    print(f"books: {len(rows)} texts ({out / 'manifest.tsv'})")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "data"))
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        build_lexicon(tmp, out)
        build_books(tmp, out)


if __name__ == "__main__":
    main()
