#!/usr/bin/env python3
"""Regenerate the shipped lexicon and frequency snapshots.

Inputs:
  * a WordNet dict directory (index.adj / index.adv / index.verb)
  * a Brill-style tag lexicon ("word TAG" per line, ';;;' comments)
  * the `wordfreq` package (English "large" list)

Outputs (tab separated, sorted):
  lexicon.tsv      word <TAB> JJ|RB|VB
  frequencies.tsv  word <TAB> count   (frequency scaled to counts per 1e9 tokens)

A word is tagged JJ/RB/VB when the tag lexicon's most frequent tag for it is
that tag (VBP is folded into VB since the surface form is the base form).
--tagged-limit TAG=N keeps only the N most frequent in-frequency words for
TAG; words absent from the frequency list are always kept in the lexicon.
"""
import argparse
import pathlib
import re

import wordfreq

WORD = re.compile(r"[a-z]+")
POS_FILES = {"JJ": "index.adj", "RB": "index.adv", "VB": "index.verb"}
TAG_FOLD = {"VBP": "VB"}


def read_index(path):
    words = set()
    for line in path.open(encoding="utf-8"):
        if line.startswith(" "):
            continue
        w = line.split()[0]
        if WORD.fullmatch(w):
            words.add(w)
    return words


def read_tags(path):
    tags = {}
    for line in path.open(encoding="utf-8"):
        if line.startswith(";;;"):
            continue
        parts = line.split()
        if len(parts) >= 2:
            tags[parts[0]] = TAG_FOLD.get(parts[1], parts[1])
    return tags


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--wordnet", required=True, type=pathlib.Path)
    ap.add_argument("--tags", required=True, type=pathlib.Path)
    ap.add_argument("--out", required=True, type=pathlib.Path)
    ap.add_argument("--tagged-limit", action="append", default=[])
    args = ap.parse_args()

    limits = {}
    for spec in args.tagged_limit:
        tag, n = spec.split("=")
        limits[tag] = int(n)

    tags = read_tags(args.tags)
    freq = wordfreq.get_frequency_dict("en", wordlist="large")
    counts = {w: round(f * 1e9) for w, f in freq.items() if WORD.fullmatch(w)}

    lexicon = []
    for tag, fname in POS_FILES.items():
        words = {w for w in read_index(args.wordnet / fname) if tags.get(w) == tag}
        in_freq = sorted((w for w in words if counts.get(w, 0) > 0),
                         key=lambda w: (-counts[w], w))
        if tag in limits:
            in_freq = in_freq[: limits[tag]]
        out_freq = sorted(w for w in words if counts.get(w, 0) == 0)
        lexicon += [(w, tag) for w in in_freq + out_freq]

    vocab = {w for w, _ in lexicon}
    args.out.mkdir(parents=True, exist_ok=True)
    with (args.out / "lexicon.tsv").open("w", encoding="utf-8") as f:
        for w, t in sorted(lexicon):
            f.write(f"{w}\t{t}\n")
    with (args.out / "frequencies.tsv").open("w", encoding="utf-8") as f:
        for w in sorted(vocab):
            if counts.get(w, 0) > 0:
                f.write(f"{w}\t{counts[w]}\n")


if __name__ == "__main__":
    main()
