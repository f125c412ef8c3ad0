#!/usr/bin/env python3
"""Freeze reference BPE output for the toy corpus.

Runs subword-nmt's learner (with ties broken towards the smallest pair) and
applier over a 100-word corpus and writes the corpus, merges and
segmentations:

    python3 tools/make_bpe_oracle.py crates/core/tests/fixtures/bpe
"""
import io
import os
import random
import sys

from subword_nmt import apply_bpe, learn_bpe

SYLLABLES = ["ka", "ki", "ta", "to", "ru", "re", "shi", "n", "mo", "no",
             "走", "歩", "る", "れ", "か", "き", "し", "た"]
NUM_WORDS = 100
NUM_MERGES = 50


def smallest_pair_max(stats, key=None):
    # Replacement for max() in the learner: highest count, then smallest pair.
    if key is None:
        return max(stats)
    return min(stats, key=lambda x: (-stats[x], x))


def main():
    out = sys.argv[1]
    rng = random.Random(7)
    words = set()
    while len(words) < NUM_WORDS:
        words.add("".join(rng.choice(SYLLABLES) for _ in range(rng.randint(1, 4))))
    words = sorted(words)
    tokens = []
    for w in words:
        tokens.extend([w] * rng.randint(1, 6))
    rng.shuffle(tokens)
    lines = [" ".join(tokens[i:i + 12]) for i in range(0, len(tokens), 12)]
    corpus = "\n".join(lines) + "\n"

    learn_bpe.max = smallest_pair_max
    merges = io.StringIO()
    learn_bpe.learn_bpe(io.StringIO(corpus), merges, NUM_MERGES)
    merges_text = merges.getvalue()

    bpe = apply_bpe.BPE(io.StringIO(merges_text))
    seg = [bpe.process_line(w) for w in words]

    with open(os.path.join(out, "toy_corpus.txt"), "w", encoding="utf-8") as f:
        f.write(corpus)
    with open(os.path.join(out, "toy_merges.txt"), "w", encoding="utf-8") as f:
        f.write(merges_text)
    with open(os.path.join(out, "toy_segmented.tsv"), "w", encoding="utf-8") as f:
        for w, s in zip(words, seg):
            f.write(f"{w}\t{s}\n")


if __name__ == "__main__":
    main()
