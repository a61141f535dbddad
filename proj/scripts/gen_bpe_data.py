#!/usr/bin/env python3
"""Train the bundled byte-level BPE vocabulary (data/gpt2/).

Produces vocab.json and merges.txt in the GPT-2 tokenizer file format, so the
official GPT-2 files can be dropped in as replacements without code changes.
Training is deterministic: fixed seed corpus, greedy most-frequent-pair
merging, ties broken by lexicographically smallest pair.

Usage: scripts/gen_bpe_data.py [--merges N] [--out data/gpt2]
"""
import argparse
import collections
import hashlib
import json
import os

import regex

SPLIT_PATTERN = regex.compile(
    r"""'s|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+"""
)

SEED_DIRS = [
    "scripts/seed_corpus",
    "tests/fixtures/sol",
    "tests/fixtures/e2e/contracts",
]


def byte_to_unicode():
    bs = list(range(ord("!"), ord("~") + 1)) + \
         list(range(0xA1, 0xAC + 1)) + list(range(0xAE, 0xFF + 1))
    cs = bs[:]
    n = 0
    for b in range(256):
        if b not in bs:
            bs.append(b)
            cs.append(256 + n)
            n += 1
    return dict(zip(bs, (chr(c) for c in cs)))


def read_seed_text(root):
    chunks = []
    for d in SEED_DIRS:
        full = os.path.join(root, d)
        for name in sorted(os.listdir(full)):
            with open(os.path.join(full, name), encoding="utf-8") as f:
                chunks.append(f.read())
    return "\n".join(chunks)


def train(text, n_merges):
    b2u = byte_to_unicode()
    words = collections.Counter()
    for piece in SPLIT_PATTERN.findall(text):
        words[tuple(b2u[b] for b in piece.encode("utf-8"))] += 1

    merges = []
    words = dict(words)
    while len(merges) < n_merges:
        pairs = collections.Counter()
        for word, freq in words.items():
            for a, b in zip(word, word[1:]):
                pairs[(a, b)] += freq
        if not pairs:
            break
        best = min(pairs.items(), key=lambda kv: (-kv[1], kv[0]))
        if best[1] < 2:
            break
        (a, b), _ = best
        merges.append((a, b))
        merged = a + b
        new_words = {}
        for word, freq in words.items():
            out = []
            i = 0
            while i < len(word):
                if i + 1 < len(word) and word[i] == a and word[i + 1] == b:
                    out.append(merged)
                    i += 2
                else:
                    out.append(word[i])
                    i += 1
            new_words[tuple(out)] = new_words.get(tuple(out), 0) + freq
        words = new_words
    return merges, b2u


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--merges", type=int, default=4000)
    ap.add_argument("--out", default="data/gpt2")
    args = ap.parse_args()

    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    text = read_seed_text(root)
    merges, b2u = train(text, args.merges)

    vocab = {b2u[i]: i for i in range(256)}
    for a, b in merges:
        vocab[a + b] = len(vocab)
    vocab["<|endoftext|>"] = len(vocab)

    out_dir = os.path.join(root, args.out)
    os.makedirs(out_dir, exist_ok=True)
    vocab_path = os.path.join(out_dir, "vocab.json")
    merges_path = os.path.join(out_dir, "merges.txt")
    with open(vocab_path, "w", encoding="utf-8") as f:
        json.dump(vocab, f, ensure_ascii=False, separators=(",", ":"))
    with open(merges_path, "w", encoding="utf-8") as f:
        f.write("#version: 0.2\n")
        for a, b in merges:
            f.write(f"{a} {b}\n")

    with open(os.path.join(out_dir, "SHA256SUMS"), "w") as f:
        for p in (vocab_path, merges_path):
            digest = hashlib.sha256(open(p, "rb").read()).hexdigest()
            f.write(f"{digest}  {os.path.basename(p)}\n")

    print(f"trained {len(merges)} merges, vocab size {len(vocab)}")


if __name__ == "__main__":
    main()
