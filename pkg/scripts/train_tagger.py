#!/usr/bin/env python3
"""Regenerate the shipped POS model from the seed corpus.

Usage: python scripts/train_tagger.py [--iterations N] [--seed S]
"""

import argparse
from pathlib import Path

from cotagrank import tagger

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "cotagrank" / "data"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--iterations", type=int, default=12)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    sentences = tagger.read_tagged_file(DATA_DIR / "tagger_seed.txt")
    model = tagger.train(sentences, iterations=args.iterations, seed=args.seed)
    out = DATA_DIR / tagger.DEFAULT_MODEL
    model.save(out)

    correct = total = 0
    for sent in sentences:
        tags = model.tag([w for w, _ in sent])
        for (_, truth), guess in zip(sent, tags):
            correct += truth == guess
            total += 1
    print(f"wrote {out} ({out.stat().st_size} bytes), "
          f"training accuracy {correct / total:.3f}")


if __name__ == "__main__":
    main()
