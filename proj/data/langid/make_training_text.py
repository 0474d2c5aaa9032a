#!/usr/bin/env python3
"""Regenerates <lang>.txt training text from wordfreq frequency lists.

Each word appears round(freq * TOKENS) times; the multiset is shuffled with a
fixed seed and wrapped into lines. The character n-gram models only look
inside words, so word order carries no information for them.
"""
import random
import re
import sys
from pathlib import Path

import wordfreq

LANGS = ["es", "en", "pt", "ca", "fr", "it", "de"]
TOKENS = 40000
LETTERS = re.compile(r"^[^\W\d_]+(?:['’-][^\W\d_]+)*$")


def build(lang: str) -> str:
    words = []
    for word, freq in wordfreq.get_frequency_dict(lang).items():
        reps = round(freq * TOKENS)
        if reps == 0:
            break
        if LETTERS.match(word):
            words.extend([word] * reps)
    rng = random.Random(f"warcpipe-{lang}")
    rng.shuffle(words)
    return "\n".join(" ".join(words[i:i + 16]) for i in range(0, len(words), 16)) + "\n"


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent
    for lang in LANGS:
        (out / f"{lang}.txt").write_text(build(lang), encoding="utf-8")
    return 0


if __name__ == "__main__":
    sys.exit(main())
