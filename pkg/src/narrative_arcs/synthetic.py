"""Seeded synthetic stories for benchmarks and end-to-end tests."""

from __future__ import annotations

import math

import numpy as np

from .scorers import resolve_lexicon

FILLER = (
    "the", "a", "she", "he", "they", "walked", "to", "house", "door", "road",
    "and", "then", "of", "river", "in", "morning", "looked", "at", "town", "was",
)


def synthetic_story(n_segments: int, seed: int = 0, words_per_segment: int = 12) -> str:
    """``n_segments`` sentences whose mood follows a slow sine plus noise.

    Sentiment words come from the bundled narrative lexicon, so every
    built-in scorer reacts to the underlying shape.
    """
    rng = np.random.default_rng(seed)
    lex = resolve_lexicon("narrative").entries
    pos = sorted(w for w, v in lex.items() if v > 0)
    neg = sorted(w for w, v in lex.items() if v < 0)
    lines = []
    for i in range(n_segments):
        mood = math.sin(3 * math.pi * i / max(1, n_segments - 1))
        words = []
        for _ in range(words_per_segment):
            r = rng.random()
            if r < 0.25:
                bucket = pos if rng.random() < 0.5 + 0.4 * mood else neg
                words.append(bucket[rng.integers(len(bucket))])
            elif r < 0.28:
                words.append("not")
            elif r < 0.30:
                words.append("very")
            else:
                words.append(FILLER[rng.integers(len(FILLER))])
        words[0] = words[0].capitalize()
        lines.append(" ".join(words) + ("!" if rng.random() < 0.05 else "."))
    # a paragraph break every 20 sentences
    return "\n\n".join(" ".join(lines[i : i + 20]) for i in range(0, len(lines), 20)) + "\n"
