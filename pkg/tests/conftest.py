"""Shared synthetic-data generators for the test suites."""

from __future__ import annotations

import random

from absakit.corpus import AspectSpan, Polarity, Review
from absakit.tagging import tokenize

WORDS = [
    "hotel", "piscina", "quarto", "cama", "limpo", "suja", "café", "praia",
    "ótimo", "ruim", "bom", "boa", "muito", "pouco", "vista", "mar",
    "atendimento", "recepção", "guarda-chuva", "wi-fi", "ar", "condicionado",
    "elevador", "estadia", "cheiro", "barulho", "rua", "jantar", "almoço",
]

PUNCT = list(".,!?;:")


def synth_review(rng: random.Random, review_id: int, max_tokens: int = 40) -> Review:
    """Random review with non-overlapping token-aligned aspect spans."""
    n = rng.randint(1, max_tokens)
    pieces = []
    for _ in range(n):
        pieces.append(rng.choice(PUNCT) if rng.random() < 0.15 else rng.choice(WORDS))
    text = ""
    for piece in pieces:
        if text:
            text += " " * rng.choice([1, 1, 1, 2])
        text += piece

    tokens = tokenize(text)
    spans: list[AspectSpan] = []
    used: set[int] = set()
    for _ in range(rng.randint(0, 4)):
        length = rng.randint(1, 3)
        i = rng.randrange(len(tokens))
        j = min(i + length - 1, len(tokens) - 1)
        if any(x in used for x in range(i, j + 1)):
            continue
        used.update(range(i, j + 1))
        start, end = tokens[i].start, tokens[j].end
        polarity = rng.choice(list(Polarity)) if rng.random() < 0.8 else None
        spans.append(AspectSpan(term=text[start:end], start=start, end=end, polarity=polarity))
    spans.sort(key=lambda s: (s.start, s.end))
    return Review(text=text, source_ids=[review_id], spans=spans)


def synth_corpus(rng: random.Random, size: int, max_tokens: int = 40) -> list[Review]:
    """Corpus of synthetic reviews with unique texts."""
    reviews: list[Review] = []
    seen: set[str] = set()
    next_id = 1
    while len(reviews) < size:
        review = synth_review(rng, next_id, max_tokens=max_tokens)
        if review.text in seen:
            continue
        seen.add(review.text)
        reviews.append(review)
        next_id += 1
    return reviews
