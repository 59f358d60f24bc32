"""Bundled synthetic hotel-review corpus for offline end-to-end runs.

Roughly sixty template-generated Portuguese reviews over eight aspect
terms (two of them multi-word) and three polarities. The real competition
data is not redistributable, so every end-to-end test and demo runs on
this corpus instead. Generation is a pure function of the seed; the
checked-in JSON file under ``data/`` matches the default parameters.
"""

from __future__ import annotations

import random
from importlib import resources
from pathlib import Path

from .corpus import Polarity, RawRow, Review, group_reviews, read_corpus

DEFAULT_SEED = 7
DEFAULT_SIZE = 60

# (term, grammatical gender); gender drives article/adjective agreement.
ASPECTS = [
    ("hotel", "m"),
    ("piscina", "f"),
    ("quarto", "m"),
    ("atendimento", "m"),
    ("localização", "f"),
    ("restaurante", "m"),
    ("ar condicionado", "m"),
    ("café da manhã", "m"),
]

_ART = {"m": "O", "f": "A"}
_ART_LOW = {"m": "o", "f": "a"}


def _adj(masculine: str, feminine: str) -> dict[str, str]:
    return {"m": masculine, "f": feminine}


_TEMPLATES: dict[Polarity, list] = {
    Polarity.POSITIVE: [
        lambda g: (f"{_ART[g]} ", " é excelente."),
        lambda g: (f"{_ART[g]} ", f" é {_adj('ótimo', 'ótima')[g]} e superou as expectativas."),
        lambda g: (f"Adorei {_ART_LOW[g]} ", ", recomendo a todos."),
        lambda g: (f"{_ART[g]} ", f" estava {_adj('maravilhoso', 'maravilhosa')[g]} durante a estadia."),
    ],
    Polarity.NEGATIVE: [
        lambda g: (f"{_ART[g]} ", f" é {_adj('péssimo', 'péssima')[g]}."),
        lambda g: (f"{_ART[g]} ", " deixou muito a desejar."),
        lambda g: (f"Detestei {_ART_LOW[g]} ", ", muito ruim mesmo."),
        lambda g: (f"{_ART[g]} ", f" estava {_adj('sujo', 'suja')[g]} e decepcionante."),
    ],
    Polarity.NEUTRAL: [
        lambda g: (f"{_ART[g]} ", " é comum."),
        lambda g: (f"{_ART[g]} ", " é razoável, nada de especial."),
        lambda g: (f"{_ART[g]} ", " atende, sem grandes surpresas."),
        lambda g: (f"Achei {_ART_LOW[g]} ", " simples, dentro do esperado."),
    ],
}

_POLARITY_WEIGHTS = [
    (Polarity.POSITIVE, 0.55),
    (Polarity.NEGATIVE, 0.25),
    (Polarity.NEUTRAL, 0.20),
]

_POLARITY_CODES = {Polarity.NEGATIVE: -1, Polarity.NEUTRAL: 0, Polarity.POSITIVE: 1}


def build_toy_corpus(seed: int = DEFAULT_SEED, size: int = DEFAULT_SIZE) -> list[Review]:
    """Generate the corpus: grouped reviews with validated spans."""
    rng = random.Random(seed)
    rows: list[RawRow] = []
    texts: set[str] = set()
    next_id = 1000
    attempts = 0
    while len(texts) < size and attempts < size * 50:
        attempts += 1
        n_sentences = rng.choice([1, 2, 2, 3])
        aspects = rng.sample(ASPECTS, n_sentences)
        text = ""
        spans: list[tuple[str, int, int, Polarity]] = []
        for term, gender in aspects:
            polarity = rng.choices(
                [p for p, _ in _POLARITY_WEIGHTS],
                weights=[w for _, w in _POLARITY_WEIGHTS],
            )[0]
            before, after = rng.choice(_TEMPLATES[polarity])(gender)
            if text:
                text += " "
            start = len(text) + len(before)
            text += before + term + after
            spans.append((term, start, start + len(term), polarity))
        if text in texts:
            continue
        texts.add(text)
        for term, start, end, polarity in spans:
            rows.append(
                RawRow(
                    id=next_id,
                    review=text,
                    polarity=_POLARITY_CODES[polarity],
                    aspect=term,
                    start_pos=start,
                    end_pos=end,
                )
            )
            next_id += 1
    return group_reviews(rows)


def toy_corpus_path() -> Path:
    """Location of the checked-in default corpus file."""
    return Path(str(resources.files("absakit").joinpath("data/toy_corpus.jsonl")))


def load_toy_corpus() -> list[Review]:
    return read_corpus(toy_corpus_path())
