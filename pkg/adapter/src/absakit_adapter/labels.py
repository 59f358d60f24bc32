"""Label-space bridges between model heads and toolkit polarities/tags.

The generated-text rule here intentionally duplicates the toolkit's
completion parser (same word lists, first occurrence wins) so the adapter
stays usable without importing toolkit internals beyond the public enum;
both sides are pinned by shared test vectors.
"""

from __future__ import annotations

import re

from absakit.corpus import Polarity

_WORDS = {
    Polarity.POSITIVE: ("positive", "positivo", "positiva"),
    Polarity.NEGATIVE: ("negative", "negativo", "negativa"),
    Polarity.NEUTRAL: ("neutral", "neutro", "neutra"),
}

_WORD_TO_POLARITY = {
    word: polarity for polarity, words in _WORDS.items() for word in words
}

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def parse_generated(text: str) -> Polarity | None:
    """First polarity word in the generated text, else None (abstain)."""
    for match in _TOKEN_RE.finditer(text):
        polarity = _WORD_TO_POLARITY.get(match.group().lower())
        if polarity is not None:
            return polarity
    return None


# Canonical BIO strings in the toolkit's probability-vector order.
BIO_STRINGS = ("O", "B-ASPECT", "I-ASPECT")


def bio_buckets(id2label: dict[int, str], label_map: dict[str, str] | None = None) -> list[int]:
    """Map each model label index to a toolkit BIO vector index.

    Explicit ``label_map`` entries win; otherwise "O" maps to O and any
    "B-*"/"I-*" prefix maps to B/I regardless of its entity class (one
    entity class exists downstream, so foreign classes marginalize into
    it). Labels that match nothing fold into O. A head whose labels are
    all unrecognized placeholders but number exactly three is read in
    canonical (O, B, I) order.
    """
    explicit = {k: v for k, v in (label_map or {}).items()}
    buckets: list[int] = []
    recognized = 0
    for index in sorted(id2label):
        label = id2label[index]
        target = explicit.get(label)
        if target is None:
            upper = label.upper()
            if upper == "O" or upper == "OUT" or upper == "OUTSIDE":
                target = "O"
            elif upper.startswith("B"):
                target = "B-ASPECT"
            elif upper.startswith("I"):
                target = "I-ASPECT"
        if target is None:
            buckets.append(0)
        else:
            buckets.append(BIO_STRINGS.index(target))
            recognized += 1
    if recognized == 0 and len(buckets) == len(BIO_STRINGS):
        return [0, 1, 2]
    return buckets


def polarity_of_class(label: str, label_map: dict[str, str] | None = None) -> Polarity | None:
    """Map a classification head label to a polarity, None when unmapped."""
    if label_map and label in label_map:
        return Polarity.from_label(label_map[label])
    lowered = label.lower()
    for polarity in Polarity:
        if polarity.label[:3] in lowered:
            return polarity
    return None
