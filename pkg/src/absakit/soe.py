"""Build polarity-classification model inputs and parse generated labels.

Two input encodings are supported: a text-generation prompt
("Review: ... Aspect: ... Polarity:") and a sentence-pair encoding
("<text> [SEP] <term>"), each with an optional preprocessing mode that
keeps only the sentence containing the aspect term.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import AspectSpan, ParseError, Polarity, Review, ValidationError

PROMPT_PREFIX = "Review: "
PROMPT_MIDDLE = " Aspect: "
PROMPT_SUFFIX = " Polarity:"

DEFAULT_SEPARATOR = "[SEP]"

_SENTENCE_TERMINATORS = ".!?"

# Completions may come back in English or Portuguese; both are accepted.
DEFAULT_LABEL_WORDS: Mapping[Polarity, tuple[str, ...]] = {
    Polarity.POSITIVE: ("positive", "positivo", "positiva"),
    Polarity.NEGATIVE: ("negative", "negativo", "negativa"),
    Polarity.NEUTRAL: ("neutral", "neutro", "neutra"),
}


class ReviewMode(enum.Enum):
    FULL_REVIEW = "full"
    ASPECT_SENTENCE = "sentence"


@dataclass(frozen=True)
class SoeExample:
    review_id: int
    aspect_term: str
    start: int
    end: int
    input_text: str
    gold: Polarity | None = None


def sentence_ranges(text: str) -> list[tuple[int, int]]:
    """Split text into sentence (start, end) ranges.

    A sentence ends after '.', '!' or '?' followed by whitespace or the end
    of the text; leading whitespace is not part of any sentence. No
    abbreviation handling: the rule is deterministic and auditable.
    """
    ranges: list[tuple[int, int]] = []
    start = None
    for i, ch in enumerate(text):
        if start is None:
            if not ch.isspace():
                start = i
            continue
        if ch in _SENTENCE_TERMINATORS and (i + 1 == len(text) or text[i + 1].isspace()):
            ranges.append((start, i + 1))
            start = None
    if start is not None:
        ranges.append((start, len(text)))
    return ranges


def sentence_containing(text: str, pos: int) -> tuple[int, int]:
    ranges = sentence_ranges(text)
    if not ranges:
        raise ValidationError("cannot locate a sentence in empty text")
    for start, end in ranges:
        if start <= pos < end:
            return start, end
    # A position in inter-sentence whitespace attaches to the next sentence.
    for start, end in ranges:
        if pos < start:
            return start, end
    return ranges[-1]


def _input_span_text(review: Review, span: AspectSpan, mode: ReviewMode) -> str:
    if mode is ReviewMode.FULL_REVIEW:
        return review.text
    start, end = sentence_containing(review.text, span.start)
    return review.text[start:end]


def _review_id(review: Review) -> int:
    if not review.source_ids:
        raise ValidationError("review has no source ids to key examples by")
    return min(review.source_ids)


def build_prompt(review: Review, span: AspectSpan, mode: ReviewMode = ReviewMode.FULL_REVIEW) -> SoeExample:
    """Render the generation prompt for one (review, aspect) pair."""
    text = _input_span_text(review, span, mode)
    return SoeExample(
        review_id=_review_id(review),
        aspect_term=span.term,
        start=span.start,
        end=span.end,
        input_text=f"{PROMPT_PREFIX}{text}{PROMPT_MIDDLE}{span.term}{PROMPT_SUFFIX}",
        gold=span.polarity,
    )


def build_pair(
    review: Review,
    span: AspectSpan,
    mode: ReviewMode = ReviewMode.FULL_REVIEW,
    separator: str = DEFAULT_SEPARATOR,
) -> SoeExample:
    """Render the sentence-pair encoding for one (review, aspect) pair."""
    text = _input_span_text(review, span, mode)
    return SoeExample(
        review_id=_review_id(review),
        aspect_term=span.term,
        start=span.start,
        end=span.end,
        input_text=f"{text} {separator} {span.term}",
        gold=span.polarity,
    )


def build_examples(
    reviews: Iterable[Review],
    mode: ReviewMode = ReviewMode.FULL_REVIEW,
    style: str = "prompt",
    separator: str = DEFAULT_SEPARATOR,
) -> list[SoeExample]:
    builders = {
        "prompt": lambda r, s: build_prompt(r, s, mode),
        "pair": lambda r, s: build_pair(r, s, mode, separator),
    }
    if style not in builders:
        raise ValueError(f"unknown example style: {style}")
    return [builders[style](review, span) for review in reviews for span in review.spans]


def parse_prompt(input_text: str) -> tuple[str, str]:
    """Invert :func:`build_prompt`: recover (review text, aspect term)."""
    if not input_text.startswith(PROMPT_PREFIX) or not input_text.endswith(PROMPT_SUFFIX):
        raise ParseError(f"not a generation prompt: {input_text[:50]!r}")
    body = input_text[len(PROMPT_PREFIX):-len(PROMPT_SUFFIX)]
    text, sep, term = body.rpartition(PROMPT_MIDDLE)
    if not sep:
        raise ParseError(f"prompt has no aspect section: {input_text[:50]!r}")
    return text, term


def _label_pattern(label_words: Mapping[Polarity, tuple[str, ...]]) -> re.Pattern:
    alternatives = {
        polarity: "|".join(sorted(map(re.escape, words), key=len, reverse=True))
        for polarity, words in label_words.items()
    }
    groups = "|".join(f"(?P<{p.name}>{alt})" for p, alt in alternatives.items())
    return re.compile(rf"\b(?:{groups})\b", re.IGNORECASE)


_DEFAULT_PATTERN = _label_pattern(DEFAULT_LABEL_WORDS)


def parse_completion(
    generated: str, label_words: Mapping[Polarity, tuple[str, ...]] | None = None
) -> Polarity | None:
    """Map generated text to a polarity via the first label word found.

    Returns None (an abstention) when no label word occurs; downstream
    voting treats abstentions as missing votes rather than a default class.
    """
    pattern = _DEFAULT_PATTERN if label_words is None else _label_pattern(label_words)
    match = pattern.search(generated)
    if match is None:
        return None
    for polarity in Polarity:
        if match.group(polarity.name):
            return polarity
    return None


# ---------------------------------------------------------------------------
# JSON-lines export consumed by model adapters
# ---------------------------------------------------------------------------

def example_to_dict(example: SoeExample) -> dict:
    return {
        "review_id": example.review_id,
        "aspect_term": example.aspect_term,
        "start": example.start,
        "end": example.end,
        "input_text": example.input_text,
        "gold": example.gold.label if example.gold else None,
    }


def example_from_dict(data: dict) -> SoeExample:
    try:
        return SoeExample(
            review_id=int(data["review_id"]),
            aspect_term=data["aspect_term"],
            start=int(data["start"]),
            end=int(data["end"]),
            input_text=data["input_text"],
            gold=Polarity.from_label(data["gold"]) if data.get("gold") else None,
        )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed example object: {exc}") from None


def write_examples(
    examples: Iterable[SoeExample], path: str | Path, header: str | None = None
) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        if header:
            handle.write(f"# {header}\n")
        for example in examples:
            handle.write(json.dumps(example_to_dict(example), ensure_ascii=False) + "\n")


def read_examples(path: str | Path) -> list[SoeExample]:
    examples = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            examples.append(example_from_dict(json.loads(line)))
    return examples
