"""Offset-preserving word tokenization and the span <-> BIO tag codec.

Tokens are maximal runs of letters/digits; every other non-whitespace
character (hyphens, punctuation) is a single-character token. Offsets are
0-based, end-exclusive, counted in Unicode scalar values, so slicing the
review at a token's offsets always reproduces its surface form.
"""

from __future__ import annotations

import enum
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

from .corpus import AspectSpan, Review, ValidationError

logger = logging.getLogger(__name__)

# Alphanumeric runs first; any other single non-space character second.
_TOKEN_RE = re.compile(r"[^\W_]+|\S", re.UNICODE)


class BioTag(enum.Enum):
    O = "O"
    B_ASPECT = "B-ASPECT"
    I_ASPECT = "I-ASPECT"

    @classmethod
    def from_string(cls, value: str) -> "BioTag":
        try:
            return cls(value)
        except ValueError:
            raise ValidationError(f"unknown BIO tag: {value!r}") from None


# Canonical label order; probability vectors are indexed in this order
# everywhere in the toolkit.
BIO_ORDER: tuple[BioTag, BioTag, BioTag] = (BioTag.O, BioTag.B_ASPECT, BioTag.I_ASPECT)


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int


@dataclass
class TaggedSequence:
    """Tokens of one review with one BIO tag per token."""

    text: str
    tokens: list[Token]
    tags: list[BioTag]

    def __post_init__(self) -> None:
        if len(self.tokens) != len(self.tags):
            raise ValidationError(
                f"{len(self.tokens)} tokens but {len(self.tags)} tags"
            )

    def is_well_formed(self) -> bool:
        """True when every I-ASPECT continues a preceding B/I-ASPECT."""
        prev = BioTag.O
        for tag in self.tags:
            if tag is BioTag.I_ASPECT and prev is BioTag.O:
                return False
            prev = tag
        return True


def tokenize(text: str) -> list[Token]:
    """Deterministic segmentation into word and punctuation tokens.

    >>> [t.text for t in tokenize("Hospedei-me no hotel.")]
    ['Hospedei', '-', 'me', 'no', 'hotel', '.']
    """
    return [Token(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def encode_bio(
    review: Review,
    tokens: Sequence[Token] | None = None,
    *,
    on_misaligned: str = "warn",
) -> TaggedSequence:
    """Tag each token of a review by intersection with its aspect spans.

    The first token intersecting a span gets B-ASPECT, later intersecting
    tokens get I-ASPECT, everything else O. A span boundary that falls
    strictly inside a token tags the whole token and warns by default;
    ``on_misaligned="error"`` raises instead.
    """
    if on_misaligned not in ("warn", "error"):
        raise ValueError(f"unknown misalignment policy: {on_misaligned}")
    token_list = list(tokens) if tokens is not None else tokenize(review.text)

    tags = [BioTag.O] * len(token_list)
    for span in review.spans:
        first = True
        for i, token in enumerate(token_list):
            if token.start < span.end and span.start < token.end:
                if token.start < span.start or span.end < token.end:
                    message = (
                        f"span {span.term!r} ({span.start}, {span.end}) cuts through "
                        f"token {token.text!r} ({token.start}, {token.end})"
                    )
                    if on_misaligned == "error":
                        raise ValidationError(message)
                    logger.warning("%s; tagging the whole token", message)
                tags[i] = BioTag.B_ASPECT if first else BioTag.I_ASPECT
                first = False
    return TaggedSequence(text=review.text, tokens=token_list, tags=tags)


def decode_bio(seq: TaggedSequence) -> list[AspectSpan]:
    """Turn each maximal B(I)* run back into an aspect span.

    The span term is the exact review substring between the first and last
    token of the run, so inner whitespace and punctuation survive the round
    trip. Tags are expected to be well-formed (see :func:`repair_bio`).
    """
    spans: list[AspectSpan] = []
    run_start: int | None = None
    run_end = 0
    for token, tag in zip(seq.tokens, seq.tags):
        if tag is BioTag.B_ASPECT:
            if run_start is not None:
                spans.append(_span_from_run(seq.text, run_start, run_end))
            run_start, run_end = token.start, token.end
        elif tag is BioTag.I_ASPECT and run_start is not None:
            run_end = token.end
        else:
            if run_start is not None:
                spans.append(_span_from_run(seq.text, run_start, run_end))
                run_start = None
    if run_start is not None:
        spans.append(_span_from_run(seq.text, run_start, run_end))
    return spans


def _span_from_run(text: str, start: int, end: int) -> AspectSpan:
    return AspectSpan(term=text[start:end], start=start, end=end)


def repair_bio(tags: Sequence[BioTag]) -> list[BioTag]:
    """Rewrite every I-ASPECT that does not continue a chunk into B-ASPECT."""
    repaired: list[BioTag] = []
    prev = BioTag.O
    for tag in tags:
        if tag is BioTag.I_ASPECT and prev is BioTag.O:
            tag = BioTag.B_ASPECT
        repaired.append(tag)
        prev = tag
    return repaired


# ---------------------------------------------------------------------------
# CoNLL-style tagged file export: "token<TAB>tag", blank line between reviews
# ---------------------------------------------------------------------------

def write_conll(
    sequences: Iterable[TaggedSequence], target: str | Path | IO[str], header: str | None = None
) -> None:
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as handle:
            write_conll(sequences, handle, header=header)
        return
    if header:
        target.write(f"# {header}\n")
    for seq in sequences:
        for token, tag in zip(seq.tokens, seq.tags):
            target.write(f"{token.text}\t{tag.value}\n")
        target.write("\n")


def read_conll(source: str | Path | IO[str]) -> list[TaggedSequence]:
    """Read a CoNLL-style tagged file back into sequences.

    The file format does not carry character offsets, so tokens are laid out
    with single spaces; this is stable across write/read and sufficient for
    evaluation alignment.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as handle:
            return read_conll(handle)

    sequences: list[TaggedSequence] = []
    words: list[str] = []
    tags: list[BioTag] = []

    def flush() -> None:
        if not words:
            return
        tokens = []
        cursor = 0
        for word in words:
            tokens.append(Token(word, cursor, cursor + len(word)))
            cursor += len(word) + 1
        text = " ".join(words)
        sequences.append(TaggedSequence(text=text, tokens=tokens, tags=list(tags)))
        words.clear()
        tags.clear()

    for line in source:
        line = line.rstrip("\n")
        if line.startswith("#"):
            continue
        if not line.strip():
            flush()
            continue
        try:
            word, tag = line.split("\t")
        except ValueError:
            raise ValidationError(f"malformed tagged line: {line!r}") from None
        words.append(word)
        tags.append(BioTag.from_string(tag))
    flush()
    return sequences
