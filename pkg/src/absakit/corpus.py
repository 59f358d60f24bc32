"""Data model and ingestion for the row-per-aspect review corpus format.

The input format is a delimited text file with one row per (review, aspect)
pair: id, review text, polarity code, aspect term, and character offsets of
the term inside the review. This module parses such files, groups rows that
share the same review text into single :class:`Review` records, computes
corpus statistics, and reads/writes the canonical corpus JSON-lines format.
"""

from __future__ import annotations

import csv
import enum
import json
import logging
import statistics
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

logger = logging.getLogger(__name__)

DEFAULT_COLUMNS = ("id", "review", "polarity", "aspect", "start_position", "end_position")


class CorpusError(Exception):
    """Base class for corpus-level failures."""


class ParseError(CorpusError):
    """A row could not be materialized from the delimited input."""


class ValidationError(CorpusError):
    """Data violates a corpus invariant (offsets, span/text agreement, overlap)."""


class Polarity(enum.Enum):
    NEGATIVE = "negative"
    NEUTRAL = "neutral"
    POSITIVE = "positive"

    @property
    def label(self) -> str:
        return self.value

    @classmethod
    def from_label(cls, label: str) -> "Polarity":
        try:
            return cls(label.strip().lower())
        except ValueError:
            raise ValidationError(f"unknown polarity label: {label!r}") from None


# Mapping between the integer codes stored in files and polarity labels.
# Only the positive code is evidenced by the source data format; the full
# map is configuration.
DEFAULT_POLARITY_CODES: Mapping[int, Polarity] = {
    -1: Polarity.NEGATIVE,
    0: Polarity.NEUTRAL,
    1: Polarity.POSITIVE,
}


def polarity_to_code(polarity: Polarity, code_map: Mapping[int, Polarity] = DEFAULT_POLARITY_CODES) -> int:
    for code, pol in code_map.items():
        if pol is polarity:
            return code
    raise ValidationError(f"polarity {polarity} has no code in the configured map")


@dataclass(frozen=True)
class RawRow:
    """One line of the input file: a single aspect occurrence in a review."""

    id: int
    review: str
    polarity: int | None
    aspect: str
    start_pos: int
    end_pos: int


@dataclass(frozen=True)
class AspectSpan:
    """A character-offset span of an aspect term, end-exclusive."""

    term: str
    start: int
    end: int
    polarity: Polarity | None = None

    def __post_init__(self) -> None:
        if not self.term.strip():
            raise ValidationError("aspect term must be non-empty")
        if not (0 <= self.start < self.end):
            raise ValidationError(
                f"invalid span offsets ({self.start}, {self.end}) for term {self.term!r}"
            )

    def overlaps(self, other: "AspectSpan") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass
class Review:
    """A unique review text with all of its aspect spans merged together."""

    text: str
    source_ids: list[int]
    spans: list[AspectSpan]

    def validate(self) -> None:
        """Raise :class:`ValidationError` on any invariant violation."""
        prev_end = -1
        for span in self.spans:
            if span.start < prev_end:
                raise ValidationError(
                    f"overlapping or unsorted spans in review (ids {self.source_ids})"
                )
            if span.end > len(self.text):
                raise ValidationError(
                    f"span ({span.start}, {span.end}) exceeds review length {len(self.text)}"
                )
            if not _matches_normalized(self.text[span.start:span.end], span.term):
                raise ValidationError(
                    f"review slice {self.text[span.start:span.end]!r} does not match "
                    f"term {span.term!r} (ids {self.source_ids})"
                )
            prev_end = span.end


@dataclass(frozen=True)
class CorpusStats:
    polarity_histogram: dict[Polarity | None, int]
    unique_aspect_count: int
    top_k_aspect_share: float
    aspects_per_review_mean: float
    aspects_per_review_std: float
    words_per_review_mean: float
    words_per_review_std: float

    def to_dict(self) -> dict:
        histogram = {
            (pol.label if pol is not None else "unlabeled"): count
            for pol, count in self.polarity_histogram.items()
        }
        return {
            "polarity_histogram": histogram,
            "unique_aspect_count": self.unique_aspect_count,
            "top_k_aspect_share": self.top_k_aspect_share,
            "aspects_per_review_mean": self.aspects_per_review_mean,
            "aspects_per_review_std": self.aspects_per_review_std,
            "words_per_review_mean": self.words_per_review_mean,
            "words_per_review_std": self.words_per_review_std,
        }


def _matches_normalized(text_slice: str, term: str) -> bool:
    # Tolerate casing noise and stray surrounding whitespace, nothing more.
    return text_slice.strip().casefold() == term.strip().casefold()


def normalize_term(term: str) -> str:
    """Canonical form used to count unique aspects and look up categories."""
    return term.strip().casefold()


def validate_row(row: RawRow) -> None:
    if not row.aspect.strip():
        raise ValidationError(f"row {row.id}: empty aspect term")
    if not (0 <= row.start_pos < row.end_pos <= len(row.review)):
        raise ValidationError(
            f"row {row.id}: offsets ({row.start_pos}, {row.end_pos}) invalid for "
            f"review of length {len(row.review)}"
        )
    if not _matches_normalized(row.review[row.start_pos:row.end_pos], row.aspect):
        raise ValidationError(
            f"row {row.id}: review slice {row.review[row.start_pos:row.end_pos]!r} "
            f"does not match aspect {row.aspect!r}"
        )


def parse_rows(
    source: str | Path | IO[str],
    *,
    delimiter: str = "\t",
    columns: Sequence[str] = DEFAULT_COLUMNS,
    end_offsets: str = "exclusive",
    on_error: str = "raise",
) -> list[RawRow]:
    """Parse a header-bearing delimited file into validated rows.

    Args:
        source: path to the file, or an open text stream.
        delimiter: field separator (tab by default, comma supported).
        columns: names of the (id, review, polarity, aspect, start, end)
            columns as they appear in the file header, in that order.
        end_offsets: "exclusive" (default) or "inclusive"; inclusive end
            offsets are converted on the way in.
        on_error: "raise" rejects the whole file on the first bad row,
            "skip" drops bad rows with a logged warning.

    Raises:
        ParseError: malformed row (missing column, non-integer field).
        ValidationError: offsets out of range or span/text mismatch.
    """
    if len(columns) != 6:
        raise ValueError("columns must name exactly 6 fields")
    if end_offsets not in ("exclusive", "inclusive"):
        raise ValueError(f"unknown end_offsets mode: {end_offsets}")
    if on_error not in ("raise", "skip"):
        raise ValueError(f"unknown on_error policy: {on_error}")

    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as handle:
            return parse_rows(
                handle,
                delimiter=delimiter,
                columns=columns,
                end_offsets=end_offsets,
                on_error=on_error,
            )

    id_col, review_col, polarity_col, aspect_col, start_col, end_col = columns
    reader = csv.DictReader(_skip_comments(source), delimiter=delimiter)
    if reader.fieldnames is None:
        raise ParseError("input has no header row")
    missing = [c for c in columns if c not in reader.fieldnames]
    if missing:
        raise ParseError(f"input header is missing columns: {missing}")

    rows: list[RawRow] = []
    for line_no, record in enumerate(reader, start=2):
        try:
            raw_polarity = (record.get(polarity_col) or "").strip()
            row = RawRow(
                id=_parse_int(record[id_col], "id", line_no),
                review=record[review_col],
                polarity=_parse_int(raw_polarity, "polarity", line_no) if raw_polarity else None,
                aspect=record[aspect_col],
                start_pos=_parse_int(record[start_col], "start", line_no),
                end_pos=_parse_int(record[end_col], "end", line_no),
            )
            if end_offsets == "inclusive":
                row = RawRow(row.id, row.review, row.polarity, row.aspect, row.start_pos, row.end_pos + 1)
            if row.review is None or row.aspect is None:
                raise ParseError(f"line {line_no}: missing review or aspect field")
            validate_row(row)
        except CorpusError as exc:
            if on_error == "raise":
                raise
            logger.warning("skipping bad row: %s", exc)
            continue
        rows.append(row)
    return rows


def _parse_int(value: str | None, name: str, line_no: int) -> int:
    if value is None:
        raise ParseError(f"line {line_no}: missing {name} column value")
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ParseError(f"line {line_no}: non-integer {name}: {value!r}") from None


def _skip_comments(stream: Iterable[str]) -> Iterable[str]:
    return (line for line in stream if not line.startswith("#"))


def group_reviews(
    rows: Sequence[RawRow],
    *,
    code_map: Mapping[int, Polarity] = DEFAULT_POLARITY_CODES,
    overlap_policy: str = "reject",
) -> list[Review]:
    """Group validated rows into one :class:`Review` per distinct review text.

    Exactly duplicated (start, end, aspect) rows are deduplicated; duplicates
    that disagree only on polarity keep the first occurrence with a warning.
    Overlapping spans are rejected by default; ``overlap_policy="keep-longer"``
    keeps the longer span of each overlapping pair instead.
    """
    if overlap_policy not in ("reject", "keep-longer"):
        raise ValueError(f"unknown overlap policy: {overlap_policy}")

    grouped: dict[str, dict] = {}
    for row in rows:
        entry = grouped.setdefault(row.review, {"ids": [], "spans": {}})
        entry["ids"].append(row.id)
        key = (row.start_pos, row.end_pos, row.aspect)
        polarity = None
        if row.polarity is not None:
            if row.polarity not in code_map:
                raise ValidationError(f"row {row.id}: polarity code {row.polarity} not in code map")
            polarity = code_map[row.polarity]
        if key in entry["spans"]:
            kept = entry["spans"][key]
            if kept.polarity is not polarity:
                logger.warning(
                    "row %d: duplicate span %r with conflicting polarity, keeping first",
                    row.id,
                    row.aspect,
                )
            continue
        entry["spans"][key] = AspectSpan(
            term=row.aspect, start=row.start_pos, end=row.end_pos, polarity=polarity
        )

    reviews = []
    for text, entry in grouped.items():
        spans = sorted(entry["spans"].values(), key=lambda s: (s.start, s.end))
        spans = _resolve_overlaps(spans, entry["ids"], overlap_policy)
        review = Review(text=text, source_ids=sorted(set(entry["ids"])), spans=spans)
        review.validate()
        reviews.append(review)
    return reviews


def _resolve_overlaps(
    spans: list[AspectSpan], ids: list[int], policy: str
) -> list[AspectSpan]:
    resolved: list[AspectSpan] = []
    for span in spans:
        if resolved and resolved[-1].overlaps(span):
            if policy == "reject":
                raise ValidationError(
                    f"overlapping spans {resolved[-1].term!r} and {span.term!r} "
                    f"in review (ids {sorted(set(ids))})"
                )
            longer = max(resolved[-1], span, key=lambda s: s.end - s.start)
            logger.warning(
                "dropping overlapped span, keeping longer %r (ids %s)",
                longer.term,
                sorted(set(ids)),
            )
            resolved[-1] = longer
            continue
        resolved.append(span)
    return resolved


def to_rows(reviews: Iterable[Review]) -> list[tuple[str, str, int, int, Polarity | None]]:
    """Re-expand grouped reviews into (text, term, start, end, polarity) tuples."""
    out = []
    for review in reviews:
        for span in review.spans:
            out.append((review.text, span.term, span.start, span.end, span.polarity))
    return out


def compute_stats(reviews: Sequence[Review], top_k: int = 15) -> CorpusStats:
    """Compute the dataset statistics over a grouped corpus.

    Polarity counts are per span (one per original row); aspect and word
    moments are per review, with population standard deviations. Word counts
    use the toolkit tokenizer and keep only tokens containing a letter or
    digit.
    """
    if not reviews:
        raise ValidationError("cannot compute statistics over an empty corpus")
    if top_k < 1:
        raise ValueError("top_k must be >= 1")

    from . import tagging  # deferred: tagging imports this module's types

    polarity_histogram: Counter = Counter()
    term_counts: Counter = Counter()
    aspects_per_review = []
    words_per_review = []
    for review in reviews:
        aspects_per_review.append(len(review.spans))
        tokens = tagging.tokenize(review.text)
        words_per_review.append(sum(1 for t in tokens if any(c.isalnum() for c in t.text)))
        for span in review.spans:
            polarity_histogram[span.polarity] += 1
            term_counts[normalize_term(span.term)] += 1

    total_rows = sum(term_counts.values())
    top = term_counts.most_common(top_k)
    top_share = sum(count for _, count in top) / total_rows if total_rows else 0.0

    return CorpusStats(
        polarity_histogram=dict(polarity_histogram),
        unique_aspect_count=len(term_counts),
        top_k_aspect_share=top_share,
        aspects_per_review_mean=statistics.fmean(aspects_per_review),
        aspects_per_review_std=statistics.pstdev(aspects_per_review),
        words_per_review_mean=statistics.fmean(words_per_review),
        words_per_review_std=statistics.pstdev(words_per_review),
    )


# ---------------------------------------------------------------------------
# Canonical corpus JSON (one review object per line)
# ---------------------------------------------------------------------------

def review_to_dict(review: Review) -> dict:
    return {
        "text": review.text,
        "source_ids": list(review.source_ids),
        "spans": [
            {
                "term": span.term,
                "start": span.start,
                "end": span.end,
                "polarity": span.polarity.label if span.polarity else None,
            }
            for span in review.spans
        ],
    }


def review_from_dict(data: dict) -> Review:
    try:
        spans = [
            AspectSpan(
                term=item["term"],
                start=int(item["start"]),
                end=int(item["end"]),
                polarity=Polarity.from_label(item["polarity"]) if item.get("polarity") else None,
            )
            for item in data["spans"]
        ]
        review = Review(
            text=data["text"],
            source_ids=[int(i) for i in data["source_ids"]],
            spans=sorted(spans, key=lambda s: (s.start, s.end)),
        )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed review object: {exc}") from None
    review.validate()
    return review


def write_corpus(reviews: Iterable[Review], path: str | Path, header: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        if header:
            handle.write(f"# {header}\n")
        for review in reviews:
            handle.write(json.dumps(review_to_dict(review), ensure_ascii=False) + "\n")


def read_corpus(path: str | Path) -> list[Review]:
    reviews = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            reviews.append(review_from_dict(json.loads(line)))
    return reviews


def validate_corpus_file(path: str | Path) -> list[str]:
    """Collect every schema or invariant problem in a corpus JSON file."""
    problems = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                review_from_dict(json.loads(line))
            except (json.JSONDecodeError, CorpusError) as exc:
                problems.append(f"line {line_no}: {exc}")
    return problems
