"""Combine predictions from several models.

Token tagging models are fused by taking, per token and per label, the
median of the predicted probabilities across models, then arg-maxing and
repairing the tag sequence. Polarity classifiers are fused by majority
vote with a configurable tie-break order; abstentions never count as
votes.

Interchange file formats (JSON lines, one model per file):
  token probabilities: {model_id, review_key, tokens: [{start, end}, ...],
                        probs: [[pO, pB, pI], ...]}
  polarity labels:     {model_id, review_id, aspect_term, start, end, label}

``review_key`` is the SHA-256 hex digest of the review text, used to join
prediction files against a corpus without embedding the text itself.
"""

from __future__ import annotations

import hashlib
import json
import logging
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Polarity, ValidationError
from .tagging import BIO_ORDER, TaggedSequence, Token, repair_bio, tokenize

logger = logging.getLogger(__name__)

PROB_SUM_TOLERANCE = 1e-4

# Default vote tie-break: most frequent class first.
DEFAULT_TIE_BREAK = (Polarity.POSITIVE, Polarity.NEGATIVE, Polarity.NEUTRAL)

SoeKey = tuple[int, str, int, int]  # (review_id, aspect_term, start, end)


def review_key(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class TokenProbs:
    """Per-token label probability rows for one review, in BIO label order."""

    offsets: list[tuple[int, int]]
    probs: list[list[float]]

    def __post_init__(self) -> None:
        if len(self.offsets) != len(self.probs):
            raise ValidationError(
                f"{len(self.offsets)} token offsets but {len(self.probs)} probability rows"
            )


@dataclass
class AteModelPrediction:
    model_id: str
    reviews: dict[str, TokenProbs] = field(default_factory=dict)


@dataclass
class SoeModelPrediction:
    model_id: str
    labels: dict[SoeKey, Polarity | None] = field(default_factory=dict)


def validate_ate_prediction(
    pred: AteModelPrediction, texts: Mapping[str, str] | None = None
) -> list[str]:
    """Check probability rows and, when texts are given, token alignment.

    Returns a list of human-readable problems; empty means valid.
    """
    problems: list[str] = []
    for key, entry in pred.reviews.items():
        for row_no, row in enumerate(entry.probs):
            if len(row) != len(BIO_ORDER):
                problems.append(
                    f"{pred.model_id}/{key[:12]}: row {row_no} has {len(row)} entries"
                )
                continue
            if any(not (0.0 <= p <= 1.0) for p in row):
                problems.append(f"{pred.model_id}/{key[:12]}: row {row_no} out of [0,1]")
            if abs(sum(row) - 1.0) > PROB_SUM_TOLERANCE:
                problems.append(
                    f"{pred.model_id}/{key[:12]}: row {row_no} sums to {sum(row):.6f}"
                )
        if texts is not None:
            if key not in texts:
                problems.append(f"{pred.model_id}/{key[:12]}: review key not in corpus")
                continue
            expected = [(t.start, t.end) for t in tokenize(texts[key])]
            if entry.offsets != expected:
                problems.append(
                    f"{pred.model_id}/{key[:12]}: token offsets disagree with the "
                    f"canonical tokenization ({len(entry.offsets)} vs {len(expected)} tokens)"
                )
    return problems


def median_ensemble(
    preds: Sequence[AteModelPrediction], texts: Mapping[str, str]
) -> dict[str, TaggedSequence]:
    """Median-of-probabilities fusion, one tagged sequence per review.

    All models must cover the same reviews with the same token counts. The
    per-label medians are not renormalized; only their argmax is used, with
    ties broken by the canonical label order.
    """
    if not preds:
        raise ValidationError("median ensemble needs at least one model")
    key_sets = [set(p.reviews) for p in preds]
    if any(ks != key_sets[0] for ks in key_sets[1:]):
        names = ", ".join(p.model_id for p in preds)
        raise ValidationError(f"models cover different review sets: {names}")

    fused: dict[str, TaggedSequence] = {}
    for key in sorted(key_sets[0]):
        if key not in texts:
            raise ValidationError(f"review key {key[:12]} missing from the corpus")
        entries = [p.reviews[key] for p in preds]
        counts = {len(e.probs) for e in entries}
        if len(counts) != 1:
            names = ", ".join(f"{p.model_id}={len(p.reviews[key].probs)}" for p in preds)
            raise ValidationError(f"token count mismatch on review {key[:12]}: {names}")
        if any(e.offsets != entries[0].offsets for e in entries[1:]):
            names = ", ".join(p.model_id for p in preds)
            raise ValidationError(f"token offsets disagree on review {key[:12]}: {names}")

        text = texts[key]
        offsets = entries[0].offsets
        tags = []
        for t in range(len(offsets)):
            medians = [
                statistics.median(entry.probs[t][lab] for entry in entries)
                for lab in range(len(BIO_ORDER))
            ]
            best = max(range(len(BIO_ORDER)), key=lambda lab: (medians[lab], -lab))
            tags.append(BIO_ORDER[best])
        tokens = [Token(text[s:e], s, e) for s, e in offsets]
        fused[key] = TaggedSequence(text=text, tokens=tokens, tags=repair_bio(tags))
    return fused


def majority_vote(
    preds: Sequence[SoeModelPrediction],
    tie_break: Sequence[Polarity] = DEFAULT_TIE_BREAK,
) -> dict[SoeKey, Polarity | None]:
    """Modal label per (review, aspect) among non-abstaining models.

    Ties take the first tied label in ``tie_break`` order; a key on which
    every model abstains (or that only some models cover, all abstaining)
    stays an abstention and is reported upstream.
    """
    if not preds:
        raise ValidationError("majority vote needs at least one model")
    if set(tie_break) != set(Polarity):
        raise ValidationError("tie_break order must rank every polarity exactly once")

    keys = sorted({k for p in preds for k in p.labels})
    fused: dict[SoeKey, Polarity | None] = {}
    for key in keys:
        votes = [p.labels[key] for p in preds if key in p.labels and p.labels[key] is not None]
        if not votes:
            logger.warning("all models abstained on %s; emitting abstention", key)
            fused[key] = None
            continue
        counts: dict[Polarity, int] = {}
        for vote in votes:
            counts[vote] = counts.get(vote, 0) + 1
        best = max(counts.values())
        fused[key] = next(p for p in tie_break if counts.get(p) == best)
    return fused


# ---------------------------------------------------------------------------
# Interchange file I/O
# ---------------------------------------------------------------------------

def write_ate_predictions(
    pred: AteModelPrediction, path: str | Path, header: str | None = None
) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        if header:
            handle.write(f"# {header}\n")
        for key in sorted(pred.reviews):
            entry = pred.reviews[key]
            record = {
                "model_id": pred.model_id,
                "review_key": key,
                "tokens": [{"start": s, "end": e} for s, e in entry.offsets],
                "probs": entry.probs,
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_ate_predictions(path: str | Path) -> list[AteModelPrediction]:
    """Read a token-probability interchange file, grouped by model id."""
    models: dict[str, AteModelPrediction] = {}
    for line_no, record in _iter_records(path):
        try:
            model = models.setdefault(
                record["model_id"], AteModelPrediction(model_id=record["model_id"])
            )
            key = record["review_key"]
            if key in model.reviews:
                raise ValidationError(
                    f"{path}: line {line_no}: duplicate review {key[:12]} for model "
                    f"{record['model_id']}"
                )
            model.reviews[key] = TokenProbs(
                offsets=[(int(t["start"]), int(t["end"])) for t in record["tokens"]],
                probs=[[float(p) for p in row] for row in record["probs"]],
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"{path}: line {line_no}: malformed record: {exc}") from None
    return list(models.values())


def write_soe_predictions(
    pred: SoeModelPrediction, path: str | Path, header: str | None = None
) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        if header:
            handle.write(f"# {header}\n")
        for key in sorted(pred.labels, key=lambda k: (k[0], k[2], k[3], k[1])):
            review_id, term, start, end = key
            label = pred.labels[key]
            record = {
                "model_id": pred.model_id,
                "review_id": review_id,
                "aspect_term": term,
                "start": start,
                "end": end,
                "label": label.label if label is not None else "abstain",
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_soe_predictions(path: str | Path) -> list[SoeModelPrediction]:
    """Read a polarity-label interchange file, grouped by model id."""
    models: dict[str, SoeModelPrediction] = {}
    for line_no, record in _iter_records(path):
        try:
            model = models.setdefault(
                record["model_id"], SoeModelPrediction(model_id=record["model_id"])
            )
            key: SoeKey = (
                int(record["review_id"]),
                record["aspect_term"],
                int(record["start"]),
                int(record["end"]),
            )
            if key in model.labels:
                raise ValidationError(
                    f"{path}: line {line_no}: duplicate prediction for {key} by model "
                    f"{record['model_id']}"
                )
            raw = record["label"]
            model.labels[key] = None if raw == "abstain" else Polarity.from_label(raw)
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"{path}: line {line_no}: malformed record: {exc}") from None
    return list(models.values())


def _iter_records(path: str | Path) -> Iterable[tuple[int, dict]]:
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                yield line_no, json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}: line {line_no}: invalid JSON: {exc}") from None
