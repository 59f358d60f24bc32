"""Token-classification inference emitting the toolkit's ATE interchange.

Subword probabilities are aggregated onto the toolkit's own word tokens by
character offsets, so the toolkit tokenizer stays the single source of
truth for alignment. Word tokens that no subword covers (truncation tail,
characters the model tokenizer drops) receive the uniform vector and a
warning record; reviews whose alignment fails entirely become error
records without aborting the run.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import torch

from absakit.corpus import Review
from absakit.ensemble import AteModelPrediction, TokenProbs, review_key
from absakit.tagging import tokenize

from .config import AdapterConfig
from .labels import BIO_STRINGS, bio_buckets

logger = logging.getLogger(__name__)

UNIFORM = [1.0 / 3.0] * 3


@dataclass
class AteRunReport:
    """Per-run notes: reviews that failed and tokens that fell back."""

    errors: list[dict] = field(default_factory=list)
    warnings: list[dict] = field(default_factory=list)


def load_token_classifier(config: AdapterConfig):
    from transformers import AutoModelForTokenClassification, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(config.model)
    model = AutoModelForTokenClassification.from_pretrained(config.model)
    model.to(config.device)
    model.eval()
    return model, tokenizer


def predict_ate(
    config: AdapterConfig, reviews: list[Review]
) -> tuple[AteModelPrediction, AteRunReport]:
    model, tokenizer = load_token_classifier(config)
    buckets = bio_buckets(
        {int(k): v for k, v in model.config.id2label.items()}, config.label_map
    )
    report = AteRunReport()
    prediction = AteModelPrediction(model_id=config.model_id)

    for start in range(0, len(reviews), config.batch_size):
        batch = reviews[start:start + config.batch_size]
        texts = [r.text for r in batch]
        encoded = tokenizer(
            texts,
            return_offsets_mapping=True,
            return_special_tokens_mask=True,
            truncation=True,
            max_length=config.max_length,
            padding=True,
            return_tensors="pt",
        )
        offset_mapping = encoded.pop("offset_mapping")
        special_mask = encoded.pop("special_tokens_mask")
        encoded = {k: v.to(config.device) for k, v in encoded.items()}
        with torch.no_grad():
            logits = model(**encoded).logits
        probs = torch.softmax(logits, dim=-1).cpu()

        for i, review in enumerate(batch):
            key = review_key(review.text)
            try:
                entry = _align_review(
                    review.text,
                    offset_mapping[i].tolist(),
                    special_mask[i].tolist(),
                    encoded["attention_mask"][i].cpu().tolist(),
                    probs[i],
                    buckets,
                    config.aggregation,
                    report,
                    key,
                )
            except Exception as exc:  # per-review failure, run continues
                logger.error("alignment failed for review %s: %s", key[:12], exc)
                report.errors.append({"review_key": key, "error": str(exc)})
                continue
            prediction.reviews[key] = entry
    return prediction, report


def _align_review(
    text: str,
    offsets: list[list[int]],
    special: list[int],
    attention: list[int],
    probs: torch.Tensor,
    buckets: list[int],
    aggregation: str,
    report: AteRunReport,
    key: str,
) -> TokenProbs:
    words = tokenize(text)
    subwords = [
        (offsets[j][0], offsets[j][1], j)
        for j in range(len(offsets))
        if attention[j] and not special[j] and offsets[j][1] > offsets[j][0]
    ]

    rows: list[list[float]] = []
    fell_back = 0
    for word in words:
        covering = [j for (s, e, j) in subwords if s < word.end and word.start < e]
        if not covering:
            rows.append(list(UNIFORM))
            fell_back += 1
            continue
        if aggregation == "first":
            vector = probs[covering[0]]
        else:
            vector = probs[covering].mean(dim=0)
        row = [0.0] * len(BIO_STRINGS)
        for model_index, value in enumerate(vector.tolist()):
            row[buckets[model_index]] += value
        rows.append(row)
    if fell_back:
        report.warnings.append(
            {
                "review_key": key,
                "uncovered_tokens": fell_back,
                "note": "uniform fallback (truncation or dropped characters)",
            }
        )
        logger.warning(
            "review %s: %d word token(s) not covered by subwords; using uniform rows",
            key[:12],
            fell_back,
        )
    return TokenProbs(offsets=[(w.start, w.end) for w in words], probs=rows)
