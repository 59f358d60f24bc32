"""Desk-scale baseline models so the pipeline runs end to end offline.

The tagger is a classic averaged perceptron with greedy left-to-right
decoding; the polarity classifier is multinomial naive Bayes over unigrams
with add-one smoothing. Neither aims at state-of-the-art accuracy; they
exist to produce real probability streams and label files for the
ensembling and evaluation machinery, deterministically for a given seed.
"""

from __future__ import annotations

import json
import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .corpus import Polarity, ValidationError
from .ensemble import AteModelPrediction, SoeModelPrediction, TokenProbs
from .soe import SoeExample
from .tagging import BIO_ORDER, TaggedSequence, Token

_START = "<s>"
_END = "</s>"

_TAGGER_FORMAT = "absakit-perceptron"
_BOW_FORMAT = "absakit-bow-polarity"
_FORMAT_VERSION = 1


def _token_features(words: list[str], i: int, prev_tag: str) -> list[str]:
    # Feature template: current/previous/next lowercased token, suffixes of
    # the current token up to length 3, previous predicted tag.
    word = words[i]
    features = [
        f"w={word}",
        f"prev={words[i - 1] if i > 0 else _START}",
        f"next={words[i + 1] if i + 1 < len(words) else _END}",
        f"ptag={prev_tag}",
    ]
    for n in (1, 2, 3):
        if len(word) >= n:
            features.append(f"suf{n}={word[-n:]}")
    return features


@dataclass
class PerceptronTagger:
    """Averaged perceptron over BIO tags with greedy decoding."""

    weights: dict[str, dict[str, float]] = field(default_factory=dict)

    def scores(self, features: Sequence[str]) -> list[float]:
        totals = [0.0] * len(BIO_ORDER)
        for feature in features:
            by_tag = self.weights.get(feature)
            if not by_tag:
                continue
            for j, tag in enumerate(BIO_ORDER):
                totals[j] += by_tag.get(tag.value, 0.0)
        return totals

    def to_json(self) -> dict:
        return {"format": _TAGGER_FORMAT, "version": _FORMAT_VERSION, "weights": self.weights}

    @classmethod
    def from_json(cls, data: dict) -> "PerceptronTagger":
        if data.get("format") != _TAGGER_FORMAT:
            raise ValidationError(f"not a {_TAGGER_FORMAT} model file")
        return cls(weights=data["weights"])


def train_tagger(train: Sequence[TaggedSequence], epochs: int, seed: int = 0) -> PerceptronTagger:
    """Train on gold tagged sequences; deterministic for a given seed."""
    if epochs < 1:
        raise ValidationError(f"epochs must be >= 1, got {epochs}")
    if not train:
        raise ValidationError("empty training set")

    weights: dict[str, dict[str, float]] = defaultdict(lambda: defaultdict(float))
    totals: dict[str, dict[str, float]] = defaultdict(lambda: defaultdict(float))
    stamps: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    step = 0

    def bump(feature: str, tag: str, delta: float) -> None:
        totals[feature][tag] += (step - stamps[feature][tag]) * weights[feature][tag]
        stamps[feature][tag] = step
        weights[feature][tag] += delta

    rng = random.Random(seed)
    order = list(range(len(train)))
    for _ in range(epochs):
        rng.shuffle(order)
        for index in order:
            seq = train[index]
            words = [t.text.lower() for t in seq.tokens]
            prev_tag = _START
            for i, gold in enumerate(seq.tags):
                step += 1
                features = _token_features(words, i, prev_tag)
                scores = [0.0] * len(BIO_ORDER)
                for feature in features:
                    by_tag = weights.get(feature)
                    if not by_tag:
                        continue
                    for j, tag in enumerate(BIO_ORDER):
                        scores[j] += by_tag.get(tag.value, 0.0)
                best = max(range(len(BIO_ORDER)), key=lambda j: (scores[j], -j))
                predicted = BIO_ORDER[best]
                if predicted is not gold:
                    for feature in features:
                        bump(feature, gold.value, +1.0)
                        bump(feature, predicted.value, -1.0)
                prev_tag = predicted.value

    averaged: dict[str, dict[str, float]] = {}
    for feature, by_tag in weights.items():
        row = {}
        for tag, weight in by_tag.items():
            total = totals[feature][tag] + (step - stamps[feature][tag]) * weight
            value = total / step
            if value:
                row[tag] = value
        if row:
            averaged[feature] = row
    return PerceptronTagger(weights=averaged)


def predict_tagger(model: PerceptronTagger, tokens: Sequence[Token]) -> list[list[float]]:
    """Per-token probability rows in BIO label order, softmax-normalized.

    The previous-tag feature follows the greedy argmax path, so the rows
    compose into a well-defined sequence distribution for ensembling.
    """
    words = [t.text.lower() for t in tokens]
    rows: list[list[float]] = []
    prev_tag = _START
    for i in range(len(words)):
        scores = model.scores(_token_features(words, i, prev_tag))
        peak = max(scores)
        exps = [math.exp(s - peak) for s in scores]
        total = sum(exps)
        rows.append([e / total for e in exps])
        best = max(range(len(BIO_ORDER)), key=lambda j: (scores[j], -j))
        prev_tag = BIO_ORDER[best].value
    return rows


def predict_tagger_corpus(
    model: PerceptronTagger, texts_by_key: dict[str, str], model_id: str
) -> AteModelPrediction:
    """Run the tagger over a corpus, producing the interchange structure."""
    from .tagging import tokenize

    prediction = AteModelPrediction(model_id=model_id)
    for key, text in texts_by_key.items():
        tokens = tokenize(text)
        prediction.reviews[key] = TokenProbs(
            offsets=[(t.start, t.end) for t in tokens],
            probs=predict_tagger(model, tokens),
        )
    return prediction


# ---------------------------------------------------------------------------
# Bag-of-words polarity classifier
# ---------------------------------------------------------------------------

def _bow_features(text: str) -> list[str]:
    from .tagging import tokenize

    return [t.text.lower() for t in tokenize(text) if any(c.isalnum() for c in t.text)]


@dataclass
class BowPolarityModel:
    """Multinomial naive Bayes with add-one smoothing over unigrams."""

    class_log_prior: dict[str, float]
    word_log_prob: dict[str, dict[str, float]]

    def predict(self, text: str) -> Polarity:
        scores = {}
        for label, prior in self.class_log_prior.items():
            score = prior
            for word in _bow_features(text):
                # Words never seen in training carry no signal for any class.
                log_prob = self.word_log_prob[label].get(word)
                if log_prob is not None:
                    score += log_prob
            scores[label] = score
        best = max(sorted(scores), key=lambda label: scores[label])
        return Polarity.from_label(best)

    def to_json(self) -> dict:
        return {
            "format": _BOW_FORMAT,
            "version": _FORMAT_VERSION,
            "class_log_prior": self.class_log_prior,
            "word_log_prob": self.word_log_prob,
        }

    @classmethod
    def from_json(cls, data: dict) -> "BowPolarityModel":
        if data.get("format") != _BOW_FORMAT:
            raise ValidationError(f"not a {_BOW_FORMAT} model file")
        return cls(class_log_prior=data["class_log_prior"], word_log_prob=data["word_log_prob"])


def train_soe(
    examples: Sequence[SoeExample], seed: int = 0, *, bootstrap: bool = False
) -> BowPolarityModel:
    """Fit the classifier on labeled examples.

    Plain training ignores the seed (counting is order-free); with
    ``bootstrap=True`` the training set is resampled with replacement
    first, which is how seed-diverse ensemble members are produced.
    """
    labeled = [e for e in examples if e.gold is not None]
    if not labeled:
        raise ValidationError("no labeled examples to train on")
    if bootstrap:
        rng = random.Random(seed)
        labeled = [labeled[rng.randrange(len(labeled))] for _ in range(len(labeled))]

    by_class: dict[str, Counter] = defaultdict(Counter)
    class_counts: Counter = Counter()
    for example in labeled:
        label = example.gold.label
        class_counts[label] += 1
        by_class[label].update(_bow_features(example.input_text))

    vocabulary = sorted({w for counter in by_class.values() for w in counter})
    total = sum(class_counts.values())
    class_log_prior = {
        label: math.log(count / total) for label, count in sorted(class_counts.items())
    }
    word_log_prob: dict[str, dict[str, float]] = {}
    for label in class_log_prior:
        counter = by_class[label]
        denominator = sum(counter.values()) + len(vocabulary)
        word_log_prob[label] = {
            word: math.log((counter[word] + 1) / denominator) for word in vocabulary
        }
    return BowPolarityModel(class_log_prior=class_log_prior, word_log_prob=word_log_prob)


def predict_soe(
    model: BowPolarityModel, examples: Sequence[SoeExample], model_id: str
) -> SoeModelPrediction:
    prediction = SoeModelPrediction(model_id=model_id)
    for example in examples:
        key = (example.review_id, example.aspect_term, example.start, example.end)
        prediction.labels[key] = model.predict(example.input_text)
    return prediction


# ---------------------------------------------------------------------------
# Model file serialization (versioned JSON)
# ---------------------------------------------------------------------------

def save_model(
    model: PerceptronTagger | BowPolarityModel, path: str | Path, header: str | None = None
) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        if header:
            handle.write(f"# {header}\n")
        json.dump(model.to_json(), handle, ensure_ascii=False)
        handle.write("\n")


def load_model(path: str | Path) -> PerceptronTagger | BowPolarityModel:
    with open(path, "r", encoding="utf-8") as handle:
        content = "".join(line for line in handle if not line.startswith("#"))
    data = json.loads(content)
    if data.get("format") == _TAGGER_FORMAT:
        return PerceptronTagger.from_json(data)
    if data.get("format") == _BOW_FORMAT:
        return BowPolarityModel.from_json(data)
    raise ValidationError(f"unrecognized model format in {path}")
