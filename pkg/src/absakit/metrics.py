"""Evaluation metrics over label confusion matrices.

Conventions: macro averages run over classes with gold support only, 0/0
ratios evaluate to 0, and balanced accuracy is exactly the macro recall.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import Polarity, ValidationError
from .tagging import TaggedSequence, decode_bio, repair_bio

ABSTAIN_LABEL = "abstain"


@dataclass
class ConfusionMatrix:
    """Square count matrix; rows are gold labels, columns predicted."""

    labels: tuple[str, ...]
    counts: list[list[int]]

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def gold_support(self, label: str) -> int:
        return sum(self.counts[self.labels.index(label)])


@dataclass
class MetricsReport:
    accuracy: float
    balanced_accuracy: float
    precision_macro: float
    recall_macro: float
    f1_macro: float
    per_class: dict[str, dict[str, float]]
    # Span-level exact-match block, only filled by score_ate; kept apart from
    # the token-level numbers above and never mixed into them.
    span_exact: dict[str, float] | None = None

    def to_dict(self) -> dict:
        out = {
            "accuracy": self.accuracy,
            "balanced_accuracy": self.balanced_accuracy,
            "precision_macro": self.precision_macro,
            "recall_macro": self.recall_macro,
            "f1_macro": self.f1_macro,
            "per_class": self.per_class,
        }
        if self.span_exact is not None:
            out["span_exact"] = self.span_exact
        return out

    def to_csv_row(self) -> tuple[str, str]:
        """One header/value CSV row pair mirroring the experiment tables."""
        names = ["accuracy", "balanced_accuracy", "precision_macro", "recall_macro", "f1_macro"]
        values = [getattr(self, n) for n in names]
        for label in sorted(self.per_class):
            names.append(f"f1({label})")
            values.append(self.per_class[label]["f1"])
        return ",".join(names), ",".join(f"{v:.4f}" for v in values)


def confusion(
    gold: Sequence[str], pred: Sequence[str], labels: Sequence[str] | None = None
) -> ConfusionMatrix:
    """Tally gold/pred label pairs into a confusion matrix.

    ``labels`` declares the label set and its order; by default it is the
    sorted union of the labels seen in either sequence.
    """
    if len(gold) != len(pred):
        raise ValidationError(f"length mismatch: {len(gold)} gold vs {len(pred)} predicted")
    if labels is None:
        labels = sorted(set(gold) | set(pred))
    label_list = tuple(labels)
    index = {label: i for i, label in enumerate(label_list)}
    counts = [[0] * len(label_list) for _ in label_list]
    for g, p in zip(gold, pred):
        if g not in index:
            raise ValidationError(f"gold label {g!r} not in declared set {label_list}")
        if p not in index:
            raise ValidationError(f"predicted label {p!r} not in declared set {label_list}")
        counts[index[g]][index[p]] += 1
    return ConfusionMatrix(labels=label_list, counts=counts)


def report(cm: ConfusionMatrix) -> MetricsReport:
    """Derive accuracy, balanced accuracy, and per-class/macro P, R, F1."""
    total = cm.total
    if total == 0:
        raise ValidationError("cannot report metrics on an empty confusion matrix")

    n = len(cm.labels)
    per_class: dict[str, dict[str, float]] = {}
    scored = []
    for i, label in enumerate(cm.labels):
        tp = cm.counts[i][i]
        fn = sum(cm.counts[i]) - tp
        fp = sum(cm.counts[r][i] for r in range(n)) - tp
        precision = _safe_div(tp, tp + fp)
        recall = _safe_div(tp, tp + fn)
        f1 = _safe_div(2 * precision * recall, precision + recall)
        support = tp + fn
        per_class[label] = {
            "precision": precision,
            "recall": recall,
            "f1": f1,
            "support": support,
        }
        if support > 0:
            scored.append(label)

    if not scored:
        raise ValidationError("no class has gold support")
    precision_macro = sum(per_class[l]["precision"] for l in scored) / len(scored)
    recall_macro = sum(per_class[l]["recall"] for l in scored) / len(scored)
    f1_macro = sum(per_class[l]["f1"] for l in scored) / len(scored)
    accuracy = sum(cm.counts[i][i] for i in range(n)) / total

    return MetricsReport(
        accuracy=accuracy,
        balanced_accuracy=recall_macro,
        precision_macro=precision_macro,
        recall_macro=recall_macro,
        f1_macro=f1_macro,
        per_class=per_class,
    )


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def score_ate(
    gold: Sequence[TaggedSequence], pred: Sequence[TaggedSequence]
) -> MetricsReport:
    """Token-level BIO scoring plus a separate span exact-match block.

    Gold and predicted sequences must share the tokenization exactly
    (same reviews, same token offsets); any mismatch is an error.
    """
    if len(gold) != len(pred):
        raise ValidationError(f"{len(gold)} gold sequences vs {len(pred)} predicted")

    gold_flat: list[str] = []
    pred_flat: list[str] = []
    span_tp = span_fp = span_fn = 0
    for g, p in zip(gold, pred):
        g_offsets = [(t.start, t.end) for t in g.tokens]
        p_offsets = [(t.start, t.end) for t in p.tokens]
        if g_offsets != p_offsets:
            raise ValidationError(
                f"tokenization mismatch for review starting {g.text[:40]!r}"
            )
        gold_flat.extend(tag.value for tag in g.tags)
        pred_flat.extend(tag.value for tag in p.tags)

        gold_spans = {(s.start, s.end) for s in decode_bio(g)}
        pred_seq = TaggedSequence(p.text, p.tokens, repair_bio(p.tags))
        pred_spans = {(s.start, s.end) for s in decode_bio(pred_seq)}
        span_tp += len(gold_spans & pred_spans)
        span_fp += len(pred_spans - gold_spans)
        span_fn += len(gold_spans - pred_spans)

    from .tagging import BIO_ORDER

    cm = confusion(gold_flat, pred_flat, labels=[t.value for t in BIO_ORDER])
    result = report(cm)
    span_precision = _safe_div(span_tp, span_tp + span_fp)
    span_recall = _safe_div(span_tp, span_tp + span_fn)
    result.span_exact = {
        "precision": span_precision,
        "recall": span_recall,
        "f1": _safe_div(2 * span_precision * span_recall, span_precision + span_recall),
        "accuracy": _safe_div(span_tp, span_tp + span_fp + span_fn),
        "gold_spans": span_tp + span_fn,
        "predicted_spans": span_tp + span_fp,
    }
    return result


def score_soe(
    gold: Sequence[Polarity], pred: Sequence[Polarity | None]
) -> MetricsReport:
    """Polarity classification scoring; abstentions count as wrong.

    An abstaining prediction lands in a dedicated column that never has gold
    support, so it lowers accuracy and the gold class recall without adding
    a macro class of its own.
    """
    gold_labels = [p.label for p in gold]
    pred_labels = [p.label if p is not None else ABSTAIN_LABEL for p in pred]
    labels = sorted(set(gold_labels) | set(pred_labels))
    return report(confusion(gold_labels, pred_labels, labels=labels))


def write_report(result: MetricsReport, path: str | Path, header: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        if header:
            handle.write(f"# {header}\n")
        handle.write(json.dumps(result.to_dict(), ensure_ascii=False, indent=2) + "\n")
