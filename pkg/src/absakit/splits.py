"""Leakage-free pseudo train/test splitting with three stratification modes.

All strategies keep whole reviews atomic and partition by unique review
text, so no sentence can appear on both sides. Results are deterministic
for a given corpus and spec, independent of input ordering.
"""

from __future__ import annotations

import enum
import logging
import random
from collections import Counter
from dataclasses import dataclass, field

from .corpus import Polarity, Review, ValidationError, normalize_term

logger = logging.getLogger(__name__)

# Preference order used to break polarity ties (most frequent class first).
_TIE_ORDER = (Polarity.POSITIVE, Polarity.NEGATIVE, Polarity.NEUTRAL)


class SplitStrategy(enum.Enum):
    RANDOM = "random"
    POLARITY_STRATIFIED = "polarity"
    POLARITY_AND_ASPECT_STRATIFIED = "polarity-aspect"


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    strategy: SplitStrategy = SplitStrategy.RANDOM
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 < self.train_fraction < 1.0):
            raise ValidationError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


@dataclass
class SplitResult:
    train: list[Review]
    test: list[Review]
    report: dict = field(default_factory=dict)


def dominant_polarity(review: Review) -> Polarity | None:
    """Majority polarity over a review's spans, ties broken toward the
    preference order; None when no span carries a polarity."""
    counts = Counter(s.polarity for s in review.spans if s.polarity is not None)
    if not counts:
        return None
    best = max(counts.values())
    for candidate in _TIE_ORDER:
        if counts.get(candidate) == best:
            return candidate
    return None


def split(corpus: list[Review], spec: SplitSpec) -> SplitResult:
    """Partition a grouped corpus into train/test per the given spec."""
    if not corpus:
        raise ValidationError("cannot split an empty corpus")
    texts = [r.text for r in corpus]
    if len(set(texts)) != len(texts):
        raise ValidationError("corpus has duplicate review texts; group it first")

    # Canonical base order, so the result is a function of (corpus, spec)
    # regardless of how the caller ordered the input.
    reviews = sorted(corpus, key=lambda r: r.text)
    rng = random.Random(spec.seed)

    if spec.strategy is SplitStrategy.RANDOM:
        train, test = _split_random(reviews, spec, rng)
    elif spec.strategy is SplitStrategy.POLARITY_STRATIFIED:
        train, test = _split_stratified(reviews, spec, rng, balance_aspects=False)
    elif spec.strategy is SplitStrategy.POLARITY_AND_ASPECT_STRATIFIED:
        train, test = _split_stratified(reviews, spec, rng, balance_aspects=True)
    else:
        raise ValueError(f"unknown strategy: {spec.strategy}")

    train.sort(key=lambda r: r.text)
    test.sort(key=lambda r: r.text)
    return SplitResult(train=train, test=test, report=_build_report(train, test, spec))


def _train_size(n: int, fraction: float) -> int:
    # floor(fraction * n); the epsilon keeps 0.3 * 10 from flooring to 2.
    return int(fraction * n + 1e-9)


def _split_random(
    reviews: list[Review], spec: SplitSpec, rng: random.Random
) -> tuple[list[Review], list[Review]]:
    shuffled = list(reviews)
    rng.shuffle(shuffled)
    cut = _train_size(len(shuffled), spec.train_fraction)
    return shuffled[:cut], shuffled[cut:]


def _strata(reviews: list[Review]) -> dict[Polarity | None, list[Review]]:
    strata: dict[Polarity | None, list[Review]] = {}
    for review in reviews:
        strata.setdefault(dominant_polarity(review), []).append(review)
    # Fixed iteration order: polarity preference order, unlabeled last.
    ordered: dict[Polarity | None, list[Review]] = {}
    for key in list(_TIE_ORDER) + [None]:
        if key in strata:
            ordered[key] = strata[key]
    return ordered


def _split_stratified(
    reviews: list[Review], spec: SplitSpec, rng: random.Random, balance_aspects: bool
) -> tuple[list[Review], list[Review]]:
    train: list[Review] = []
    test: list[Review] = []
    aspect_counts: dict[str, list[int]] = {}  # term -> [train, test] span counts

    for polarity, members in _strata(reviews).items():
        if len(members) < 2:
            label = polarity.label if polarity else "unlabeled"
            logger.warning(
                "stratum %r has %d review(s); assigning wholly to train", label, len(members)
            )
            train.extend(members)
            if balance_aspects:
                _tally(aspect_counts, members, side=0)
            continue
        target = _train_size(len(members), spec.train_fraction)
        if balance_aspects:
            _assign_greedy(members, target, spec.train_fraction, rng, train, test, aspect_counts)
        else:
            shuffled = list(members)
            rng.shuffle(shuffled)
            train.extend(shuffled[:target])
            test.extend(shuffled[target:])
    return train, test


def _tally(aspect_counts: dict[str, list[int]], reviews: list[Review], side: int) -> None:
    for review in reviews:
        for span in review.spans:
            aspect_counts.setdefault(normalize_term(span.term), [0, 0])[side] += 1


def _assign_greedy(
    members: list[Review],
    target: int,
    fraction: float,
    rng: random.Random,
    train: list[Review],
    test: list[Review],
    aspect_counts: dict[str, list[int]],
) -> None:
    """Greedy bin assignment: take reviews by descending aspect count and put
    each on the side that minimizes the aggregate L1 distance between the
    per-aspect train share and the target fraction."""
    shuffled = list(members)
    rng.shuffle(shuffled)  # seeded tie-break order under the stable sort below
    shuffled.sort(key=lambda r: -len(r.spans))

    n_train = n_test = 0
    capacity_test = len(members) - target
    for review in shuffled:
        if n_train >= target:
            choice = 1
        elif n_test >= capacity_test:
            choice = 0
        else:
            cost_train = _l1_after(aspect_counts, review, side=0, fraction=fraction)
            cost_test = _l1_after(aspect_counts, review, side=1, fraction=fraction)
            choice = 0 if cost_train <= cost_test else 1
        if choice == 0:
            train.append(review)
            n_train += 1
        else:
            test.append(review)
            n_test += 1
        _tally(aspect_counts, [review], side=choice)


def _l1_after(
    aspect_counts: dict[str, list[int]], review: Review, side: int, fraction: float
) -> float:
    delta: Counter = Counter()
    for span in review.spans:
        delta[normalize_term(span.term)] += 1
    terms = set(aspect_counts) | set(delta)
    cost = 0.0
    for term in terms:
        tr, te = aspect_counts.get(term, [0, 0])
        if side == 0:
            tr += delta.get(term, 0)
        else:
            te += delta.get(term, 0)
        total = tr + te
        if total:
            cost += abs(tr / total - fraction)
    return cost


def _build_report(train: list[Review], test: list[Review], spec: SplitSpec) -> dict:
    def polarity_counts(side: list[Review]) -> Counter:
        return Counter(
            (dominant_polarity(r).label if dominant_polarity(r) else "unlabeled") for r in side
        )

    train_pol = polarity_counts(train)
    test_pol = polarity_counts(test)
    polarity_shares = {}
    for label in sorted(set(train_pol) | set(test_pol)):
        n_train, n_test = train_pol.get(label, 0), test_pol.get(label, 0)
        polarity_shares[label] = {
            "train": n_train,
            "test": n_test,
            "train_share": n_train / (n_train + n_test),
        }

    term_counts: dict[str, list[int]] = {}
    _tally(term_counts, train, side=0)
    _tally(term_counts, test, side=1)
    aspect_shares = {
        term: {"train": tr, "test": te, "train_share": tr / (tr + te)}
        for term, (tr, te) in sorted(term_counts.items())
    }
    top_terms = sorted(term_counts, key=lambda t: -sum(term_counts[t]))[:15]
    slack = max(
        (abs(aspect_shares[t]["train_share"] - spec.train_fraction) for t in top_terms),
        default=0.0,
    )

    return {
        "strategy": spec.strategy.value,
        "seed": spec.seed,
        "train_fraction": spec.train_fraction,
        "train_size": len(train),
        "test_size": len(test),
        "polarity_shares": polarity_shares,
        "aspect_shares": aspect_shares,
        "top15_aspect_slack": slack,
    }
