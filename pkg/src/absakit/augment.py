"""Target-swap data augmentation with inferred aspect categories.

Categories are approximated by clustering aspect terms on their lexical
contexts: each term gets a count vector of the words appearing within a
window around its occurrences (stop-words removed), vectors are
L2-normalized, and a seeded k-means partitions the vocabulary. Swapping
then replaces an aspect term with another term of the same category,
shifting every later span offset by the length difference.

User-supplied category files override inference; grammatical agreement
after a swap is intentionally not corrected.
"""

from __future__ import annotations

import json
import logging
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import AspectSpan, Review, ValidationError, normalize_term
from .tagging import tokenize

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 5
DEFAULT_K = 10

# Compact Portuguese function-word list; enough to keep context vectors
# topical without pulling in a lexicon dependency.
PT_STOPWORDS = frozenset(
    """
    a à ao aos as às com como da das de do dos e é em era foi há isso já la lá
    mais mas me mesmo meu minha muito na não nas nem no nos nós o os ou para
    pela pelo por qual quando que se sem ser seu sua são só também te tem teve
    tinha tive tudo um uma você vocês
    """.split()
)


@dataclass
class AspectCategoryMap:
    """Partition of the aspect vocabulary into named categories."""

    categories: dict[str, tuple[str, ...]]

    def __post_init__(self) -> None:
        seen: dict[str, str] = {}
        for category, terms in self.categories.items():
            for term in terms:
                if term in seen:
                    raise ValidationError(
                        f"term {term!r} appears in categories {seen[term]!r} and {category!r}"
                    )
                seen[term] = category
        self._term_to_category = seen

    def category_of(self, term: str) -> str | None:
        return self._term_to_category.get(normalize_term(term))

    def siblings(self, term: str) -> tuple[str, ...]:
        """Other terms sharing the given term's category."""
        category = self.category_of(term)
        if category is None:
            return ()
        norm = normalize_term(term)
        return tuple(t for t in self.categories[category] if t != norm)

    def to_dict(self) -> dict:
        return {category: list(terms) for category, terms in self.categories.items()}

    @classmethod
    def from_dict(cls, data: dict) -> "AspectCategoryMap":
        return cls(
            categories={
                str(category): tuple(normalize_term(t) for t in terms)
                for category, terms in data.items()
            }
        )


@dataclass(frozen=True)
class AugmentedExample:
    base_review_id: int
    swapped_span: AspectSpan
    replacement_term: str
    new_text: str
    spans: tuple[AspectSpan, ...]

    def to_review(self) -> Review:
        return Review(
            text=self.new_text,
            source_ids=[self.base_review_id],
            spans=list(self.spans),
        )


def context_vectors(
    reviews: Sequence[Review],
    window: int = DEFAULT_WINDOW,
    stopwords: frozenset[str] = PT_STOPWORDS,
) -> dict[str, Counter]:
    """Count the words within +/-window word tokens of each aspect occurrence."""
    vectors: dict[str, Counter] = {}
    for review in reviews:
        words = [t for t in tokenize(review.text) if any(c.isalnum() for c in t.text)]
        for span in review.spans:
            term = normalize_term(span.term)
            inside = [
                i for i, tok in enumerate(words)
                if tok.start < span.end and span.start < tok.end
            ]
            vector = vectors.setdefault(term, Counter())
            if not inside:
                continue
            lo = max(0, inside[0] - window)
            hi = min(len(words), inside[-1] + window + 1)
            for i in range(lo, hi):
                if i in inside:
                    continue
                word = words[i].text.casefold()
                if word in stopwords:
                    continue
                vector[word] += 1
    return vectors


def _kmeans(matrix: np.ndarray, k: int, seed: int, max_iter: int = 200) -> np.ndarray:
    """Plain seeded Lloyd's iteration with k-means++ style initialization.

    Ties in assignment go to the lowest cluster index and empty clusters are
    reseeded with the point farthest from its centroid, so the result is a
    pure function of (matrix, k, seed).
    """
    n = matrix.shape[0]
    rng = np.random.default_rng(seed)

    centroids = np.empty((k, matrix.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = matrix[first]
    closest = np.sum((matrix - centroids[0]) ** 2, axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total <= 0:
            pick = int(rng.integers(n))
        else:
            pick = int(rng.choice(n, p=closest / total))
        centroids[j] = matrix[pick]
        closest = np.minimum(closest, np.sum((matrix - centroids[j]) ** 2, axis=1))

    assignment = np.zeros(n, dtype=int)
    for _ in range(max_iter):
        distances = ((matrix[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assignment = distances.argmin(axis=1)
        forced: set[int] = set()
        for j in range(k):
            members = matrix[new_assignment == j]
            if len(members):
                centroids[j] = members.mean(axis=0)
            else:
                own = distances[np.arange(n), new_assignment].copy()
                own[list(forced)] = -1.0
                farthest = int(own.argmax())
                forced.add(farthest)
                centroids[j] = matrix[farthest]
                new_assignment[farthest] = j
        if np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment
    return assignment


def infer_categories(
    reviews: Sequence[Review],
    k: int = DEFAULT_K,
    seed: int = 0,
    window: int = DEFAULT_WINDOW,
    stopwords: frozenset[str] = PT_STOPWORDS,
) -> AspectCategoryMap:
    """Cluster the aspect vocabulary into k categories by context similarity."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if not reviews:
        raise ValidationError("cannot infer categories from an empty corpus")

    vectors = context_vectors(reviews, window=window, stopwords=stopwords)
    terms = sorted(vectors)
    if k > len(terms):
        raise ValidationError(f"k={k} exceeds the {len(terms)} unique aspect terms")

    vocabulary = sorted({word for counter in vectors.values() for word in counter})
    index = {word: i for i, word in enumerate(vocabulary)}
    matrix = np.zeros((len(terms), max(len(vocabulary), 1)))
    for row, term in enumerate(terms):
        for word, count in vectors[term].items():
            matrix[row, index[word]] = count
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    matrix = np.divide(matrix, norms, out=np.zeros_like(matrix), where=norms > 0)

    assignment = _kmeans(matrix, k, seed)
    categories: dict[str, list[str]] = {}
    for term, cluster in zip(terms, assignment):
        categories.setdefault(f"c{cluster:02d}", []).append(term)
    return AspectCategoryMap(
        categories={cid: tuple(sorted(members)) for cid, members in sorted(categories.items())}
    )


def target_swap(
    reviews: Sequence[Review],
    category_map: AspectCategoryMap,
    per_example: int,
    seed: int = 0,
) -> list[AugmentedExample]:
    """Generate swapped variants for every (review, span) pair.

    For each span, up to ``per_example`` replacement terms are sampled
    uniformly without replacement from the span's category (minus the term
    itself). Polarities carry over unchanged; offsets after the swap point
    shift by the replacement length difference.
    """
    if per_example < 0:
        raise ValidationError(f"per_example must be >= 0, got {per_example}")
    rng = random.Random(seed)
    warned_terms: set[str] = set()
    out: list[AugmentedExample] = []
    for review in reviews:
        base_id = min(review.source_ids) if review.source_ids else -1
        for position, span in enumerate(review.spans):
            term = normalize_term(span.term)
            if category_map.category_of(term) is None:
                if term not in warned_terms:
                    logger.warning("aspect %r not covered by the category map; skipping", term)
                    warned_terms.add(term)
                continue
            candidates = category_map.siblings(term)
            if not candidates:
                logger.debug("aspect %r is alone in its category; no variants", term)
                continue
            count = min(per_example, len(candidates))
            for replacement in rng.sample(candidates, count):
                out.append(_swap_one(review, position, replacement, base_id))
    return out


def _swap_one(review: Review, position: int, replacement: str, base_id: int) -> AugmentedExample:
    span = review.spans[position]
    delta = len(replacement) - (span.end - span.start)
    new_text = review.text[:span.start] + replacement + review.text[span.end:]

    new_spans: list[AspectSpan] = []
    for i, other in enumerate(review.spans):
        if i == position:
            new_spans.append(
                AspectSpan(
                    term=replacement,
                    start=span.start,
                    end=span.start + len(replacement),
                    polarity=span.polarity,
                )
            )
        elif other.start >= span.end:
            new_spans.append(
                AspectSpan(
                    term=other.term,
                    start=other.start + delta,
                    end=other.end + delta,
                    polarity=other.polarity,
                )
            )
        else:
            new_spans.append(other)
    return AugmentedExample(
        base_review_id=base_id,
        swapped_span=new_spans[position],
        replacement_term=replacement,
        new_text=new_text,
        spans=tuple(new_spans),
    )


def write_category_map(
    category_map: AspectCategoryMap, path: str | Path, header: str | None = None
) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        if header:
            handle.write(f"# {header}\n")
        handle.write(json.dumps(category_map.to_dict(), ensure_ascii=False, indent=2) + "\n")


def read_category_map(path: str | Path) -> AspectCategoryMap:
    with open(path, "r", encoding="utf-8") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    return AspectCategoryMap.from_dict(json.loads("".join(lines)))
