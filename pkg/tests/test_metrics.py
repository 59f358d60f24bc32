import random

import pytest

from absakit.corpus import AspectSpan, Polarity, Review, ValidationError
from absakit.metrics import confusion, report, score_ate, score_soe
from absakit.tagging import BioTag, TaggedSequence, Token, encode_bio, tokenize

TWO_SENTENCES = "A estrutura do hotel é muito boa. A piscina é excelente e os quartos também."


def brute_force_scores(gold: list[str], pred: list[str]) -> dict:
    """Independent scorer computed straight from the label pairs."""
    labels = sorted(set(gold) | set(pred))
    per_class = {}
    for label in labels:
        tp = sum(1 for g, p in zip(gold, pred) if g == label and p == label)
        fp = sum(1 for g, p in zip(gold, pred) if g != label and p == label)
        fn = sum(1 for g, p in zip(gold, pred) if g == label and p != label)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[label] = (precision, recall, f1, tp + fn)
    supported = [l for l in labels if per_class[l][3] > 0]
    return {
        "accuracy": sum(1 for g, p in zip(gold, pred) if g == p) / len(gold),
        "precision_macro": sum(per_class[l][0] for l in supported) / len(supported),
        "recall_macro": sum(per_class[l][1] for l in supported) / len(supported),
        "f1_macro": sum(per_class[l][2] for l in supported) / len(supported),
        "per_class": per_class,
    }


def random_label_pairs(rng, labels=("neg", "neu", "pos")):
    n = rng.randint(1, 60)
    gold = [rng.choice(labels) for _ in range(n)]
    pred = [rng.choice(labels) for _ in range(n)]
    return gold, pred


class TestConfusion:
    def test_diagonal_when_perfect(self):
        cm = confusion(["a", "b", "a"], ["a", "b", "a"])
        assert cm.counts == [[2, 0], [0, 1]]

    def test_hand_tally(self):
        cm = confusion(["P", "P", "N"], ["P", "N", "N"], labels=["N", "P"])
        # rows gold, columns predicted
        assert cm.counts == [[1, 0], [1, 1]]

    def test_empty_inputs_give_zero_matrix(self):
        cm = confusion([], [], labels=["a", "b"])
        assert cm.total == 0
        with pytest.raises(ValidationError):
            report(cm)

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            confusion(["a"], ["a", "b"])

    def test_unknown_label(self):
        with pytest.raises(ValidationError):
            confusion(["a"], ["z"], labels=["a", "b"])


class TestReport:
    def test_balanced_accuracy_from_recalls(self):
        # Gold: 2 of class a (both right), 2 of class b (1 right) -> recalls 1.0, 0.5.
        result = report(confusion(["a", "a", "b", "b"], ["a", "a", "b", "a"]))
        assert result.balanced_accuracy == pytest.approx(0.75)

    def test_perfect_predictions(self):
        result = report(confusion(["a", "b", "c"], ["a", "b", "c"]))
        assert result.accuracy == 1.0
        assert result.f1_macro == 1.0
        assert result.balanced_accuracy == 1.0

    def test_worked_four_item_example(self):
        gold = ["P", "P", "N", "Neu"]
        pred = ["P", "N", "N", "Neu"]
        result = report(confusion(gold, pred))
        assert result.accuracy == pytest.approx(0.75)
        assert result.per_class["P"]["f1"] == pytest.approx(2 / 3)
        assert result.per_class["N"]["f1"] == pytest.approx(2 / 3)
        assert result.per_class["Neu"]["f1"] == pytest.approx(1.0)
        assert result.f1_macro == pytest.approx(7 / 9)

    def test_matches_brute_force_scorer(self):
        rng = random.Random(43)
        for _ in range(300):
            gold, pred = random_label_pairs(rng)
            result = report(confusion(gold, pred))
            expected = brute_force_scores(gold, pred)
            assert abs(result.accuracy - expected["accuracy"]) < 1e-12
            assert abs(result.precision_macro - expected["precision_macro"]) < 1e-12
            assert abs(result.recall_macro - expected["recall_macro"]) < 1e-12
            assert abs(result.f1_macro - expected["f1_macro"]) < 1e-12

    def test_balanced_accuracy_equals_recall_macro_exactly(self):
        rng = random.Random(47)
        for _ in range(200):
            gold, pred = random_label_pairs(rng)
            result = report(confusion(gold, pred))
            assert result.balanced_accuracy == result.recall_macro

    def test_item_order_never_matters(self):
        rng = random.Random(53)
        gold, pred = random_label_pairs(rng)
        result_a = report(confusion(gold, pred))
        order = list(range(len(gold)))
        rng.shuffle(order)
        result_b = report(confusion([gold[i] for i in order], [pred[i] for i in order]))
        assert result_a.to_dict() == result_b.to_dict()

    def test_accuracy_is_trace_over_total(self):
        cm = confusion(["a", "b", "a", "b"], ["b", "b", "a", "a"])
        result = report(cm)
        trace = sum(cm.counts[i][i] for i in range(len(cm.labels)))
        assert result.accuracy == trace / cm.total

    def test_macro_ignores_classes_without_gold_support(self):
        # "c" appears only as a prediction: contributes a column, not a class.
        result = report(confusion(["a", "b"], ["a", "c"], labels=["a", "b", "c"]))
        assert set(l for l in result.per_class if result.per_class[l]["support"] > 0) == {"a", "b"}
        assert result.recall_macro == pytest.approx(0.5)


def table2_paper_tokens() -> TaggedSequence:
    """The printed two-sentence example laid out as 16 tokens.

    The typeset row keeps the final period attached ("também.") while the
    sentence-internal one stands alone, giving 16 tokens with exactly three
    single-token aspects (hotel, piscina, quartos).
    """
    words = [
        "A", "estrutura", "do", "hotel", "é", "muito", "boa", ".",
        "A", "piscina", "é", "excelente", "e", "os", "quartos", "também.",
    ]
    tokens = []
    cursor = 0
    for word in words:
        tokens.append(Token(word, cursor, cursor + len(word)))
        cursor += len(word) + 1
    tags = [BioTag.O] * len(words)
    for aspect in ("hotel", "piscina", "quartos"):
        tags[words.index(aspect)] = BioTag.B_ASPECT
    return TaggedSequence(text=" ".join(words), tokens=tokens, tags=tags)


class TestScoreAte:
    def test_perfect_prediction_on_fixture(self):
        review = Review(
            text=TWO_SENTENCES,
            source_ids=[1],
            spans=[
                AspectSpan("hotel", TWO_SENTENCES.index("hotel"), TWO_SENTENCES.index("hotel") + 5),
                AspectSpan("piscina", TWO_SENTENCES.index("piscina"), TWO_SENTENCES.index("piscina") + 7),
                AspectSpan("quartos", TWO_SENTENCES.index("quartos"), TWO_SENTENCES.index("quartos") + 7),
            ],
        )
        seq = encode_bio(review)
        result = score_ate([seq], [seq])
        assert result.accuracy == 1.0
        assert result.span_exact["f1"] == 1.0

    def test_all_outside_on_sixteen_token_fixture(self):
        gold = table2_paper_tokens()
        pred = TaggedSequence(gold.text, gold.tokens, [BioTag.O] * len(gold.tokens))
        result = score_ate([gold], [pred])
        assert len(gold.tokens) == 16
        assert result.accuracy == pytest.approx(13 / 16)
        assert result.span_exact["recall"] == 0.0

    def test_one_flipped_token_among_hundred(self):
        words = ["w"] * 100
        text = " ".join(words)
        tokens = tokenize(text)
        gold = TaggedSequence(text, tokens, [BioTag.O] * 100)
        flipped = [BioTag.O] * 100
        flipped[42] = BioTag.B_ASPECT
        pred = TaggedSequence(text, tokens, flipped)
        assert score_ate([gold], [pred]).accuracy == pytest.approx(0.99)

    def test_tokenization_mismatch_rejected(self):
        a = encode_bio(Review(text="um hotel", source_ids=[1], spans=[]))
        b = encode_bio(Review(text="um outro hotel", source_ids=[1], spans=[]))
        with pytest.raises(ValidationError, match="mismatch"):
            score_ate([a], [b])

    def test_span_block_counts(self):
        gold = table2_paper_tokens()
        tags = list(gold.tags)
        # Miss "quartos", hallucinate "estrutura".
        tags[words_index(gold, "quartos")] = BioTag.O
        tags[words_index(gold, "estrutura")] = BioTag.B_ASPECT
        pred = TaggedSequence(gold.text, gold.tokens, tags)
        result = score_ate([gold], [pred])
        assert result.span_exact["gold_spans"] == 3
        assert result.span_exact["predicted_spans"] == 3
        assert result.span_exact["precision"] == pytest.approx(2 / 3)
        assert result.span_exact["recall"] == pytest.approx(2 / 3)


def words_index(seq: TaggedSequence, word: str) -> int:
    return [t.text for t in seq.tokens].index(word)


class TestScoreSoe:
    def test_abstention_scores_as_wrong(self):
        gold = [Polarity.POSITIVE, Polarity.NEGATIVE]
        pred = [Polarity.POSITIVE, None]
        result = score_soe(gold, pred)
        assert result.accuracy == pytest.approx(0.5)
        # Abstain has no gold support and therefore no macro contribution.
        supported = [l for l, row in result.per_class.items() if row["support"] > 0]
        assert sorted(supported) == ["negative", "positive"]

    def test_all_correct(self):
        gold = [Polarity.POSITIVE, Polarity.NEUTRAL, Polarity.NEGATIVE]
        result = score_soe(gold, list(gold))
        assert result.accuracy == 1.0
        assert result.balanced_accuracy == 1.0
