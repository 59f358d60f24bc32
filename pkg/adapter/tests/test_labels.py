from absakit.corpus import Polarity
from absakit.soe import parse_completion

from absakit_adapter.labels import bio_buckets, parse_generated, polarity_of_class

# Vectors shared with the toolkit's completion parser: the adapter
# duplicates the rule, so both implementations must agree on these.
SHARED_VECTORS = [
    (" positive", Polarity.POSITIVE),
    ("NEUTRAL.", Polarity.NEUTRAL),
    ("great hotel!", None),
    ("claramente negativo", Polarity.NEGATIVE),
    ("negative, not positive", Polarity.NEGATIVE),
    ("positivelymaybe", None),
    ("", None),
]


class TestParseGenerated:
    def test_shared_vectors(self):
        for text, expected in SHARED_VECTORS:
            assert parse_generated(text) is expected

    def test_agrees_with_toolkit_rule(self):
        for text, _ in SHARED_VECTORS:
            assert parse_generated(text) is parse_completion(text)


class TestBioBuckets:
    def test_canonical_labels(self):
        buckets = bio_buckets({0: "O", 1: "B-ASPECT", 2: "I-ASPECT"})
        assert buckets == [0, 1, 2]

    def test_foreign_entity_classes_marginalize(self):
        buckets = bio_buckets({0: "O", 1: "B-LOC", 2: "I-LOC", 3: "B-ORG", 4: "I-ORG"})
        assert buckets == [0, 1, 2, 1, 2]

    def test_placeholder_three_label_head(self):
        buckets = bio_buckets({0: "LABEL_0", 1: "LABEL_1", 2: "LABEL_2"})
        assert buckets == [0, 1, 2]

    def test_unknown_labels_fold_into_outside(self):
        buckets = bio_buckets({0: "O", 1: "B-ASPECT", 2: "MISC"})
        assert buckets == [0, 1, 0]

    def test_explicit_map_wins(self):
        buckets = bio_buckets(
            {0: "KEEP", 1: "START", 2: "CONT"},
            label_map={"KEEP": "O", "START": "B-ASPECT", "CONT": "I-ASPECT"},
        )
        assert buckets == [0, 1, 2]


class TestPolarityOfClass:
    def test_name_heuristic(self):
        assert polarity_of_class("POSITIVE") is Polarity.POSITIVE
        assert polarity_of_class("neg") is Polarity.NEGATIVE
        assert polarity_of_class("Neutral") is Polarity.NEUTRAL

    def test_unmapped_is_none(self):
        assert polarity_of_class("LABEL_1") is None

    def test_explicit_map(self):
        assert polarity_of_class("LABEL_1", {"LABEL_1": "negative"}) is Polarity.NEGATIVE
