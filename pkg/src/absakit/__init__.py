"""Aspect-based sentiment analysis pipeline toolkit.

End-to-end machinery for aspect-level review corpora: ingestion and
statistics, BIO tagging codecs, leakage-free splitting, polarity model
inputs, target-swap augmentation, prediction ensembling, evaluation
metrics, and desk-scale baseline models.
"""

from .corpus import (
    AspectSpan,
    CorpusError,
    CorpusStats,
    ParseError,
    Polarity,
    RawRow,
    Review,
    ValidationError,
    compute_stats,
    group_reviews,
    parse_rows,
    read_corpus,
    write_corpus,
)
from .tagging import (
    BIO_ORDER,
    BioTag,
    TaggedSequence,
    Token,
    decode_bio,
    encode_bio,
    repair_bio,
    tokenize,
)
from .splits import SplitResult, SplitSpec, SplitStrategy, split
from .soe import ReviewMode, SoeExample, build_pair, build_prompt, parse_completion
from .augment import AspectCategoryMap, AugmentedExample, infer_categories, target_swap
from .ensemble import (
    AteModelPrediction,
    SoeModelPrediction,
    TokenProbs,
    majority_vote,
    median_ensemble,
    review_key,
)
from .metrics import ConfusionMatrix, MetricsReport, confusion, report, score_ate, score_soe
from .baseline import (
    BowPolarityModel,
    PerceptronTagger,
    predict_soe,
    predict_tagger,
    train_soe,
    train_tagger,
)

__version__ = "0.1.0"
