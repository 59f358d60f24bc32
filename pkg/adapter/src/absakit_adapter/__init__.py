"""Transformer checkpoint bridge for the absakit pipeline formats."""

from .ate import AteRunReport, predict_ate
from .config import AdapterConfig
from .labels import bio_buckets, parse_generated, polarity_of_class
from .soe import predict_soe

__version__ = "0.1.0"
