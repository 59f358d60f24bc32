"""Adapter run configuration."""

from __future__ import annotations

import os
from dataclasses import dataclass

TASKS = ("ate", "soe-generate", "soe-classify")
AGGREGATIONS = ("first", "mean")


@dataclass
class AdapterConfig:
    """Everything a prediction run needs besides the input file.

    ``model`` is a local checkpoint directory or hub identifier; emitted
    files always validate against the toolkit interchange schemas.
    """

    model: str
    task: str = "ate"
    batch_size: int = 8
    device: str = "cpu"
    aggregation: str = "first"  # subword -> word rule: first subword or mean
    label_map: dict[str, str] | None = None
    max_length: int | None = None
    max_new_tokens: int = 8
    model_id: str | None = None

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.aggregation not in AGGREGATIONS:
            raise ValueError(f"aggregation must be one of {AGGREGATIONS}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.model_id is None:
            self.model_id = os.path.basename(os.path.normpath(self.model))
