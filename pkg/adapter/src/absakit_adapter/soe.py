"""Polarity inference over prompt files: generation or pair classification.

Generated completions go through the same label-word rule the toolkit
applies to its own completions; anything unparseable becomes an abstain
record rather than a default class.
"""

from __future__ import annotations

import logging

import torch

from absakit.ensemble import SoeModelPrediction
from absakit.soe import SoeExample

from .config import AdapterConfig
from .labels import parse_generated, polarity_of_class

logger = logging.getLogger(__name__)


def predict_soe(config: AdapterConfig, examples: list[SoeExample]) -> SoeModelPrediction:
    if config.task == "soe-generate":
        return _predict_generate(config, examples)
    if config.task == "soe-classify":
        return _predict_classify(config, examples)
    raise ValueError(f"not a polarity task: {config.task}")


def _load_generator(config: AdapterConfig):
    from transformers import (
        AutoConfig,
        AutoModelForCausalLM,
        AutoModelForSeq2SeqLM,
        AutoTokenizer,
    )

    model_config = AutoConfig.from_pretrained(config.model)
    loader = (
        AutoModelForSeq2SeqLM if model_config.is_encoder_decoder else AutoModelForCausalLM
    )
    tokenizer = AutoTokenizer.from_pretrained(config.model)
    if tokenizer.pad_token is None:
        tokenizer.pad_token = tokenizer.eos_token
    model = loader.from_pretrained(config.model)
    model.to(config.device)
    model.eval()
    return model, tokenizer, model_config.is_encoder_decoder


def _predict_generate(config: AdapterConfig, examples: list[SoeExample]) -> SoeModelPrediction:
    model, tokenizer, encoder_decoder = _load_generator(config)
    prediction = SoeModelPrediction(model_id=config.model_id)
    abstained = 0
    for start in range(0, len(examples), config.batch_size):
        batch = examples[start:start + config.batch_size]
        encoded = tokenizer(
            [e.input_text for e in batch],
            truncation=True,
            max_length=config.max_length,
            padding=True,
            return_tensors="pt",
        ).to(config.device)
        with torch.no_grad():
            output = model.generate(
                **encoded,
                max_new_tokens=config.max_new_tokens,
                do_sample=False,
                pad_token_id=tokenizer.pad_token_id,
            )
        prompt_length = 0 if encoder_decoder else encoded["input_ids"].shape[1]
        for example, sequence in zip(batch, output):
            completion = tokenizer.decode(sequence[prompt_length:], skip_special_tokens=True)
            label = parse_generated(completion)
            if label is None:
                abstained += 1
            key = (example.review_id, example.aspect_term, example.start, example.end)
            prediction.labels[key] = label
    if abstained:
        logger.warning("%d of %d completions were unparseable (abstain)", abstained, len(examples))
    return prediction


def _predict_classify(config: AdapterConfig, examples: list[SoeExample]) -> SoeModelPrediction:
    from transformers import AutoModelForSequenceClassification, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(config.model)
    model = AutoModelForSequenceClassification.from_pretrained(config.model)
    model.to(config.device)
    model.eval()

    id2label = {int(k): v for k, v in model.config.id2label.items()}
    polarity_by_index = {
        index: polarity_of_class(label, config.label_map)
        for index, label in id2label.items()
    }
    if all(p is None for p in polarity_by_index.values()):
        raise ValueError(
            f"cannot map any of the model labels {sorted(id2label.values())} to a "
            "polarity; pass an explicit label map"
        )

    prediction = SoeModelPrediction(model_id=config.model_id)
    for start in range(0, len(examples), config.batch_size):
        batch = examples[start:start + config.batch_size]
        encoded = tokenizer(
            [e.input_text for e in batch],
            truncation=True,
            max_length=config.max_length,
            padding=True,
            return_tensors="pt",
        ).to(config.device)
        with torch.no_grad():
            logits = model(**encoded).logits
        choices = logits.argmax(dim=-1).cpu().tolist()
        for example, choice in zip(batch, choices):
            key = (example.review_id, example.aspect_term, example.start, example.end)
            prediction.labels[key] = polarity_by_index[choice]
    return prediction
