"""Tiny random-weight checkpoints built offline for adapter tests.

No hub access is assumed anywhere: every model is constructed locally with
a handful of parameters. Outputs are therefore meaningless as predictions;
the contracts under test are schema conformance, offset alignment, and
label-space mapping.
"""

from __future__ import annotations

import json
import os

import pytest
import torch

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")
os.environ.setdefault("TOKENIZERS_PARALLELISM", "false")

from absakit.tagging import tokenize
from absakit.toy import build_toy_corpus

BERT_SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]


def toy_vocabulary() -> list[str]:
    words = set()
    for review in build_toy_corpus():
        for token in tokenize(review.text):
            words.add(token.text.lower())
    return BERT_SPECIALS + sorted(words)


def build_bert_checkpoint(directory, id2label: dict[int, str], seed: int = 0) -> str:
    from transformers import BertConfig, BertForTokenClassification, BertTokenizerFast

    directory = str(directory)
    os.makedirs(directory, exist_ok=True)
    vocab = toy_vocabulary()
    vocab_path = os.path.join(directory, "vocab.txt")
    with open(vocab_path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(vocab))
    tokenizer = BertTokenizerFast(vocab_file=vocab_path, do_lower_case=True)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=1,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=128,
        num_labels=len(id2label),
        id2label=id2label,
        label2id={v: k for k, v in id2label.items()},
    )
    torch.manual_seed(seed)
    model = BertForTokenClassification(config)
    model.save_pretrained(directory)
    tokenizer.save_pretrained(directory)
    return directory


def build_sequence_classifier(directory, id2label: dict[int, str], seed: int = 0) -> str:
    from transformers import BertConfig, BertForSequenceClassification, BertTokenizerFast

    directory = str(directory)
    os.makedirs(directory, exist_ok=True)
    vocab = toy_vocabulary() + ["review", "aspect", "polarity"]
    vocab_path = os.path.join(directory, "vocab.txt")
    with open(vocab_path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(vocab))
    tokenizer = BertTokenizerFast(vocab_file=vocab_path, do_lower_case=True)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=1,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=256,
        num_labels=len(id2label),
        id2label=id2label,
        label2id={v: k for k, v in id2label.items()},
    )
    torch.manual_seed(seed)
    model = BertForSequenceClassification(config)
    model.save_pretrained(directory)
    tokenizer.save_pretrained(directory)
    return directory


def build_causal_lm(directory, seed: int = 0) -> str:
    from tokenizers import Tokenizer
    from tokenizers.models import WordLevel
    from tokenizers.pre_tokenizers import Whitespace
    from transformers import GPT2Config, GPT2LMHeadModel, PreTrainedTokenizerFast

    directory = str(directory)
    os.makedirs(directory, exist_ok=True)
    words = ["<unk>", "<eos>", "Review", "Aspect", "Polarity", ":",
             "positive", "negative", "neutral", "o", "a", "é", "hotel", "piscina", "bom"]
    vocab = {w: i for i, w in enumerate(words)}
    tok_model = Tokenizer(WordLevel(vocab, unk_token="<unk>"))
    tok_model.pre_tokenizer = Whitespace()
    tok_path = os.path.join(directory, "wordlevel.json")
    tok_model.save(tok_path)
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_file=tok_path, unk_token="<unk>", eos_token="<eos>", pad_token="<eos>"
    )
    config = GPT2Config(
        vocab_size=len(vocab),
        n_positions=256,
        n_embd=32,
        n_layer=1,
        n_head=2,
        bos_token_id=vocab["<eos>"],
        eos_token_id=vocab["<eos>"],
        pad_token_id=vocab["<eos>"],
    )
    torch.manual_seed(seed)
    model = GPT2LMHeadModel(config)
    model.save_pretrained(directory)
    tokenizer.save_pretrained(directory)
    return directory


@pytest.fixture(scope="session")
def bio_checkpoint(tmp_path_factory):
    return build_bert_checkpoint(
        tmp_path_factory.mktemp("bio-model"),
        {0: "O", 1: "B-ASPECT", 2: "I-ASPECT"},
    )


@pytest.fixture(scope="session")
def ner_checkpoint(tmp_path_factory):
    """Foreign NER label space, to exercise bucket marginalization."""
    return build_bert_checkpoint(
        tmp_path_factory.mktemp("ner-model"),
        {0: "O", 1: "B-LOC", 2: "I-LOC", 3: "B-ORG", 4: "I-ORG"},
        seed=1,
    )


@pytest.fixture(scope="session")
def generator_checkpoint(tmp_path_factory):
    return build_causal_lm(tmp_path_factory.mktemp("gen-model"), seed=2)


@pytest.fixture(scope="session")
def classifier_checkpoint(tmp_path_factory):
    return build_sequence_classifier(
        tmp_path_factory.mktemp("cls-model"),
        {0: "NEGATIVE", 1: "NEUTRAL", 2: "POSITIVE"},
        seed=3,
    )


@pytest.fixture(scope="session")
def toy_corpus_file(tmp_path_factory):
    from absakit.corpus import write_corpus

    path = tmp_path_factory.mktemp("data") / "toy.jsonl"
    write_corpus(build_toy_corpus(), path)
    return path
