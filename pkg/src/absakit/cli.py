"""Command-line entry point exposing the pipeline as subcommands.

Every run is config-driven and reproducible: all randomness sits behind
--seed, logs go to standard error, and every output file starts with a
"# {...}" provenance line holding the fully resolved run configuration
(readers in this package skip such lines). Option values resolve as
explicit flag > ABSAKIT_* environment variable (path options only) >
--config JSON file > built-in default.

Exit codes: 0 success, 1 validation/data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import augment as augment_mod
from . import baseline as baseline_mod
from . import corpus as corpus_mod
from . import ensemble as ensemble_mod
from . import metrics as metrics_mod
from . import soe as soe_mod
from . import splits as splits_mod
from . import tagging as tagging_mod
from .corpus import CorpusError, Polarity, ValidationError

logger = logging.getLogger("absakit")

_DELIMITERS = {"tab": "\t", "comma": ","}


def _resolve(args: argparse.Namespace, spec: dict, path_options: set[str]) -> dict:
    """Merge flag/env/config/default values into the run configuration."""
    file_config = {}
    config_path = getattr(args, "config", None)
    if config_path:
        with open(config_path, "r", encoding="utf-8") as handle:
            file_config = json.load(handle)
        if not isinstance(file_config, dict):
            raise ValidationError(f"config file {config_path} must hold a JSON object")

    resolved = {}
    for dest, default in spec.items():
        value = getattr(args, dest, None)
        if value is None and dest in path_options:
            value = os.environ.get(f"ABSAKIT_{dest.upper()}")
        if value is None:
            value = file_config.get(dest, default)
        resolved[dest] = value
    return resolved


def _require(config: dict, parser: argparse.ArgumentParser, *names: str) -> None:
    for name in names:
        if config.get(name) is None:
            parser.error(f"missing required option --{name.replace('_', '-')}")


def _header(command: str, config: dict) -> str:
    return json.dumps({"command": command, **config}, ensure_ascii=False, sort_keys=True)


def _delimiter(value: str) -> str:
    return _DELIMITERS.get(value, value)


def _print_or_write(payload: dict, out: str | None, header: str) -> None:
    text = json.dumps(payload, ensure_ascii=False, indent=2)
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(f"# {header}\n{text}\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------

def _parse_code_map(raw: str | dict) -> dict[int, Polarity]:
    data = json.loads(raw) if isinstance(raw, str) else raw
    return {int(code): Polarity.from_label(label) for code, label in data.items()}


def _cmd_convert(args, parser) -> int:
    spec = {
        "in_path": None,
        "out": None,
        "delimiter": "tab",
        "columns": ",".join(corpus_mod.DEFAULT_COLUMNS),
        "end_offsets": "exclusive",
        "errors": "raise",
        "overlaps": "reject",
        "polarity_codes": '{"-1": "negative", "0": "neutral", "1": "positive"}',
    }
    config = _resolve(args, spec, {"in_path", "out"})
    _require(config, parser, "in_path", "out")
    rows = corpus_mod.parse_rows(
        config["in_path"],
        delimiter=_delimiter(config["delimiter"]),
        columns=tuple(config["columns"].split(",")),
        end_offsets=config["end_offsets"],
        on_error=config["errors"],
    )
    reviews = corpus_mod.group_reviews(
        rows,
        code_map=_parse_code_map(config["polarity_codes"]),
        overlap_policy=config["overlaps"],
    )
    corpus_mod.write_corpus(reviews, config["out"], header=_header("convert", config))
    logger.info("converted %d rows into %d reviews", len(rows), len(reviews))
    return 0


def _cmd_stats(args, parser) -> int:
    spec = {"corpus": None, "top_k": 15, "out": None}
    config = _resolve(args, spec, {"corpus", "out"})
    _require(config, parser, "corpus")
    reviews = corpus_mod.read_corpus(config["corpus"])
    stats = corpus_mod.compute_stats(reviews, top_k=int(config["top_k"]))
    _print_or_write(stats.to_dict(), config["out"], _header("stats", config))
    return 0


def _cmd_tag(args, parser) -> int:
    spec = {"corpus": None, "out": None, "misaligned": "warn"}
    config = _resolve(args, spec, {"corpus", "out"})
    _require(config, parser, "corpus", "out")
    reviews = corpus_mod.read_corpus(config["corpus"])
    sequences = [
        tagging_mod.encode_bio(review, on_misaligned=config["misaligned"])
        for review in reviews
    ]
    tagging_mod.write_conll(sequences, config["out"], header=_header("tag", config))
    logger.info("tagged %d reviews", len(sequences))
    return 0


def _cmd_split(args, parser) -> int:
    spec = {
        "corpus": None,
        "strategy": "random",
        "fraction": 0.7,
        "seed": 0,
        "train_out": None,
        "test_out": None,
        "report_out": None,
    }
    config = _resolve(args, spec, {"corpus", "train_out", "test_out", "report_out"})
    _require(config, parser, "corpus", "train_out", "test_out")
    reviews = corpus_mod.read_corpus(config["corpus"])
    result = splits_mod.split(
        reviews,
        splits_mod.SplitSpec(
            train_fraction=float(config["fraction"]),
            strategy=splits_mod.SplitStrategy(config["strategy"]),
            seed=int(config["seed"]),
        ),
    )
    header = _header("split", config)
    corpus_mod.write_corpus(result.train, config["train_out"], header=header)
    corpus_mod.write_corpus(result.test, config["test_out"], header=header)
    if config["report_out"]:
        _print_or_write(result.report, config["report_out"], header)
    logger.info("split %d reviews into %d train / %d test", len(reviews), len(result.train), len(result.test))
    return 0


def _cmd_augment(args, parser) -> int:
    if args.augment_command == "infer-categories":
        spec = {"corpus": None, "k": augment_mod.DEFAULT_K, "seed": 0, "window": augment_mod.DEFAULT_WINDOW, "out": None}
        config = _resolve(args, spec, {"corpus", "out"})
        _require(config, parser, "corpus", "out")
        reviews = corpus_mod.read_corpus(config["corpus"])
        category_map = augment_mod.infer_categories(
            reviews, k=int(config["k"]), seed=int(config["seed"]), window=int(config["window"])
        )
        augment_mod.write_category_map(
            category_map, config["out"], header=_header("augment infer-categories", config)
        )
        logger.info("inferred %d categories", len(category_map.categories))
        return 0

    spec = {"corpus": None, "categories": None, "per_example": 1, "seed": 0, "out": None}
    config = _resolve(args, spec, {"corpus", "categories", "out"})
    _require(config, parser, "corpus", "categories", "out")
    reviews = corpus_mod.read_corpus(config["corpus"])
    category_map = augment_mod.read_category_map(config["categories"])
    variants = augment_mod.target_swap(
        reviews, category_map, per_example=int(config["per_example"]), seed=int(config["seed"])
    )
    corpus_mod.write_corpus(
        [v.to_review() for v in variants],
        config["out"],
        header=_header("augment target-swap", config),
    )
    logger.info("generated %d augmented reviews", len(variants))
    return 0


def _cmd_prompt(args, parser) -> int:
    spec = {"corpus": None, "out": None, "mode": "full", "style": "prompt", "separator": soe_mod.DEFAULT_SEPARATOR}
    config = _resolve(args, spec, {"corpus", "out"})
    _require(config, parser, "corpus", "out")
    reviews = corpus_mod.read_corpus(config["corpus"])
    examples = soe_mod.build_examples(
        reviews,
        mode=soe_mod.ReviewMode(config["mode"]),
        style=config["style"],
        separator=config["separator"],
    )
    soe_mod.write_examples(examples, config["out"], header=_header("prompt", config))
    logger.info("built %d examples", len(examples))
    return 0


def _cmd_ensemble(args, parser) -> int:
    if args.ensemble_command == "ate":
        spec = {"pred": None, "corpus": None, "out": None}
        config = _resolve(args, spec, {"corpus", "out"})
        _require(config, parser, "pred", "corpus", "out")
        models = []
        for path in config["pred"]:
            models.extend(ensemble_mod.read_ate_predictions(path))
        reviews = corpus_mod.read_corpus(config["corpus"])
        texts = {ensemble_mod.review_key(r.text): r.text for r in reviews}
        fused = ensemble_mod.median_ensemble(models, texts)
        # Emit in corpus file order so gold and prediction files align.
        ordered = [
            fused[ensemble_mod.review_key(r.text)]
            for r in reviews
            if ensemble_mod.review_key(r.text) in fused
        ]
        tagging_mod.write_conll(ordered, config["out"], header=_header("ensemble ate", config))
        logger.info("fused %d models over %d reviews", len(models), len(fused))
        return 0

    spec = {"pred": None, "out": None, "tie_break": "positive,negative,neutral"}
    config = _resolve(args, spec, {"out"})
    _require(config, parser, "pred", "out")
    models = []
    for path in config["pred"]:
        models.extend(ensemble_mod.read_soe_predictions(path))
    tie_break = [Polarity.from_label(l) for l in config["tie_break"].split(",")]
    fused = ensemble_mod.majority_vote(models, tie_break=tie_break)
    merged = ensemble_mod.SoeModelPrediction(model_id="ensemble", labels=fused)
    ensemble_mod.write_soe_predictions(merged, config["out"], header=_header("ensemble soe", config))
    logger.info("voted %d models over %d keys", len(models), len(fused))
    return 0


def _write_csv_row(result, path: str, header: str) -> None:
    names, values = result.to_csv_row()
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"# {header}\n{names}\n{values}\n")


def _cmd_eval(args, parser) -> int:
    if args.eval_command == "ate":
        spec = {"gold": None, "pred": None, "out": None, "csv_out": None}
        config = _resolve(args, spec, {"gold", "pred", "out", "csv_out"})
        _require(config, parser, "gold", "pred")
        gold = tagging_mod.read_conll(config["gold"])
        pred = tagging_mod.read_conll(config["pred"])
        result = metrics_mod.score_ate(gold, pred)
        _print_or_write(result.to_dict(), config["out"], _header("eval ate", config))
        if config["csv_out"]:
            _write_csv_row(result, config["csv_out"], _header("eval ate", config))
        return 0

    spec = {"gold": None, "pred": None, "out": None, "csv_out": None}
    config = _resolve(args, spec, {"gold", "pred", "out", "csv_out"})
    _require(config, parser, "gold", "pred")
    reviews = corpus_mod.read_corpus(config["gold"])
    gold_labels: dict = {}
    for review in reviews:
        review_id = min(review.source_ids) if review.source_ids else -1
        for span in review.spans:
            if span.polarity is not None:
                gold_labels[(review_id, span.term, span.start, span.end)] = span.polarity
    models = ensemble_mod.read_soe_predictions(config["pred"])
    if len(models) != 1:
        raise ValidationError(
            f"expected a single prediction set in {config['pred']}, found {len(models)}"
        )
    predictions = models[0].labels
    for key in predictions.keys() - gold_labels.keys():
        logger.warning("prediction for unknown key %s ignored", (key,))
    gold_list, pred_list = [], []
    for key, polarity in sorted(gold_labels.items()):
        if key not in predictions:
            logger.warning("no prediction for %s; scoring as abstention", (key,))
        gold_list.append(polarity)
        pred_list.append(predictions.get(key))
    result = metrics_mod.score_soe(gold_list, pred_list)
    _print_or_write(result.to_dict(), config["out"], _header("eval soe", config))
    if config["csv_out"]:
        _write_csv_row(result, config["csv_out"], _header("eval soe", config))
    return 0


def _cmd_baseline(args, parser) -> int:
    if args.baseline_command == "train":
        spec = {
            "task": None,
            "corpus": None,
            "prompts": None,
            "out": None,
            "epochs": 5,
            "seed": 0,
            "bootstrap": False,
        }
        config = _resolve(args, spec, {"corpus", "prompts", "out"})
        _require(config, parser, "task", "out")
        if config["task"] == "ate":
            _require(config, parser, "corpus")
            reviews = corpus_mod.read_corpus(config["corpus"])
            sequences = [tagging_mod.encode_bio(r) for r in reviews]
            model = baseline_mod.train_tagger(
                sequences, epochs=int(config["epochs"]), seed=int(config["seed"])
            )
        else:
            _require(config, parser, "prompts")
            examples = soe_mod.read_examples(config["prompts"])
            model = baseline_mod.train_soe(
                examples, seed=int(config["seed"]), bootstrap=bool(config["bootstrap"])
            )
        baseline_mod.save_model(model, config["out"], header=_header("baseline train", config))
        logger.info("saved %s model to %s", config["task"], config["out"])
        return 0

    spec = {"task": None, "model": None, "corpus": None, "prompts": None, "out": None, "model_id": None}
    config = _resolve(args, spec, {"model", "corpus", "prompts", "out"})
    _require(config, parser, "task", "model", "out")
    model = baseline_mod.load_model(config["model"])
    model_id = config["model_id"] or os.path.splitext(os.path.basename(config["model"]))[0]
    if config["task"] == "ate":
        _require(config, parser, "corpus")
        if not isinstance(model, baseline_mod.PerceptronTagger):
            raise ValidationError("model file does not hold a tagger")
        reviews = corpus_mod.read_corpus(config["corpus"])
        texts = {ensemble_mod.review_key(r.text): r.text for r in reviews}
        prediction = baseline_mod.predict_tagger_corpus(model, texts, model_id=model_id)
        ensemble_mod.write_ate_predictions(
            prediction, config["out"], header=_header("baseline predict", config)
        )
    else:
        _require(config, parser, "prompts")
        if not isinstance(model, baseline_mod.BowPolarityModel):
            raise ValidationError("model file does not hold a polarity classifier")
        examples = soe_mod.read_examples(config["prompts"])
        prediction = baseline_mod.predict_soe(model, examples, model_id=model_id)
        ensemble_mod.write_soe_predictions(
            prediction, config["out"], header=_header("baseline predict", config)
        )
    logger.info("wrote predictions to %s", config["out"])
    return 0


def _cmd_validate(args, parser) -> int:
    spec = {"kind": None, "in_path": None, "corpus": None}
    config = _resolve(args, spec, {"in_path", "corpus"})
    _require(config, parser, "kind", "in_path")
    kind = config["kind"]
    try:
        if kind == "corpus":
            problems = corpus_mod.validate_corpus_file(config["in_path"])
        elif kind == "ate":
            texts = None
            if config["corpus"]:
                reviews = corpus_mod.read_corpus(config["corpus"])
                texts = {ensemble_mod.review_key(r.text): r.text for r in reviews}
            problems = []
            for model in ensemble_mod.read_ate_predictions(config["in_path"]):
                problems.extend(ensemble_mod.validate_ate_prediction(model, texts=texts))
        elif kind == "soe":
            # Reading enforces the record schema and per-model key uniqueness.
            ensemble_mod.read_soe_predictions(config["in_path"])
            problems = []
        else:
            parser.error(f"unknown kind: {kind}")
    except CorpusError as exc:
        problems = [str(exc)]
    print(json.dumps({"valid": not problems, "problems": problems}, ensure_ascii=False, indent=2))
    return 1 if problems else 0


# ---------------------------------------------------------------------------
# Parser wiring
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="absakit",
        description="Aspect-based sentiment analysis pipeline toolkit",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", help="JSON file with option defaults")

    p = subparsers.add_parser("convert", help="delimited rows -> corpus JSON")
    p.add_argument("--in", dest="in_path")
    p.add_argument("--out")
    p.add_argument("--delimiter", help="'tab', 'comma', or a literal character")
    p.add_argument("--columns", help="comma-separated column names (id,review,polarity,aspect,start,end)")
    p.add_argument("--end-offsets", dest="end_offsets", choices=["exclusive", "inclusive"])
    p.add_argument("--errors", choices=["raise", "skip"])
    p.add_argument("--overlaps", choices=["reject", "keep-longer"])
    p.add_argument(
        "--polarity-codes",
        dest="polarity_codes",
        help='JSON object mapping file codes to labels, e.g. \'{"-1": "negative", ...}\'',
    )
    add_config(p)
    p.set_defaults(handler=_cmd_convert)

    p = subparsers.add_parser("stats", help="corpus statistics report")
    p.add_argument("--corpus")
    p.add_argument("--top-k", dest="top_k", type=int)
    p.add_argument("--out")
    add_config(p)
    p.set_defaults(handler=_cmd_stats)

    p = subparsers.add_parser("tag", help="corpus JSON -> CoNLL BIO file")
    p.add_argument("--corpus")
    p.add_argument("--out")
    p.add_argument("--misaligned", choices=["warn", "error"])
    add_config(p)
    p.set_defaults(handler=_cmd_tag)

    p = subparsers.add_parser("split", help="train/test partition with stratification")
    p.add_argument("--corpus")
    p.add_argument("--strategy", choices=[s.value for s in splits_mod.SplitStrategy])
    p.add_argument("--fraction", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--train-out", dest="train_out")
    p.add_argument("--test-out", dest="test_out")
    p.add_argument("--report-out", dest="report_out")
    add_config(p)
    p.set_defaults(handler=_cmd_split)

    p = subparsers.add_parser("augment", help="category inference and target swapping")
    augment_sub = p.add_subparsers(dest="augment_command", required=True)
    q = augment_sub.add_parser("infer-categories")
    q.add_argument("--corpus")
    q.add_argument("--k", type=int)
    q.add_argument("--seed", type=int)
    q.add_argument("--window", type=int)
    q.add_argument("--out")
    add_config(q)
    q.set_defaults(handler=_cmd_augment)
    q = augment_sub.add_parser("target-swap")
    q.add_argument("--corpus")
    q.add_argument("--categories")
    q.add_argument("--per-example", dest="per_example", type=int)
    q.add_argument("--seed", type=int)
    q.add_argument("--out")
    add_config(q)
    q.set_defaults(handler=_cmd_augment)

    p = subparsers.add_parser("prompt", help="corpus JSON -> model input examples")
    p.add_argument("--corpus")
    p.add_argument("--out")
    p.add_argument("--mode", choices=[m.value for m in soe_mod.ReviewMode])
    p.add_argument("--style", choices=["prompt", "pair"])
    p.add_argument("--separator")
    add_config(p)
    p.set_defaults(handler=_cmd_prompt)

    p = subparsers.add_parser("ensemble", help="combine model predictions")
    ensemble_sub = p.add_subparsers(dest="ensemble_command", required=True)
    q = ensemble_sub.add_parser("ate")
    q.add_argument("--pred", nargs="+")
    q.add_argument("--corpus")
    q.add_argument("--out")
    add_config(q)
    q.set_defaults(handler=_cmd_ensemble)
    q = ensemble_sub.add_parser("soe")
    q.add_argument("--pred", nargs="+")
    q.add_argument("--out")
    q.add_argument("--tie-break", dest="tie_break")
    add_config(q)
    q.set_defaults(handler=_cmd_ensemble)

    p = subparsers.add_parser("eval", help="score predictions against gold")
    eval_sub = p.add_subparsers(dest="eval_command", required=True)
    for task in ("ate", "soe"):
        q = eval_sub.add_parser(task)
        q.add_argument("--gold")
        q.add_argument("--pred")
        q.add_argument("--out")
        q.add_argument("--csv-out", dest="csv_out")
        add_config(q)
        q.set_defaults(handler=_cmd_eval)

    p = subparsers.add_parser("baseline", help="train/apply the bundled baseline models")
    baseline_sub = p.add_subparsers(dest="baseline_command", required=True)
    q = baseline_sub.add_parser("train")
    q.add_argument("--task", choices=["ate", "soe"])
    q.add_argument("--corpus")
    q.add_argument("--prompts")
    q.add_argument("--out")
    q.add_argument("--epochs", type=int)
    q.add_argument("--seed", type=int)
    q.add_argument("--bootstrap", action="store_const", const=True)
    add_config(q)
    q.set_defaults(handler=_cmd_baseline)
    q = baseline_sub.add_parser("predict")
    q.add_argument("--task", choices=["ate", "soe"])
    q.add_argument("--model")
    q.add_argument("--corpus")
    q.add_argument("--prompts")
    q.add_argument("--out")
    q.add_argument("--model-id", dest="model_id")
    add_config(q)
    q.set_defaults(handler=_cmd_baseline)

    p = subparsers.add_parser("validate", help="check corpus/interchange files")
    p.add_argument("--kind", choices=["corpus", "ate", "soe"])
    p.add_argument("--in", dest="in_path")
    p.add_argument("--corpus", help="corpus JSON for token alignment checks (kind=ate)")
    add_config(p)
    p.set_defaults(handler=_cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args, parser)
    except CorpusError as exc:
        logger.error("%s", exc)
        return 1
    except OSError as exc:
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
