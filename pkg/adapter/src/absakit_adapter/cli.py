"""Command-line front end: corpus/prompt files in, interchange files out.

Exit codes: 0 success, 1 data or model error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from absakit.corpus import CorpusError, read_corpus
from absakit.ensemble import write_ate_predictions, write_soe_predictions
from absakit.soe import read_examples

from .ate import predict_ate
from .config import AdapterConfig
from .soe import predict_soe

logger = logging.getLogger("absakit_adapter")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="absakit-adapter",
        description="Run transformer checkpoints against absakit pipeline files",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    p = subparsers.add_parser("ate", help="token classification -> probability interchange")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--device", default="cpu")
    p.add_argument("--aggregation", choices=["first", "mean"], default="first")
    p.add_argument("--max-length", type=int)
    p.add_argument("--label-map", help="JSON file mapping model labels to O/B-ASPECT/I-ASPECT")
    p.add_argument("--model-id")

    p = subparsers.add_parser("soe", help="generation or classification -> label interchange")
    p.add_argument("--model", required=True)
    p.add_argument("--prompts", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--task", choices=["generate", "classify"], default="generate")
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--device", default="cpu")
    p.add_argument("--max-length", type=int)
    p.add_argument("--max-new-tokens", type=int, default=8)
    p.add_argument("--label-map", help="JSON file mapping model labels to polarities")
    p.add_argument("--model-id")

    return parser


def _load_label_map(path: str | None) -> dict | None:
    if not path:
        return None
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def _header(command: str, config: AdapterConfig) -> str:
    payload = {"command": command, **vars(config)}
    return json.dumps(payload, ensure_ascii=False, sort_keys=True)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    args = build_parser().parse_args(argv)
    try:
        if args.command == "ate":
            config = AdapterConfig(
                model=args.model,
                task="ate",
                batch_size=args.batch_size,
                device=args.device,
                aggregation=args.aggregation,
                label_map=_load_label_map(args.label_map),
                max_length=args.max_length,
                model_id=args.model_id,
            )
            reviews = read_corpus(args.corpus)
            prediction, report = predict_ate(config, reviews)
            write_ate_predictions(prediction, args.out, header=_header("ate", config))
            logger.info(
                "wrote %d reviews (%d errors, %d warnings) to %s",
                len(prediction.reviews),
                len(report.errors),
                len(report.warnings),
                args.out,
            )
            return 0

        config = AdapterConfig(
            model=args.model,
            task=f"soe-{args.task}",
            batch_size=args.batch_size,
            device=args.device,
            label_map=_load_label_map(args.label_map),
            max_length=args.max_length,
            max_new_tokens=args.max_new_tokens,
            model_id=args.model_id,
        )
        examples = read_examples(args.prompts)
        prediction = predict_soe(config, examples)
        write_soe_predictions(prediction, args.out, header=_header("soe", config))
        logger.info("wrote %d predictions to %s", len(prediction.labels), args.out)
        return 0
    except (CorpusError, OSError, ValueError) as exc:
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
