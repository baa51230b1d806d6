"""Command-line surface: ``ttf-extract extract | finetune``.

Flag names mirror the classifier CLI (``--out``, ``--seed``); exit codes
match it too: 0 success, 2 validation/usage error, 3 training failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .backbones import SUPPORTED_BACKBONES, BackboneSpec, BackboneUnavailableError
from .extract import extract_features
from .finetune import fine_tune_baseline
from .protocol import FineTuneProtocol


def _add_backbone_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backbone", required=True, choices=SUPPORTED_BACKBONES)
    p.add_argument("--images", required=True, help="directory with one subfolder per class")
    p.add_argument("--weights", choices=["imagenet", "none"], default="imagenet",
                   help="'imagenet' downloads published weights; 'none' is a seeded "
                        "random initialization")
    p.add_argument("--input-size", type=int, default=None,
                   help="square input side (default: the backbone's native size)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)


def _spec(args: argparse.Namespace) -> BackboneSpec:
    return BackboneSpec(
        name=args.backbone, weights_tag=args.weights, input_size=args.input_size
    )


def _cmd_extract(args: argparse.Namespace) -> int:
    spec = _spec(args)
    summary = extract_features(spec, args.images, args.out, seed=args.seed,
                               batch_size=args.batch_size)
    print(json.dumps(
        {
            "command": "extract",
            "backbone": spec.name,
            "n": summary.n,
            "d": summary.d,
            "C": summary.num_classes,
            "skipped": summary.skipped,
            "out": summary.out_path,
        },
        sort_keys=True,
    ))
    return 0


def _cmd_finetune(args: argparse.Namespace) -> int:
    spec = _spec(args)
    protocol = FineTuneProtocol(
        max_steps=args.max_steps,
        patience=args.patience,
        learning_rates=tuple(float(v) for v in args.learning_rates.split(",")),
    )
    result = fine_tune_baseline(spec, args.images, protocol, seed=args.seed)
    record = result.to_baseline_record()
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump([record], fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(
        {
            "command": "finetune",
            **record,
            "runs": [
                {"learning_rate": r.learning_rate,
                 "steps": r.steps, "stop_reason": r.stop_reason,
                 "best_val_accuracy": r.best_val_accuracy,
                 "wall_time_s": r.wall_time_s}
                for r in result.runs
            ],
        },
        sort_keys=True,
    ))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ttf-extract",
        description="Dump pooled pretrained-backbone features to TTF1 files and "
                    "run the gradient-descent fine-tuning baseline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="write pooled activations as a TTF1 file")
    _add_backbone_flags(p)
    p.add_argument("--batch-size", type=int, default=32,
                   help="extraction batch size (fixed per run for reproducibility)")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("finetune", help="train the end-to-end baseline, emit baseline JSON")
    _add_backbone_flags(p)
    p.add_argument("--max-steps", type=int, default=20_000)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--learning-rates", default="0.1,0.01")
    p.set_defaults(func=_cmd_finetune)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, BackboneUnavailableError) as exc:
        # OSError also covers unreachable weight downloads
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"training error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
