"""Command line entry points: train a checkpoint, serve it over the bridge."""
from __future__ import annotations

import argparse
import json
import sys

from neuralpolicy.model import ModelConfig
from neuralpolicy.serve import serve
from neuralpolicy.train import VocabMismatchError, train_model


def cmd_train(args) -> int:
    overrides = None
    if args.config:
        with open(args.config) as fh:
            overrides = json.load(fh)
    result = train_model(args.src, args.tgt, args.out, ModelConfig(),
                         epochs=args.epochs, seed=args.seed,
                         resume=args.resume, overrides=overrides)
    print(f"trained {result.epochs_done} epochs, "
          f"final loss {result.loss_curve[-1]:.4f}, "
          f"checkpoint {result.checkpoint_path}")
    return 0


def cmd_serve(args) -> int:
    serve(args.checkpoint)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neuralpolicy")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train or continue a checkpoint")
    p.add_argument("--src", required=True, help="source line file")
    p.add_argument("--tgt", required=True, help="target line file")
    p.add_argument("--out", required=True, help="checkpoint to write")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resume", default=None, help="checkpoint to continue from")
    p.add_argument("--config", default=None, help="JSON model config overrides")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("serve", help="answer bridge requests on stdio")
    p.add_argument("--checkpoint", required=True)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except (VocabMismatchError, ValueError, OSError) as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e)}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
