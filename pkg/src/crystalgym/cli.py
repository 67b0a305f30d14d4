"""Command-line interface: train, eval, curves, cache."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .calculators import ResultCache
from .errors import (CheckpointMismatchError, ConfigError, CrystalGymError,
                     ParseError, StoreError, ValidationError)
from .harness import PRESETS, emit_curves, evaluate, load_spec, run_experiment

_ERROR_CODES = (
    (ConfigError, "config", 2),
    (CheckpointMismatchError, "checkpoint", 2),
    ((ParseError, ValidationError), "input", 3),
    (StoreError, "store", 4),
    (CrystalGymError, "runtime", 1),
    ((IOError, OSError), "io", 4),
)


def _cmd_train(args) -> int:
    spec = load_spec(args.config)
    updates = {}
    if args.calculator:
        updates["calculator_id"] = args.calculator
    if args.qe_command:
        updates["qe_command"] = args.qe_command
    if updates:
        spec = dataclasses.replace(spec, **updates)
    run_dir = Path(args.run_dir or f"runs/{spec.experiment_id}")
    seeds = [args.seed] if args.seed is not None else None
    run_experiment(spec, run_dir, episodes=args.episodes, seeds=seeds)
    print(f"run written to {run_dir}")
    return 0


def _cmd_eval(args) -> int:
    checkpoint = Path(args.checkpoint)
    spec_source = args.config or checkpoint.parent / "spec.json"
    spec = load_spec(spec_source)
    report = evaluate(checkpoint, spec, rollouts=args.rollouts, seed=args.seed)
    print(json.dumps(report.to_dict(), indent=2))
    return 0


def _cmd_curves(args) -> int:
    outputs = emit_curves(args.run)
    for path in outputs:
        print(path)
    return 0


def _cmd_cache(args) -> int:
    if args.action != "stats":
        raise ConfigError(f"unknown cache action {args.action!r}; expected stats")
    cache = ResultCache(args.cache)
    print(json.dumps(cache.stats(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crystalgym",
        description="Crystal-composition RL benchmark runner")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train an experiment spec")
    p_train.add_argument("--config", required=True,
                         help=f"preset ({', '.join(sorted(PRESETS))}) or JSON file")
    p_train.add_argument("--seed", type=int, default=None,
                         help="train only this seed")
    p_train.add_argument("--episodes", type=int, default=None)
    p_train.add_argument("--calculator", choices=["exact", "surrogate", "qe"],
                         default=None)
    p_train.add_argument("--qe-command", default=None,
                         help="shell command for pw.x (enables the qe calculator)")
    p_train.add_argument("--run-dir", default=None)
    p_train.set_defaults(func=_cmd_train)

    p_eval = sub.add_parser("eval", help="roll out a trained checkpoint")
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--rollouts", type=int, default=5)
    p_eval.add_argument("--config", default=None,
                        help="spec preset/file; defaults to spec.json next to the checkpoint")
    p_eval.add_argument("--seed", type=int, default=12345)
    p_eval.set_defaults(func=_cmd_eval)

    p_curves = sub.add_parser("curves", help="emit smoothed learning curves")
    p_curves.add_argument("--run", required=True)
    p_curves.set_defaults(func=_cmd_curves)

    p_cache = sub.add_parser("cache", help="inspect the result cache")
    p_cache.add_argument("action", choices=["stats"])
    p_cache.add_argument("--cache", default="runs/cache.tsv")
    p_cache.set_defaults(func=_cmd_cache)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # single categorized exit path
        for types, label, code in _ERROR_CODES:
            if isinstance(exc, types):
                print(f"error[{label}]: {exc}", file=sys.stderr)
                return code
        raise


if __name__ == "__main__":
    sys.exit(main())
