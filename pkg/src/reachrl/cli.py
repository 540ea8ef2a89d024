"""Command line entry points: train, eval, compare, schedule."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys

import numpy as np
import yaml

from .config import RunConfig, load_config, profile_config
from .curriculum import schedule_curve
from .errors import ReachError
from .trainer import FINAL_EVAL_TAG, Trainer, build_env, compare, evaluate, train


def _add_config_flags(parser):
    parser.add_argument("--config", help="YAML config file overlaid on the profile")
    parser.add_argument("--profile", choices=("paper", "desk"), default="desk",
                        help="named defaults to start from (default: desk)")
    parser.add_argument("--reward", choices=("dense", "sparse"),
                        help="reward mode (default: config file or dense)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reachrl",
        description="Train and evaluate a goal-conditioned reacher with a "
                    "precision-decay curriculum.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run one training arm")
    _add_config_flags(p_train)
    p_train.add_argument("--seed", type=int, help="run seed")
    p_train.add_argument("--out-dir", default="runs/train", help="output directory")
    p_train.add_argument("--baseline", action="store_const", const=True, default=None,
                         help="train with a fixed precision instead of the schedule")
    p_train.add_argument("--resume", help="checkpoint to continue from")

    p_eval = sub.add_parser("eval", help="evaluate a checkpointed policy")
    p_eval.add_argument("--resume", required=True, help="checkpoint to evaluate")
    p_eval.add_argument("--goals", type=int, help="number of evaluation goals")
    p_eval.add_argument("--epsilon", type=float, help="required precision")
    p_eval.add_argument("--seed", type=int, help="evaluation goal seed")

    p_cmp = sub.add_parser("compare", help="curriculum arm vs fixed-precision arm")
    _add_config_flags(p_cmp)
    p_cmp.add_argument("--seeds", default="1,2,3", help="comma-separated seed list")
    p_cmp.add_argument("--out-dir", default="runs/compare", help="output directory")

    p_sched = sub.add_parser("schedule", help="emit the precision curve as CSV")
    _add_config_flags(p_sched)
    p_sched.add_argument("--epochs", type=int,
                         help="extend the curve past the decay length")
    p_sched.add_argument("--out", help="output CSV path (default: stdout)")
    return parser


def resolve_config(args) -> RunConfig:
    """profile defaults <- config file <- explicit flags, in that order."""
    data = {}
    if getattr(args, "config", None):
        with open(args.config) as f:
            data = yaml.safe_load(f) or {}
    reward = getattr(args, "reward", None) or data.get("reward") or "dense"
    base = profile_config(args.profile, reward)
    config = RunConfig.from_dict(data, base=base) if data else base
    overrides = {}
    if getattr(args, "reward", None):
        overrides["reward"] = args.reward
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "baseline", None) is not None:
        overrides["baseline"] = args.baseline
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config


def _cmd_train(args) -> int:
    if args.resume:
        trainer = Trainer.from_checkpoint(args.resume, out_dir=args.out_dir)
        print(f"resuming from {args.resume} at epoch {trainer.epochs_done}")
    else:
        trainer = Trainer(resolve_config(args), args.out_dir)
    result = trainer.run()
    summary = result.summary
    print(f"trained {summary['epochs']} epochs, {summary['acc_steps']} env steps")
    print(f"final success {summary['final_eval_success']:.3f} "
          f"at precision {summary['final_eval_epsilon']}")
    print(f"metrics: {result.metrics_path}")
    print(f"checkpoint: {result.checkpoint_path}")
    return 0


def _cmd_eval(args) -> int:
    trainer = Trainer.from_checkpoint(args.resume)
    config = trainer.config
    goals = args.goals if args.goals is not None else config.eval_goals
    epsilon = args.epsilon if args.epsilon is not None else config.resolved_eval_epsilon
    seed = args.seed if args.seed is not None else config.seed
    rng = np.random.default_rng([seed, FINAL_EVAL_TAG])
    rate = evaluate(trainer.agent.snapshot_policy(), build_env(config), goals,
                    epsilon, rng, config.steps_per_episode)
    print(f"success rate {rate:.3f} over {goals} goals at precision {epsilon}")
    return 0


def _cmd_compare(args) -> int:
    base = resolve_config(args)
    arm_curriculum = dataclasses.replace(base, baseline=False)
    arm_fixed = dataclasses.replace(base, baseline=True)
    seeds = [int(s) for s in str(args.seeds).split(",") if s.strip()]
    report = compare(arm_curriculum, arm_fixed, seeds, args.out_dir)
    for name, arm in report["arms"].items():
        print(f"{name}: median final success {arm['median_final_success']:.3f}, "
              f"median env steps {arm['median_acc_steps']}, "
              f"total wall {arm['total_wall_s']}s")
    print(f"report: {args.out_dir}/comparison_summary.json")
    return 0


def _cmd_schedule(args) -> int:
    config = resolve_config(args)
    curve = schedule_curve(config.schedule, epochs=args.epochs)
    rows = [["epoch", "epsilon"]] + [[int(k), eps] for k, eps in curve]
    if args.out:
        with open(args.out, "w", newline="") as f:
            csv.writer(f).writerows(rows)
        print(f"wrote {len(rows) - 1} points to {args.out}")
    else:
        csv.writer(sys.stdout).writerows(rows)
    return 0


COMMANDS = {
    "train": _cmd_train,
    "eval": _cmd_eval,
    "compare": _cmd_compare,
    "schedule": _cmd_schedule,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ReachError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
