import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

import pandas as pd

from saginmc.constants import (
    EXIT_CONFIG_ERROR,
    EXIT_FAILURE,
    EXIT_IO_ERROR,
    EXIT_OK,
    EXIT_ORDERING_VIOLATION,
    GRADCHECK_NETS,
    GRADCHECK_TOLERANCE,
)
from saginmc.errors import CheckpointError, ConfigError
from saginmc.startup import configure_logging, default_output_dir, default_profile, load_environment

logger = logging.getLogger(__name__)

EVAL_EPISODES = 100
REPORT_FILE = "report.txt"


def _add_experiment_arguments(parser: argparse.ArgumentParser, multi_policy: bool) -> None:
    parser.add_argument("--config", type=str, help="JSON file mirroring ExperimentConfig")
    parser.add_argument(
        "--profile", type=str, choices=["desk", "paper"], default=None,
        help="Episode-count profile applied before the config file (default: SAGINMC_PROFILE or desk)",
    )
    parser.add_argument(
        "--seed", type=int, action="append", dest="seeds",
        help="Master seed; repeat for several seeds (default: 0 1 2)",
    )
    parser.add_argument("--episodes", type=int, help="Episodes per run (overrides profile and config)")
    parser.add_argument("--steps", type=int, dest="steps_per_episode", help="Steps per episode (default: 50)")
    if multi_policy:
        parser.add_argument(
            "--policy", type=str, action="append", dest="policies",
            help="Policy to include; repeat for several (default: all seven)",
        )
    else:
        parser.add_argument("--policy", type=str, default="proposed", help="Policy to train (default: proposed)")
    parser.add_argument("--out", type=str, help="Output directory (default: SAGINMC_OUTPUT_DIR or results)")
    parser.add_argument("--log-steps", action="store_true", help="Also write per-step traces")
    parser.add_argument("--frozen", action="store_true", help="Freeze mobility and loads within each episode")
    parser.add_argument(
        "--snapshot-seed", type=int, default=None,
        help="With --frozen, replay the snapshot drawn from this seed in every episode",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saginmc",
        description="SAGIN multiconnectivity simulator with an actor-critic link-selection agent.",
    )
    parser.add_argument("--log-level", type=str, default=None, help="Logging level (default: SAGINMC_LOG_LEVEL or INFO)")
    parser.add_argument("--no-progress", action="store_true", help="Disable training progress bars")
    subparsers = parser.add_subparsers(dest="command", required=True)

    train_parser = subparsers.add_parser("train", help="Train or run a single policy")
    _add_experiment_arguments(train_parser, multi_policy=False)

    compare_parser = subparsers.add_parser("compare", help="Run the baseline sweep and report orderings")
    _add_experiment_arguments(compare_parser, multi_policy=True)
    compare_parser.add_argument(
        "--strict", action="store_true", help="Exit with code 4 when an expected ordering is violated"
    )
    compare_parser.add_argument(
        "--from-dir", type=str, default=None, help="Skip the runs and compare the traces already in this directory"
    )

    eval_parser = subparsers.add_parser("eval", help="Evaluate a saved checkpoint greedily")
    eval_parser.add_argument("--checkpoint", type=str, required=True, help="Checkpoint directory")
    eval_parser.add_argument("--config", type=str, help="JSON file mirroring ExperimentConfig")
    eval_parser.add_argument("--seed", type=int, default=0, help="Evaluation seed (default: 0)")
    eval_parser.add_argument("--episodes", type=int, default=EVAL_EPISODES, help="Evaluation episodes (default: 100)")
    eval_parser.add_argument("--out", type=str, default=None, help="Write the evaluation trace into this directory")
    eval_parser.add_argument("--frozen", action="store_true", help="Evaluate on frozen snapshots and report oracle agreement")
    eval_parser.add_argument(
        "--snapshot-seed", type=int, default=None, help="With --frozen, evaluate on the snapshot drawn from this seed"
    )

    grad_parser = subparsers.add_parser("gradcheck", help="Finite-difference check of the network gradients")
    grad_parser.add_argument("--count", type=int, default=GRADCHECK_NETS, help="Number of random networks (default: 20)")
    grad_parser.add_argument("--seed", type=int, default=0, help="Seed for the random networks (default: 0)")

    subparsers.add_parser("physics", help="Print the link-budget anchor table")

    plot_parser = subparsers.add_parser("plot", help="Render figures from plot data")
    plot_parser.add_argument("--from-dir", type=str, default=None, help="Experiment output directory (default: --out)")
    plot_parser.add_argument("--out", type=str, default=None, help="Figure directory (default: <from-dir>/figures)")
    return parser


def _experiment_config(args: argparse.Namespace, policies: Optional[List[str]]):
    from saginmc.config import load_experiment_config

    overrides = {
        "policies": policies,
        "episodes": args.episodes,
        "steps_per_episode": args.steps_per_episode,
        "seeds": args.seeds,
        "output_dir": args.out,
        "log_steps": True if args.log_steps else None,
        "frozen": True if args.frozen else None,
        "snapshot_seed": args.snapshot_seed,
    }
    config = load_experiment_config(args.config, profile=args.profile or default_profile(), overrides=overrides)
    if "output_dir" not in config.model_fields_set:
        config = config.model_copy(update={"output_dir": default_output_dir()})
    return config


def _cmd_train(args: argparse.Namespace) -> int:
    from saginmc.harness.experiment import run_experiment

    config = _experiment_config(args, [args.policy])
    run_experiment(config)
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    from saginmc.harness.compare import compare
    from saginmc.harness.experiment import run_experiment, summarize_output_dir

    if args.from_dir:
        output_dir = Path(args.from_dir)
        try:
            seed_summary, _ = summarize_output_dir(output_dir)
        except ValueError as e:
            logger.error(f"Cannot read traces from {output_dir}: {e}")
            return EXIT_IO_ERROR
    else:
        config = _experiment_config(args, args.policies)
        result = run_experiment(config)
        output_dir, seed_summary = result.output_dir, result.seed_summary

    report = compare(seed_summary)
    text = report.to_text()
    print(text)
    (output_dir / REPORT_FILE).write_text(text + "\n")
    if args.strict and not report.passed:
        logger.error(f"{len(report.violations)} expected orderings violated")
        return EXIT_ORDERING_VIOLATION
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    from saginmc.config import load_experiment_config
    from saginmc.harness.experiment import (
        evaluate_policy,
        make_env_factory,
        oracle_agreement,
        summarize_records,
        trace_filename,
        write_trace,
    )
    from saginmc.learning.checkpoint import policy_from_checkpoint

    kind, policy = policy_from_checkpoint(args.checkpoint)
    overrides = {"frozen": True, "snapshot_seed": args.snapshot_seed} if args.frozen else None
    config = load_experiment_config(args.config, overrides=overrides)
    env_factory = make_env_factory(config)

    records = evaluate_policy(env_factory, policy, args.episodes, config.steps_per_episode, args.seed)
    summary = summarize_records(records, fraction=1.0)
    print(f"Greedy evaluation of {kind.value} over {args.episodes} episodes (seed {args.seed}):")
    for metric, value in summary.items():
        if metric != "switch_rate_first":
            print(f"  {metric}: {value:.6g}")
    if config.frozen:
        agreement = oracle_agreement(env_factory, policy, args.episodes, config.steps_per_episode, args.seed)
        print(f"  oracle agreement: {agreement:.3f}")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = write_trace(records, out_dir / f"eval_{trace_filename(kind, args.seed)}")
        logger.info(f"Wrote evaluation trace to {path}")
    return EXIT_OK


def _cmd_gradcheck(args: argparse.Namespace) -> int:
    from saginmc.harness.verification import run_gradient_checks

    results = run_gradient_checks(count=args.count, seed=args.seed)
    table = pd.DataFrame(
        [{"net": r.index, "layers": "-".join(map(str, r.layer_sizes)), "head": r.head,
          "max_rel_error": r.max_relative_error} for r in results]
    )
    print(table.to_string(index=False))
    worst = table["max_rel_error"].max()
    print(f"worst relative error: {worst:.3e} (tolerance {GRADCHECK_TOLERANCE:.0e})")
    return EXIT_OK if worst < GRADCHECK_TOLERANCE else EXIT_FAILURE


def _cmd_physics(args: argparse.Namespace) -> int:
    from saginmc.harness.verification import physics_anchors

    table = physics_anchors()
    print(table.to_string(index=False))
    return EXIT_OK if table["ok"].all() else EXIT_FAILURE


def _cmd_plot(args: argparse.Namespace) -> int:
    from saginmc.harness.plotting import render_figures

    source = Path(args.from_dir or default_output_dir())
    figure_dir = Path(args.out) if args.out else source / "figures"
    try:
        render_figures(source / "plot_data", figure_dir)
    except ValueError as e:
        logger.error(str(e))
        return EXIT_IO_ERROR
    return EXIT_OK


COMMANDS = {
    "train": _cmd_train,
    "compare": _cmd_compare,
    "eval": _cmd_eval,
    "gradcheck": _cmd_gradcheck,
    "physics": _cmd_physics,
    "plot": _cmd_plot,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    load_environment()
    if args.no_progress:
        os.environ["SAGINMC_DISABLE_PROGRESS"] = "1"
    try:
        configure_logging(args.log_level)
    except ValueError as e:
        print(f"saginmc: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG_ERROR
    except (CheckpointError, OSError) as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO_ERROR


if __name__ == "__main__":
    sys.exit(main())
