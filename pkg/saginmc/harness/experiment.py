"""
Experiment runner: every requested policy on every seed, written to disk.

Output layout under the experiment's output directory:
    <policy>_seed<seed>.csv            one row per episode
    summary.csv                        last-10%-of-episodes means and stds across seeds
    steps/<policy>_seed<seed>.csv      per-step traces (when step logging is on)
    plot_data/                         smoothed curves and bar-chart tables
    checkpoints/<policy>_seed<seed>/   trained networks of the learning policies
"""

import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from saginmc.config import ExperimentConfig
from saginmc.constants import SUMMARY_TAIL_FRACTION, TRACE_COLUMNS
from saginmc.harness.metrics import EpisodeRecord, frame_to_records, records_to_frame
from saginmc.harness.seeding import derive_seed
from saginmc.learning.agent import train
from saginmc.learning.baselines import ArgmaxPolicy, PolicyKind, fixed_policy
from saginmc.learning.checkpoint import save_checkpoint
from saginmc.learning.dqn import dqn_train
from saginmc.learning.ppo import ppo_train
from saginmc.learning.rollout import EnvFactory, Policy, episode_seed, run_episodes
from saginmc.sim.env import SaginEnv
from saginmc.sim.io import write_step_trace

logger = logging.getLogger(__name__)

METRIC_COLUMNS = [column for column in TRACE_COLUMNS if column != "episode"]
SUMMARY_FILE = "summary.csv"
TRACE_PATTERN = re.compile(r"^(?P<policy>[a-z_]+)_seed(?P<seed>\d+)\.csv$")


@dataclass
class RunResult:
    """One (policy, seed) cell."""
    policy: PolicyKind
    seed: int
    records: List[EpisodeRecord]
    step_rows: Optional[List[Dict]] = None
    evaluation_policy: Optional[Policy] = None


@dataclass
class ExperimentResult:
    runs: List[RunResult]
    seed_summary: pd.DataFrame
    summary: pd.DataFrame
    output_dir: Path
    files: List[Path] = field(default_factory=list)


def trace_filename(policy: Union[str, PolicyKind], seed: int) -> str:
    return f"{PolicyKind(policy).value}_seed{seed}.csv"


def window_size(episodes: int, fraction: float = SUMMARY_TAIL_FRACTION) -> int:
    return max(1, math.ceil(fraction * episodes))


def summarize_records(records: List[EpisodeRecord], fraction: float = SUMMARY_TAIL_FRACTION) -> Dict[str, float]:
    """Means of every metric over the last `fraction` of episodes.

    `switch_rate_first` holds the switching rate over the first window,
    the reference point for the switching-decay check.
    """
    frame = records_to_frame(records)
    window = window_size(len(frame), fraction)
    summary = {column: float(frame[column].iloc[-window:].mean()) for column in METRIC_COLUMNS}
    summary["switch_rate_first"] = float(frame["switch_rate"].iloc[:window].mean())
    return summary


def seed_summary_table(runs: List[RunResult], fraction: float = SUMMARY_TAIL_FRACTION) -> pd.DataFrame:
    rows = []
    for run in runs:
        rows.append({"policy": run.policy.value, "seed": run.seed, **summarize_records(run.records, fraction)})
    return pd.DataFrame(rows, columns=["policy", "seed", *METRIC_COLUMNS, "switch_rate_first"])


def aggregate_summary(seed_summary: pd.DataFrame) -> pd.DataFrame:
    """Mean and population std across seeds, one row per policy in first-seen order."""
    rows = []
    for policy in pd.unique(seed_summary["policy"]):
        cells = seed_summary[seed_summary["policy"] == policy]
        row = {"policy": policy, "n_seeds": len(cells)}
        for column in METRIC_COLUMNS:
            values = cells[column].to_numpy(dtype=np.float64)
            row[f"{column}_mean"] = float(values.mean())
            row[f"{column}_std"] = float(values.std(ddof=0))
        rows.append(row)
    columns = ["policy", "n_seeds"]
    for column in METRIC_COLUMNS:
        columns.extend((f"{column}_mean", f"{column}_std"))
    return pd.DataFrame(rows, columns=columns)


def make_env_factory(config: ExperimentConfig) -> EnvFactory:
    env_config = config.env_config()
    return lambda: SaginEnv(env_config)


def run_policy(
    kind: PolicyKind,
    config: ExperimentConfig,
    seed: int,
    progress: Optional[bool] = None,
) -> Tuple[RunResult, Optional[object]]:
    """Train or run one policy on one seed; returns the result and the learner, if any."""
    kind = PolicyKind(kind)
    env_factory = make_env_factory(config)
    step_rows: Optional[List[Dict]] = [] if config.log_steps else None
    episodes, steps = config.episodes, config.steps_per_episode

    learner = None
    if kind is PolicyKind.PROPOSED:
        learner, records = train(env_factory, config.agent, episodes, steps, seed, progress, step_rows)
        evaluation_policy = ArgmaxPolicy(learner.actor)
    elif kind is PolicyKind.DQN:
        learner, records = dqn_train(env_factory, config.dqn, episodes, steps, seed, progress, step_rows)
        evaluation_policy = learner.greedy_policy()
    elif kind is PolicyKind.PPO:
        learner, records = ppo_train(env_factory, config.ppo, episodes, steps, seed, progress, step_rows)
        evaluation_policy = learner.greedy_policy()
    else:
        evaluation_policy = fixed_policy(kind, seed=derive_seed(seed, kind.value))
        records = run_episodes(
            env_factory, evaluation_policy, episodes, steps, seed,
            step_log=step_rows, progress=progress, description=kind.value,
        )
    return RunResult(kind, seed, records, step_rows, evaluation_policy), learner


def _prepare_output_dir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        logger.error(f"Cannot create output directory {path}: {e}")
        raise
    return path


def write_trace(records: List[EpisodeRecord], path: Path) -> Path:
    records_to_frame(records).to_csv(path, index=False)
    return path


def run_experiment(config: ExperimentConfig, progress: Optional[bool] = None) -> ExperimentResult:
    """Run every (policy, seed) cell, then write traces, summary and plot data."""
    from saginmc.harness.plotting import write_plot_data

    output_dir = _prepare_output_dir(Path(config.output_dir))
    logger.info(
        f"Running {len(config.policies)} policies x {len(config.seeds)} seeds, "
        f"{config.episodes} episodes of {config.steps_per_episode} steps, output in {output_dir}"
    )

    runs: List[RunResult] = []
    files: List[Path] = []
    for kind in config.policy_kinds:
        for seed in config.seeds:
            run, learner = run_policy(kind, config, seed, progress)
            runs.append(run)
            files.append(write_trace(run.records, output_dir / trace_filename(kind, seed)))
            if run.step_rows is not None:
                files.append(write_step_trace(run.step_rows, output_dir / "steps" / trace_filename(kind, seed)))
            if learner is not None and config.save_checkpoints:
                save_checkpoint(
                    output_dir / "checkpoints" / f"{kind.value}_seed{seed}",
                    kind,
                    learner.networks(),
                    {
                        "seed": seed,
                        "episodes": config.episodes,
                        "steps_per_episode": config.steps_per_episode,
                        "config": config.model_dump(mode="json"),
                    },
                )
            last = summarize_records(run.records)
            logger.info(
                f"{kind.value} seed {seed}: return={last['return']:.4f} "
                f"capacity={last['capacity_bps']:.4g} latency={last['latency_s']:.4g} power={last['power_w']:.3f}"
            )

    seed_summary = seed_summary_table(runs)
    summary = aggregate_summary(seed_summary)
    summary_path = output_dir / SUMMARY_FILE
    summary.to_csv(summary_path, index=False)
    files.append(summary_path)
    files.extend(write_plot_data(runs, summary, output_dir / "plot_data", config.smoothing_window))
    logger.info(f"Wrote {len(files)} files to {output_dir}")
    return ExperimentResult(runs, seed_summary, summary, output_dir, files)


def read_trace(path: Union[str, Path]) -> List[EpisodeRecord]:
    """Parse a trace CSV back into records, rejecting missing columns or values."""
    try:
        frame = pd.read_csv(path)
    except Exception as e:
        raise ValueError(f"Error parsing trace {path}: {str(e)}")
    if list(frame.columns) != TRACE_COLUMNS:
        raise ValueError(f"Trace {path} has columns {list(frame.columns)}, expected {TRACE_COLUMNS}")
    if frame.isna().any().any():
        raise ValueError(f"Trace {path} contains missing values")
    return frame_to_records(frame)


def load_runs(output_dir: Union[str, Path]) -> List[RunResult]:
    """Every trace CSV in `output_dir`, sorted by policy then seed."""
    output_dir = Path(output_dir)
    runs = []
    for path in sorted(output_dir.glob("*_seed*.csv")):
        match = TRACE_PATTERN.match(path.name)
        if not match:
            continue
        try:
            kind = PolicyKind(match.group("policy"))
        except ValueError:
            logger.warning(f"Skipping trace for unknown policy: {path.name}")
            continue
        runs.append(RunResult(kind, int(match.group("seed")), read_trace(path)))
    if not runs:
        raise ValueError(f"No trace CSVs found in {output_dir}")
    return runs


def summarize_output_dir(output_dir: Union[str, Path]) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Seed-level and aggregated summaries recomputed from the trace CSVs on disk."""
    seed_summary = seed_summary_table(load_runs(output_dir))
    return seed_summary, aggregate_summary(seed_summary)


def evaluate_policy(
    env_factory: EnvFactory,
    policy: Policy,
    episodes: int,
    steps_per_episode: int,
    seed: int,
    progress: Optional[bool] = None,
) -> List[EpisodeRecord]:
    """Run a fixed (already trained) policy without learning."""
    return run_episodes(env_factory, policy, episodes, steps_per_episode, seed, progress=progress, description="eval")


def oracle_agreement(
    env_factory: EnvFactory,
    policy: Policy,
    episodes: int,
    steps_per_episode: int,
    seed: int,
) -> float:
    """Fraction of steps where `policy` picks the exhaustive best action of the current snapshot.

    Meaningful on frozen environments, where the snapshot seen at decision
    time is the one the step is scored on.
    """
    matches, total = 0, 0
    env = env_factory()
    for episode in range(episodes):
        observation = env.reset(seed=episode_seed(seed, episode))
        policy.begin_episode(episode, observation)
        for step_index in range(steps_per_episode):
            best, _ = env.best_action()
            action = policy.act(observation, step_index)
            matches += int(action == best)
            total += 1
            outcome = env.step(action)
            observation = outcome.observation
            if outcome.done:
                break
    return matches / total
