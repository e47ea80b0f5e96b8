"""
Shared interaction loop for every policy, learning or not.

A policy sees the same observation stream through three hooks:
`begin_episode` after each reset, `act` before each step and `observe`
after it. Learners train inside `observe`; fixed policies ignore it.
"""

import logging
from typing import Callable, Dict, List, Optional, Protocol

import numpy as np
from tqdm import tqdm

from saginmc.harness.metrics import EpisodeAccumulator, EpisodeRecord
from saginmc.harness.seeding import derive_seed
from saginmc.sim.env import StepOutcome
from saginmc.sim.io import step_row
from saginmc.startup import progress_disabled

logger = logging.getLogger(__name__)


class Policy(Protocol):
    def begin_episode(self, episode: int, observation: np.ndarray) -> None: ...

    def act(self, observation: np.ndarray, step_index: int) -> int: ...

    def observe(self, observation: np.ndarray, action: int, outcome: StepOutcome) -> None: ...


EnvFactory = Callable[[], object]


def episode_seed(seed: int, episode: int) -> int:
    """Environment seed for one episode; independent of the policy being run."""
    return derive_seed(seed, "env", episode)


def run_episodes(
    env_factory: EnvFactory,
    policy: Policy,
    episodes: int,
    steps_per_episode: int,
    seed: int,
    step_log: Optional[List[Dict]] = None,
    progress: Optional[bool] = None,
    description: str = "episodes",
) -> List[EpisodeRecord]:
    """Run `episodes` episodes of at most `steps_per_episode` steps each."""
    if episodes < 1:
        raise ValueError(f"Need at least one episode, got {episodes}")
    if steps_per_episode < 2:
        raise ValueError(f"Episodes need at least 2 steps to measure switching, got {steps_per_episode}")

    show = (not progress_disabled()) if progress is None else progress
    env = env_factory()
    records: List[EpisodeRecord] = []
    for episode in tqdm(range(episodes), desc=description, disable=not show, leave=False):
        observation = env.reset(seed=episode_seed(seed, episode))
        policy.begin_episode(episode, observation)
        accumulator = EpisodeAccumulator(episode)
        for step_index in range(steps_per_episode):
            action = policy.act(observation, step_index)
            outcome = env.step(action)
            policy.observe(observation, action, outcome)
            accumulator.add(action, outcome)
            if step_log is not None:
                step_log.append(step_row(episode, outcome))
            observation = outcome.observation
            if outcome.done:
                break
        record = accumulator.record()
        records.append(record)
        logger.debug(
            f"{description} {episode}: return={record.episode_return:.4f} "
            f"switch_rate={record.switch_rate:.3f}"
        )
    return records
