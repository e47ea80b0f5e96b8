"""
Deep Q-learning baseline: epsilon-greedy over a 15-output Q network with a
hard-synchronized target network and max-bootstrap targets.
"""

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt, model_validator

from saginmc.constants import (
    BATCH_SIZE,
    DISCOUNT_FACTOR,
    DQN_EPSILON_DECAY_FRACTION,
    DQN_EPSILON_END,
    DQN_EPSILON_START,
    DQN_TARGET_SYNC_STEPS,
    HIDDEN_SIZES,
    LEARNING_RATE,
    REPLAY_CAPACITY,
    WARMUP_TRANSITIONS,
)
from saginmc.harness.metrics import EpisodeRecord
from saginmc.harness.seeding import derive_seed
from saginmc.learning.baselines import ArgmaxPolicy
from saginmc.learning.nn import AdamState, Head, Mlp, adam_step, greedy_argmax
from saginmc.learning.replay import ReplayBuffer, Transition, TransitionBatch
from saginmc.learning.rollout import EnvFactory, run_episodes

logger = logging.getLogger(__name__)


class DqnConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    gamma: float = Field(default=DISCOUNT_FACTOR, gt=0.0, lt=1.0)
    learning_rate: float = Field(default=LEARNING_RATE, gt=0.0)
    replay_capacity: PositiveInt = REPLAY_CAPACITY
    batch_size: PositiveInt = BATCH_SIZE
    warmup: NonNegativeInt = WARMUP_TRANSITIONS
    hidden_sizes: Tuple[int, ...] = HIDDEN_SIZES
    epsilon_start: float = Field(default=DQN_EPSILON_START, ge=0.0, le=1.0)
    epsilon_end: float = Field(default=DQN_EPSILON_END, ge=0.0, le=1.0)
    epsilon_decay_fraction: float = Field(default=DQN_EPSILON_DECAY_FRACTION, ge=0.0, le=1.0)
    target_sync_steps: PositiveInt = DQN_TARGET_SYNC_STEPS

    @model_validator(mode="after")
    def _check_epsilon(self):
        if self.epsilon_end > self.epsilon_start:
            raise ValueError(
                f"epsilon_end ({self.epsilon_end}) must not exceed epsilon_start ({self.epsilon_start})"
            )
        return self


def epsilon_schedule(
    episode: int,
    episodes: int,
    start: float = DQN_EPSILON_START,
    end: float = DQN_EPSILON_END,
    fraction: float = DQN_EPSILON_DECAY_FRACTION,
) -> float:
    """Linear anneal from `start` to `end` over the first `fraction` of episodes."""
    decay_episodes = fraction * episodes
    if decay_episodes <= 0:
        return end
    progress = min(episode / decay_episodes, 1.0)
    return start + progress * (end - start)


def dqn_targets(target_net: Mlp, batch: TransitionBatch, gamma: float) -> np.ndarray:
    q_next, _ = target_net.forward(batch.next_observations)
    return batch.rewards + gamma * (1.0 - batch.dones) * np.max(q_next, axis=1)


class DqnLearner:
    """Q network, target network and replay memory; drives itself through `observe`."""

    def __init__(
        self,
        observation_dim: int,
        n_actions: int,
        config: Optional[DqnConfig] = None,
        episodes: int = 1,
        seed: int = 0,
    ):
        self.config = config or DqnConfig()
        self.episodes = episodes
        self.n_actions = n_actions
        sizes = [observation_dim, *self.config.hidden_sizes, n_actions]
        self.q_net = Mlp(sizes, head=Head.IDENTITY, seed=derive_seed(seed, "q"))
        self.target_net = self.q_net.copy()
        self.optimizer = AdamState.for_net(self.q_net, lr=self.config.learning_rate)
        self.memory = ReplayBuffer(self.config.replay_capacity, seed=derive_seed(seed, "replay"))
        self.rng = np.random.default_rng(derive_seed(seed, "explore"))
        self.epsilon = self.config.epsilon_start
        self.steps = 0
        self.updates = 0
        self.losses: List[float] = []

    def begin_episode(self, episode: int, observation: np.ndarray) -> None:
        cfg = self.config
        self.epsilon = epsilon_schedule(
            episode, self.episodes, cfg.epsilon_start, cfg.epsilon_end, cfg.epsilon_decay_fraction
        )

    def act(self, observation: np.ndarray, step_index: int = 0) -> int:
        if self.rng.random() < self.epsilon:
            return int(self.rng.integers(0, self.n_actions))
        q_values, _ = self.q_net.forward(observation)
        return greedy_argmax(q_values)

    def observe(self, observation: np.ndarray, action: int, outcome) -> None:
        self.memory.add(Transition(observation, action, outcome.reward, outcome.observation, outcome.done))
        self.steps += 1
        if len(self.memory) >= max(self.config.warmup, self.config.batch_size):
            self.update(self.memory.sample(self.config.batch_size))
        if self.steps % self.config.target_sync_steps == 0:
            self.sync_target()

    def update(self, batch: TransitionBatch) -> float:
        """One Adam step on the squared TD error of `batch`."""
        size = len(batch)
        rows = np.arange(size)
        targets = dqn_targets(self.target_net, batch, self.config.gamma)
        q_values, cache = self.q_net.forward(batch.observations)
        td_errors = targets - q_values[rows, batch.actions]
        gradient = np.zeros_like(q_values)
        gradient[rows, batch.actions] = -2.0 * td_errors / size
        adam_step(self.q_net, self.q_net.backward(cache, gradient), self.optimizer)
        self.updates += 1
        loss = float(np.mean(td_errors ** 2))
        self.losses.append(loss)
        return loss

    def sync_target(self) -> None:
        self.target_net.set_flat(self.q_net.get_flat())

    def greedy_policy(self) -> ArgmaxPolicy:
        return ArgmaxPolicy(self.q_net)

    def networks(self):
        return {"q": self.q_net, "target_q": self.target_net}


def dqn_train(
    env_factory: EnvFactory,
    config: Optional[DqnConfig] = None,
    episodes: int = 1,
    steps_per_episode: int = 50,
    seed: int = 0,
    progress: Optional[bool] = None,
    step_log: Optional[List[Dict]] = None,
) -> Tuple[DqnLearner, List[EpisodeRecord]]:
    sample_env = env_factory()
    learner = DqnLearner(sample_env.observation_dim, sample_env.n_actions, config, episodes, seed=derive_seed(seed, "dqn"))
    logger.info(f"Training DQN baseline for {episodes} episodes (seed {seed})")
    records = run_episodes(
        env_factory, learner, episodes, steps_per_episode, seed, step_log=step_log, progress=progress, description="dqn"
    )
    logger.info(f"DQN training finished after {learner.updates} updates")
    return learner, records
