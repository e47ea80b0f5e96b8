"""
Proximal policy optimization baseline.

On-policy rollouts of fixed length, GAE advantages, the clipped ratio
objective with an entropy bonus, and a separate state-value network.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveInt

from saginmc.constants import (
    DISCOUNT_FACTOR,
    ENTROPY_COEF,
    HIDDEN_SIZES,
    POLICY_OUTPUT_SCALE,
    PPO_CLIP,
    PPO_EPOCHS,
    PPO_GAE_LAMBDA,
    PPO_LEARNING_RATE,
    PPO_MINIBATCH,
    PPO_ROLLOUT_STEPS,
)
from saginmc.harness.metrics import EpisodeRecord
from saginmc.harness.seeding import derive_seed
from saginmc.learning.baselines import ArgmaxPolicy
from saginmc.learning.nn import AdamState, Head, Mlp, adam_step, entropy, log_probabilities
from saginmc.learning.rollout import EnvFactory, run_episodes

logger = logging.getLogger(__name__)


class PpoConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    gamma: float = Field(default=DISCOUNT_FACTOR, gt=0.0, lt=1.0)
    gae_lambda: float = Field(default=PPO_GAE_LAMBDA, ge=0.0, le=1.0)
    clip: float = Field(default=PPO_CLIP, gt=0.0, lt=1.0)
    epochs: PositiveInt = PPO_EPOCHS
    minibatch_size: PositiveInt = PPO_MINIBATCH
    rollout_steps: PositiveInt = PPO_ROLLOUT_STEPS
    entropy_coef: NonNegativeFloat = ENTROPY_COEF
    learning_rate: float = Field(default=PPO_LEARNING_RATE, gt=0.0)
    hidden_sizes: Tuple[int, ...] = HIDDEN_SIZES


def compute_gae(
    rewards: np.ndarray,
    values: np.ndarray,
    dones: np.ndarray,
    last_value: float,
    gamma: float,
    lam: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """Generalized advantage estimates and the matching value targets.

    `dones[t]` cuts the bootstrap after step t; `last_value` is V of the
    state following the final step.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)
    advantages = np.zeros_like(rewards)
    running = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        next_value = last_value if t == len(rewards) - 1 else values[t + 1]
        nonterminal = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_value * nonterminal - values[t]
        running = delta + gamma * lam * nonterminal * running
        advantages[t] = running
    return advantages, advantages + values


def normalize_advantages(advantages: np.ndarray, eps: float = 1e-8) -> np.ndarray:
    advantages = np.asarray(advantages, dtype=np.float64)
    return (advantages - advantages.mean()) / (advantages.std() + eps)


def clipped_surrogate_gradient(
    probabilities: np.ndarray,
    log_probs: np.ndarray,
    old_log_probs: np.ndarray,
    actions: np.ndarray,
    advantages: np.ndarray,
    clip: float,
    entropy_coef: float = 0.0,
) -> Tuple[np.ndarray, float]:
    """dLoss/dLogits and the loss for the negated clipped objective minus the entropy bonus."""
    size = len(actions)
    rows = np.arange(size)
    ratio = np.exp(log_probs[rows, actions] - old_log_probs)
    unclipped = ratio * advantages
    clipped = np.clip(ratio, 1.0 - clip, 1.0 + clip) * advantages
    # gradient flows only where the unclipped term is the active minimum
    active = (unclipped <= clipped).astype(np.float64)
    entropies = entropy(probabilities, log_probs)
    loss = float(-np.mean(np.minimum(unclipped, clipped)) - entropy_coef * np.mean(entropies))

    one_hot = np.zeros_like(probabilities)
    one_hot[rows, actions] = 1.0
    gradient = -(active * unclipped)[:, None] * (one_hot - probabilities)
    gradient += entropy_coef * probabilities * (log_probs + entropies[:, None])
    return gradient / size, loss


@dataclass
class Rollout:
    observations: List[np.ndarray] = field(default_factory=list)
    actions: List[int] = field(default_factory=list)
    rewards: List[float] = field(default_factory=list)
    dones: List[float] = field(default_factory=list)
    log_probs: List[float] = field(default_factory=list)
    values: List[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.actions)


class PpoLearner:
    """Actor and value networks collecting on-policy rollouts."""

    def __init__(self, observation_dim: int, n_actions: int, config: Optional[PpoConfig] = None, seed: int = 0):
        self.config = config or PpoConfig()
        hidden = list(self.config.hidden_sizes)
        self.actor = Mlp(
            [observation_dim, *hidden, n_actions], head=Head.SOFTMAX,
            seed=derive_seed(seed, "actor"), output_scale=POLICY_OUTPUT_SCALE,
        )
        self.value_net = Mlp([observation_dim, *hidden, 1], head=Head.IDENTITY, seed=derive_seed(seed, "value"))
        self.actor_optimizer = AdamState.for_net(self.actor, lr=self.config.learning_rate)
        self.value_optimizer = AdamState.for_net(self.value_net, lr=self.config.learning_rate)
        self.rng = np.random.default_rng(derive_seed(seed, "policy"))
        self.rollout = Rollout()
        self._pending: Tuple[float, float] = (0.0, 0.0)
        self.updates = 0

    def value(self, observation: np.ndarray) -> float:
        output, _ = self.value_net.forward(observation)
        return float(output[0])

    def begin_episode(self, episode: int, observation: np.ndarray) -> None:
        pass

    def act(self, observation: np.ndarray, step_index: int = 0) -> int:
        probabilities, _ = self.actor.forward(observation)
        action = int(self.rng.choice(len(probabilities), p=probabilities))
        self._pending = (float(np.log(probabilities[action])), self.value(observation))
        return action

    def observe(self, observation: np.ndarray, action: int, outcome) -> None:
        log_prob, value = self._pending
        self.rollout.observations.append(observation)
        self.rollout.actions.append(action)
        self.rollout.rewards.append(outcome.reward)
        self.rollout.dones.append(float(outcome.done))
        self.rollout.log_probs.append(log_prob)
        self.rollout.values.append(value)
        if len(self.rollout) >= self.config.rollout_steps:
            last_value = 0.0 if outcome.done else self.value(outcome.observation)
            self.update(last_value)

    def update(self, last_value: float) -> None:
        """Several epochs of minibatch updates over the collected rollout, then discard it."""
        cfg = self.config
        rollout = self.rollout
        advantages, returns = compute_gae(
            np.array(rollout.rewards), np.array(rollout.values), np.array(rollout.dones),
            last_value, cfg.gamma, cfg.gae_lambda,
        )
        observations = np.stack(rollout.observations)
        actions = np.array(rollout.actions, dtype=np.int64)
        old_log_probs = np.array(rollout.log_probs)

        size = len(actions)
        for _ in range(cfg.epochs):
            order = self.rng.permutation(size)
            for start in range(0, size, cfg.minibatch_size):
                idx = order[start:start + cfg.minibatch_size]
                self._minibatch_step(observations[idx], actions[idx], old_log_probs[idx], advantages[idx], returns[idx])
        self.updates += 1
        logger.debug(f"PPO update {self.updates}: mean return target {returns.mean():.4f}")
        self.rollout = Rollout()

    def _minibatch_step(self, observations, actions, old_log_probs, advantages, returns) -> None:
        cfg = self.config
        advantages = normalize_advantages(advantages) if len(advantages) > 1 else advantages - advantages.mean()

        probabilities, actor_cache = self.actor.forward(observations)
        log_probs = log_probabilities(actor_cache.logits)
        logit_gradient, _ = clipped_surrogate_gradient(
            probabilities, log_probs, old_log_probs, actions, advantages, cfg.clip, cfg.entropy_coef
        )
        adam_step(self.actor, self.actor.backward_logits(actor_cache, logit_gradient), self.actor_optimizer)

        values, value_cache = self.value_net.forward(observations)
        value_gradient = 2.0 * (values - returns[:, None]) / len(returns)
        adam_step(self.value_net, self.value_net.backward(value_cache, value_gradient), self.value_optimizer)

    def greedy_policy(self) -> ArgmaxPolicy:
        return ArgmaxPolicy(self.actor)

    def networks(self):
        return {"actor": self.actor, "value": self.value_net}


def ppo_train(
    env_factory: EnvFactory,
    config: Optional[PpoConfig] = None,
    episodes: int = 1,
    steps_per_episode: int = 50,
    seed: int = 0,
    progress: Optional[bool] = None,
    step_log: Optional[List[Dict]] = None,
) -> Tuple[PpoLearner, List[EpisodeRecord]]:
    sample_env = env_factory()
    learner = PpoLearner(sample_env.observation_dim, sample_env.n_actions, config, seed=derive_seed(seed, "ppo"))
    logger.info(f"Training PPO baseline for {episodes} episodes (seed {seed})")
    records = run_episodes(
        env_factory, learner, episodes, steps_per_episode, seed, step_log=step_log, progress=progress, description="ppo"
    )
    logger.info(f"PPO training finished after {learner.updates} rollout updates")
    return learner, records
