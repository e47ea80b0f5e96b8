"""
Actor-critic link-selection agent.

Three networks: a softmax actor pi(.|s), a critic with one Q output per
action, and a target critic that trails the critic through soft updates.
Targets follow the expected-SARSA form r + gamma * sum_a pi(a|s') Q_target(s', a).
The actor follows the policy gradient weighted by the clipped TD error.
Transitions go through a replay memory and one update runs per environment
step once the warmup is filled.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, NonNegativeInt, PositiveInt

from saginmc.constants import (
    ADVANTAGE_CLIP,
    BATCH_SIZE,
    DISCOUNT_FACTOR,
    ENTROPY_COEF,
    HIDDEN_SIZES,
    LEARNING_RATE,
    POLICY_OUTPUT_SCALE,
    REPLAY_CAPACITY,
    TARGET_TAU,
    WARMUP_TRANSITIONS,
)
from saginmc.errors import ShapeError, TrainingError
from saginmc.harness.metrics import EpisodeRecord
from saginmc.harness.seeding import derive_seed
from saginmc.learning.nn import AdamState, Head, Mlp, adam_step, entropy, greedy_argmax, log_probabilities
from saginmc.learning.replay import ReplayBuffer, Transition, TransitionBatch
from saginmc.learning.rollout import EnvFactory, run_episodes

logger = logging.getLogger(__name__)


class AgentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    # 0 makes every step a one-shot bandit
    gamma: float = Field(default=DISCOUNT_FACTOR, ge=0.0, lt=1.0)
    entropy_coef: NonNegativeFloat = ENTROPY_COEF
    learning_rate: float = Field(default=LEARNING_RATE, gt=0.0)
    tau: float = Field(default=TARGET_TAU, gt=0.0, le=1.0)
    replay_capacity: PositiveInt = REPLAY_CAPACITY
    batch_size: PositiveInt = BATCH_SIZE
    warmup: NonNegativeInt = WARMUP_TRANSITIONS
    hidden_sizes: Tuple[int, ...] = HIDDEN_SIZES
    # "action": actor weights log pi by the TD error td_target - Q(s, a);
    # "state": by td_target - V(s) with V(s) = sum_a pi(a|s) Q(s, a)
    advantage: Literal["action", "state"] = "action"
    # Actor weights are clipped to [-advantage_clip, advantage_clip]
    advantage_clip: float = Field(default=ADVANTAGE_CLIP, gt=0.0)


@dataclass(frozen=True)
class UpdateStats:
    critic_loss: float
    actor_loss: float
    entropy: float


def select_action(actor: Mlp, observation: np.ndarray, rng: np.random.Generator, mode: str = "sample") -> int:
    """Sample from pi(.|s), or take its argmax (lowest index on ties) in greedy mode."""
    probabilities, _ = actor.forward(observation)
    if mode == "greedy":
        return greedy_argmax(probabilities)
    if mode != "sample":
        raise ValueError(f"Unknown action selection mode: {mode}")
    return int(rng.choice(len(probabilities), p=probabilities))


def expected_next_values(target_critic: Mlp, actor: Mlp, next_observations: np.ndarray) -> np.ndarray:
    probabilities, _ = actor.forward(next_observations)
    q_next, _ = target_critic.forward(next_observations)
    return np.sum(probabilities * q_next, axis=-1)


def td_targets(target_critic: Mlp, actor: Mlp, batch: TransitionBatch, gamma: float) -> np.ndarray:
    next_values = expected_next_values(target_critic, actor, batch.next_observations)
    return batch.rewards + gamma * (1.0 - batch.dones) * next_values


def td_target(target_critic: Mlp, actor: Mlp, transition: Transition, gamma: float) -> float:
    """Reward plus the discounted policy-expected target value of the next state."""
    if transition.done:
        return float(transition.reward)
    next_value = expected_next_values(target_critic, actor, transition.next_observation)
    return float(transition.reward + gamma * next_value)


def soft_update(critic: Mlp, target: Mlp, tau: float) -> Mlp:
    """target <- tau * critic + (1 - tau) * target, elementwise."""
    if not critic.same_shape(target):
        raise ShapeError(f"Cannot mix {critic!r} into {target!r}")
    for source, dest in zip(critic.parameters(), target.parameters()):
        dest *= 1.0 - tau
        dest += tau * source
    target.mark_updated()
    return target


class ActorCriticAgent:
    """Actor, critic and target critic with their optimizers and replay memory."""

    def __init__(self, observation_dim: int, n_actions: int, config: Optional[AgentConfig] = None, seed: int = 0):
        self.config = config or AgentConfig()
        self.seed = seed
        sizes = [observation_dim, *self.config.hidden_sizes, n_actions]
        self.actor = Mlp(
            sizes, head=Head.SOFTMAX, seed=derive_seed(seed, "actor"), output_scale=POLICY_OUTPUT_SCALE
        )
        self.critic = Mlp(sizes, head=Head.IDENTITY, seed=derive_seed(seed, "critic"))
        self.target_critic = self.critic.copy()
        self.actor_optimizer = AdamState.for_net(self.actor, lr=self.config.learning_rate)
        self.critic_optimizer = AdamState.for_net(self.critic, lr=self.config.learning_rate)
        self.memory = ReplayBuffer(self.config.replay_capacity, seed=derive_seed(seed, "replay"))
        self.rng = np.random.default_rng(derive_seed(seed, "policy"))
        self.updates = 0
        self.history: List[UpdateStats] = []

    @property
    def ready(self) -> bool:
        return len(self.memory) >= max(self.config.warmup, self.config.batch_size)

    def act(self, observation: np.ndarray, mode: str = "sample") -> int:
        return select_action(self.actor, observation, self.rng, mode)

    def remember(self, transition: Transition) -> None:
        self.memory.add(transition)

    def networks(self):
        return {"actor": self.actor, "critic": self.critic, "target_critic": self.target_critic}


def update(agent: ActorCriticAgent, batch: TransitionBatch) -> UpdateStats:
    """One critic and one actor Adam step on `batch`, then a soft target update."""
    cfg = agent.config
    if len(agent.memory) < cfg.warmup:
        raise TrainingError(f"Update requested with {len(agent.memory)} transitions; warmup is {cfg.warmup}")
    size = len(batch)
    rows = np.arange(size)

    targets = td_targets(agent.target_critic, agent.actor, batch, cfg.gamma)

    q_values, critic_cache = agent.critic.forward(batch.observations)
    td_errors = targets - q_values[rows, batch.actions]
    critic_loss = float(np.mean(td_errors ** 2))
    q_gradient = np.zeros_like(q_values)
    q_gradient[rows, batch.actions] = -2.0 * td_errors / size

    probabilities, actor_cache = agent.actor.forward(batch.observations)
    log_probs = log_probabilities(actor_cache.logits)
    entropies = entropy(probabilities, log_probs)
    if cfg.advantage == "state":
        advantages = targets - np.sum(probabilities * q_values, axis=1)
    else:
        advantages = td_errors
    # Zero stays zero; the bound keeps the entropy bonus able to hold pi away from one-hot
    advantages = np.clip(advantages, -cfg.advantage_clip, cfg.advantage_clip)
    chosen_log_probs = log_probs[rows, batch.actions]
    actor_loss = float(-np.mean(chosen_log_probs * advantages) - cfg.entropy_coef * np.mean(entropies))

    one_hot = np.zeros_like(probabilities)
    one_hot[rows, batch.actions] = 1.0
    logit_gradient = -advantages[:, None] * (one_hot - probabilities)
    logit_gradient += cfg.entropy_coef * probabilities * (log_probs + entropies[:, None])
    logit_gradient /= size

    critic_grads = agent.critic.backward(critic_cache, q_gradient)
    actor_grads = agent.actor.backward_logits(actor_cache, logit_gradient)
    adam_step(agent.critic, critic_grads, agent.critic_optimizer)
    adam_step(agent.actor, actor_grads, agent.actor_optimizer)
    soft_update(agent.critic, agent.target_critic, cfg.tau)

    agent.updates += 1
    stats = UpdateStats(critic_loss, actor_loss, float(np.mean(entropies)))
    agent.history.append(stats)
    return stats


class _TrainingPolicy:
    """Adapter that lets the shared rollout loop drive agent training."""

    def __init__(self, agent: ActorCriticAgent):
        self.agent = agent

    def begin_episode(self, episode: int, observation: np.ndarray) -> None:
        pass

    def act(self, observation: np.ndarray, step_index: int) -> int:
        return self.agent.act(observation, mode="sample")

    def observe(self, observation: np.ndarray, action: int, outcome) -> None:
        self.agent.remember(Transition(observation, action, outcome.reward, outcome.observation, outcome.done))
        if self.agent.ready:
            update(self.agent, self.agent.memory.sample(self.agent.config.batch_size))


def train(
    env_factory: EnvFactory,
    config: Optional[AgentConfig] = None,
    episodes: int = 1,
    steps_per_episode: int = 50,
    seed: int = 0,
    progress: Optional[bool] = None,
    step_log: Optional[List[Dict]] = None,
) -> Tuple[ActorCriticAgent, List[EpisodeRecord]]:
    """Interact and learn: sample an action, step, store, update after warmup."""
    config = config or AgentConfig()
    sample_env = env_factory()
    agent = ActorCriticAgent(sample_env.observation_dim, sample_env.n_actions, config, seed=derive_seed(seed, "proposed"))
    logger.info(f"Training actor-critic agent for {episodes} episodes (seed {seed})")
    records = run_episodes(
        env_factory,
        _TrainingPolicy(agent),
        episodes,
        steps_per_episode,
        seed,
        progress=progress,
        step_log=step_log,
        description="proposed",
    )
    logger.info(f"Actor-critic training finished after {agent.updates} updates")
    return agent, records
