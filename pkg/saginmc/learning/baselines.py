"""
Reference link-selection policies.

The fixed rules (random, round-robin, greedy-SNR, BS-only) are plain
functions of their inputs plus thin Policy adapters for the shared rollout
loop. DQN and PPO live in their own modules; `ArgmaxPolicy` evaluates any
trained network greedily.
"""

from enum import Enum
from typing import Optional, Sequence

import numpy as np

from saginmc.constants import FEATURES_PER_LINK, GREEDY_OPTIMISTIC_SNR_DB, NUM_ACTIONS, NUM_LINKS, SNR_NORM_DB
from saginmc.learning.nn import Mlp, greedy_argmax
from saginmc.sim.channel import LinkKind
from saginmc.sim.env import action_from_links

# singleton subsets in BS -> UAV -> HAP -> LEO order
SINGLETON_ACTIONS = tuple(action_from_links([kind]) for kind in LinkKind)
BS_ONLY_ACTION = SINGLETON_ACTIONS[LinkKind.BS]


class PolicyKind(str, Enum):
    RANDOM = "random"
    ROUND_ROBIN = "round_robin"
    GREEDY_SNR = "greedy_snr"
    BS_ONLY = "bs_only"
    DQN = "dqn"
    PPO = "ppo"
    PROPOSED = "proposed"

    @property
    def learns(self) -> bool:
        return self in (PolicyKind.DQN, PolicyKind.PPO, PolicyKind.PROPOSED)


def parse_policy_kind(name: str) -> PolicyKind:
    try:
        return PolicyKind(str(name).lower().replace("-", "_"))
    except ValueError:
        valid = ", ".join(kind.value for kind in PolicyKind)
        raise ValueError(f"Unknown policy '{name}'. Expected one of: {valid}")


def random_policy(rng: np.random.Generator) -> int:
    """Uniform over all 15 non-empty subsets."""
    return int(rng.integers(0, NUM_ACTIONS))


def round_robin_policy(step_index: int) -> int:
    return SINGLETON_ACTIONS[step_index % NUM_LINKS]


def greedy_snr_policy(snrs: Sequence[float]) -> int:
    """Singleton subset of the highest-SNR link; lowest index on ties."""
    if len(snrs) != NUM_LINKS:
        raise ValueError(f"Expected {NUM_LINKS} SNR values, got {len(snrs)}")
    return SINGLETON_ACTIONS[greedy_argmax(np.asarray(snrs, dtype=np.float64))]


def bs_only_policy() -> int:
    return BS_ONLY_ACTION


class _FixedPolicy:
    """Base for policies that never learn."""

    def begin_episode(self, episode: int, observation: np.ndarray) -> None:
        pass

    def observe(self, observation: np.ndarray, action: int, outcome) -> None:
        pass


class RandomPolicy(_FixedPolicy):
    def __init__(self, seed: Optional[int] = None):
        self.rng = np.random.default_rng(seed)

    def act(self, observation: np.ndarray, step_index: int) -> int:
        return random_policy(self.rng)


class RoundRobinPolicy(_FixedPolicy):
    def act(self, observation: np.ndarray, step_index: int) -> int:
        return round_robin_policy(step_index)


class BsOnlyPolicy(_FixedPolicy):
    def act(self, observation: np.ndarray, step_index: int) -> int:
        return bs_only_policy()


class GreedySnrPolicy(_FixedPolicy):
    """Greedy on the last SNR seen per link.

    Links report SNR only while selected, so unseen links start at an
    optimistic estimate and each gets probed once per episode.
    """

    def __init__(self, optimistic_snr_db: float = GREEDY_OPTIMISTIC_SNR_DB):
        self.optimistic_snr_db = optimistic_snr_db
        self.estimates = np.full(NUM_LINKS, optimistic_snr_db)

    def begin_episode(self, episode: int, observation: np.ndarray) -> None:
        self.estimates = np.full(NUM_LINKS, self.optimistic_snr_db)
        self._absorb(observation)

    def _absorb(self, observation: np.ndarray) -> None:
        for kind in LinkKind:
            base = FEATURES_PER_LINK * kind
            if observation[base] > 0.5:
                self.estimates[kind] = observation[base + 1] * SNR_NORM_DB

    def act(self, observation: np.ndarray, step_index: int) -> int:
        return greedy_snr_policy(self.estimates)

    def observe(self, observation: np.ndarray, action: int, outcome) -> None:
        self._absorb(outcome.observation)


class ArgmaxPolicy(_FixedPolicy):
    """Greedy evaluation of a trained actor or Q network."""

    def __init__(self, net: Mlp):
        self.net = net

    def act(self, observation: np.ndarray, step_index: int) -> int:
        output, _ = self.net.forward(observation)
        return greedy_argmax(output)


def fixed_policy(kind: PolicyKind, seed: Optional[int] = None) -> _FixedPolicy:
    """Policy object for one of the non-learning kinds."""
    kind = PolicyKind(kind)
    if kind is PolicyKind.RANDOM:
        return RandomPolicy(seed)
    if kind is PolicyKind.ROUND_ROBIN:
        return RoundRobinPolicy()
    if kind is PolicyKind.GREEDY_SNR:
        return GreedySnrPolicy()
    if kind is PolicyKind.BS_ONLY:
        return BsOnlyPolicy()
    raise ValueError(f"Policy '{kind.value}' learns; train it instead")
