"""
Partially observable link-selection environment.

Each step the agent picks a non-empty subset of {BS, UAV, HAP, LEO}. Selected
capacities add up (traffic aggregation), the fastest selected link sets the
latency (packet duplication) and power costs add up. The agent only observes
the links it selected at the previous step.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
    model_validator,
)

from saginmc.constants import (
    CAPACITY_NORM_BPS,
    DEFAULT_TRAFFIC_CLASS,
    EPISODE_LENGTH,
    FEATURES_PER_LINK,
    LATENCY_NORM_S,
    NUM_ACTIONS,
    NUM_LINKS,
    OBSERVATION_DIM,
    PACKET_BITS,
    POWER_NORM_W,
    QOS_PRESETS,
    REWARD_WEIGHTS,
    SNR_NORM_DB,
    UNAVAILABLE_LATENCY_FACTOR,
)
from saginmc.sim.channel import (
    LinkKind,
    LinkMetrics,
    advance_loads,
    evaluate_links,
    initial_loads,
    resolve_link_params,
)
from saginmc.sim.geometry import MobilityConfig, WorldState, advance_mobility, initial_world

logger = logging.getLogger(__name__)


class TrafficClass(str, Enum):
    EMBB = "eMBB"
    HRLLC = "HRLLC"
    MMTC = "mMTC"


_DEFAULT_QOS = QOS_PRESETS[DEFAULT_TRAFFIC_CLASS]


class QosRequirement(BaseModel):
    """End-to-end QoS thresholds of the UE's traffic (bits/s, s, W)."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    min_capacity: PositiveFloat = _DEFAULT_QOS[0]
    max_latency: PositiveFloat = _DEFAULT_QOS[1]
    max_power: PositiveFloat = _DEFAULT_QOS[2]
    traffic_class: TrafficClass = TrafficClass(DEFAULT_TRAFFIC_CLASS)

    @classmethod
    def for_class(cls, traffic_class: TrafficClass) -> "QosRequirement":
        traffic_class = TrafficClass(traffic_class)
        min_capacity, max_latency, max_power = QOS_PRESETS[traffic_class.value]
        return cls(
            min_capacity=min_capacity,
            max_latency=max_latency,
            max_power=max_power,
            traffic_class=traffic_class,
        )

    @property
    def unavailable_latency(self) -> float:
        """Latency charged to a link that cannot carry the packet at all."""
        return self.max_latency * UNAVAILABLE_LATENCY_FACTOR


class RewardWeights(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    w_capacity: NonNegativeFloat = REWARD_WEIGHTS[0]
    w_latency: NonNegativeFloat = REWARD_WEIGHTS[1]
    w_power: NonNegativeFloat = REWARD_WEIGHTS[2]
    capacity_norm: PositiveFloat = CAPACITY_NORM_BPS
    latency_norm: PositiveFloat = LATENCY_NORM_S
    power_norm: PositiveFloat = POWER_NORM_W


class EnvConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    mobility: MobilityConfig = Field(default_factory=MobilityConfig)
    link_overrides: Dict[str, Dict[str, float]] = Field(default_factory=dict)
    qos: QosRequirement = Field(default_factory=QosRequirement)
    weights: RewardWeights = Field(default_factory=RewardWeights)
    episode_length: PositiveInt = EPISODE_LENGTH
    packet_bits: PositiveInt = PACKET_BITS
    frozen: bool = False
    # Frozen only: every episode replays the snapshot drawn from this seed
    snapshot_seed: Optional[NonNegativeInt] = None

    @model_validator(mode="after")
    def _check_snapshot(self) -> "EnvConfig":
        if self.snapshot_seed is not None and not self.frozen:
            raise ValueError("snapshot_seed requires frozen=True")
        return self


@dataclass(frozen=True)
class LinkStateVector:
    """Per-link availability: +1 (AV) or -1 (NAV), in LinkKind order."""
    flags: Tuple[int, ...]

    def __post_init__(self):
        if len(self.flags) != NUM_LINKS or any(f not in (1, -1) for f in self.flags):
            raise ValueError(f"State vector needs {NUM_LINKS} entries of +1/-1, got {self.flags}")

    def __getitem__(self, kind: int) -> int:
        return self.flags[kind]

    def as_array(self) -> np.ndarray:
        return np.array(self.flags, dtype=np.float64)

    def to_string(self) -> str:
        return "".join("+" if f > 0 else "-" for f in self.flags)


class ActionSpec(NamedTuple):
    index: int
    mask: int
    links: Tuple[LinkKind, ...]


def action_mask(action: int) -> int:
    return validate_action(action) + 1


def action_links(action: int) -> Tuple[LinkKind, ...]:
    mask = action_mask(action)
    return tuple(kind for kind in LinkKind if mask & (1 << kind))


def action_from_links(links: Iterable[LinkKind]) -> int:
    mask = 0
    for kind in links:
        mask |= 1 << LinkKind(kind)
    if mask == 0:
        raise ValueError("An action must select at least one link")
    return mask - 1


def validate_action(action) -> int:
    """Return `action` as a plain int, rejecting anything outside [0, 14]."""
    if isinstance(action, bool) or not isinstance(action, (int, np.integer)):
        raise ValueError(f"Action must be an integer index, got {action!r}")
    if not 0 <= int(action) < NUM_ACTIONS:
        raise ValueError(f"Action index must lie in [0, {NUM_ACTIONS - 1}], got {action}")
    return int(action)


def enumerate_actions() -> List[ActionSpec]:
    return [ActionSpec(index, index + 1, action_links(index)) for index in range(NUM_ACTIONS)]


def availability_flags(metrics: Mapping[LinkKind, LinkMetrics], qos: QosRequirement) -> LinkStateVector:
    """AV when a link carries its even share of the capacity and meets latency and power."""
    capacity_share = qos.min_capacity / NUM_LINKS
    flags = []
    for kind in LinkKind:
        link = metrics[kind]
        available = (
            link.capacity >= capacity_share
            and link.latency <= qos.max_latency
            and link.power <= qos.max_power
        )
        flags.append(1 if available else -1)
    return LinkStateVector(tuple(flags))


def compute_reward(capacity: float, latency: float, power: float, weights: RewardWeights) -> float:
    return (
        weights.w_capacity * capacity / weights.capacity_norm
        - weights.w_latency * latency / weights.latency_norm
        - weights.w_power * power / weights.power_norm
    )


class ActionEvaluation(NamedTuple):
    capacity: float
    latency: float
    power: float
    reward: float


def evaluate_action(
    metrics: Mapping[LinkKind, LinkMetrics], action: int, weights: RewardWeights
) -> ActionEvaluation:
    selected = [metrics[kind] for kind in action_links(action)]
    capacity = sum(link.capacity for link in selected)
    latency = min(link.latency for link in selected)
    power = sum(link.power for link in selected)
    return ActionEvaluation(capacity, latency, power, compute_reward(capacity, latency, power, weights))


def brute_force_best_action(
    metrics: Mapping[LinkKind, LinkMetrics], weights: RewardWeights
) -> Tuple[int, float]:
    """Exhaustive search over all 15 subsets; lowest index wins ties."""
    best_action, best_reward = 0, -math.inf
    for spec in enumerate_actions():
        reward = evaluate_action(metrics, spec.index, weights).reward
        if reward > best_reward:
            best_action, best_reward = spec.index, reward
    return best_action, best_reward


def build_observation(
    metrics: Mapping[LinkKind, LinkMetrics], flags: LinkStateVector, previous_action: int
) -> np.ndarray:
    """Masked 31-dim observation: 4 features per selected link, then the action one-hot."""
    observation = np.zeros(OBSERVATION_DIM, dtype=np.float64)
    for kind in action_links(previous_action):
        base = FEATURES_PER_LINK * kind
        link = metrics[kind]
        observation[base] = 1.0
        observation[base + 1] = float(np.clip(link.snr / SNR_NORM_DB, -1.0, 1.0))
        observation[base + 2] = link.load
        observation[base + 3] = float(flags[kind])
    observation[NUM_LINKS * FEATURES_PER_LINK + previous_action] = 1.0
    return observation


@dataclass(frozen=True)
class StepOutcome:
    observation: np.ndarray
    reward: float
    capacity: float
    latency: float
    power: float
    state_vector: LinkStateVector
    done: bool
    action: int = 0
    step_index: int = 0


class SaginEnv:
    """Single-UE multiconnectivity environment; one owner steps it sequentially."""

    observation_dim = OBSERVATION_DIM
    n_actions = NUM_ACTIONS

    def __init__(self, config: Optional[EnvConfig] = None, seed: Optional[int] = None):
        self.config = config or EnvConfig()
        self.link_params = resolve_link_params(self.config.link_overrides)
        self._rng = np.random.default_rng(seed)
        self.world: Optional[WorldState] = None
        self.loads: Dict[LinkKind, float] = {}
        self.metrics: Dict[LinkKind, LinkMetrics] = {}
        self.previous_action = 0
        self.step_index = 0

    def _evaluate(self, rng: np.random.Generator) -> Dict[LinkKind, LinkMetrics]:
        return evaluate_links(
            self.world,
            self.link_params,
            self.loads,
            rng,
            packet_bits=self.config.packet_bits,
            unavailable_latency=self.config.qos.unavailable_latency,
        )

    def reset(self, seed: Optional[int] = None) -> np.ndarray:
        """Start a new episode; previous action is {BS}."""
        if seed is not None:
            self._rng = np.random.default_rng(seed)
        source = self._rng
        if self.config.snapshot_seed is not None:
            source = np.random.default_rng(self.config.snapshot_seed)
        self.world = initial_world(self.config.mobility, source)
        self.loads = initial_loads(source)
        self.metrics = self._evaluate(source)
        self.previous_action = 0
        self.step_index = 0
        flags = availability_flags(self.metrics, self.config.qos)
        return build_observation(self.metrics, flags, self.previous_action)

    def step(self, action: int) -> StepOutcome:
        action = validate_action(action)
        if self.world is None:
            raise RuntimeError("Environment must be reset before stepping")
        if self.step_index >= self.config.episode_length:
            raise RuntimeError("Episode finished; call reset() to start a new one")

        if not self.config.frozen:
            self.world = advance_mobility(self.world, self.config.mobility, self._rng)
            self.loads = advance_loads(self.loads, self._rng)
            self.metrics = self._evaluate(self._rng)
        self.step_index += 1

        evaluation = evaluate_action(self.metrics, action, self.config.weights)
        flags = availability_flags(self.metrics, self.config.qos)
        self.previous_action = action
        return StepOutcome(
            observation=build_observation(self.metrics, flags, action),
            reward=evaluation.reward,
            capacity=evaluation.capacity,
            latency=evaluation.latency,
            power=evaluation.power,
            state_vector=flags,
            done=self.step_index >= self.config.episode_length,
            action=action,
            step_index=self.step_index,
        )

    def best_action(self) -> Tuple[int, float]:
        """Oracle action for the current link snapshot."""
        return brute_force_best_action(self.metrics, self.config.weights)


def reset(seed: Optional[int], config: Optional[EnvConfig] = None) -> Tuple[SaginEnv, np.ndarray]:
    env = SaginEnv(config)
    return env, env.reset(seed)


def step(env: SaginEnv, action: int) -> StepOutcome:
    return env.step(action)
