"""
Experiment configuration.

An ExperimentConfig is assembled in three layers: the profile (desk or paper
episode count), then an optional JSON file, then explicit overrides from the
command line. Validation failures surface as ConfigError.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeInt,
    PositiveInt,
    ValidationError,
    field_validator,
    model_validator,
)

from saginmc.constants import DEFAULT_OUTPUT_DIR, DEFAULT_SEEDS, EPISODE_LENGTH, PROFILE_EPISODES, SMOOTHING_WINDOW
from saginmc.errors import ConfigError
from saginmc.learning.agent import AgentConfig
from saginmc.learning.baselines import PolicyKind, parse_policy_kind
from saginmc.learning.dqn import DqnConfig
from saginmc.learning.ppo import PpoConfig
from saginmc.sim.channel import resolve_link_params
from saginmc.sim.env import EnvConfig, QosRequirement, RewardWeights, TrafficClass
from saginmc.sim.geometry import MobilityConfig

logger = logging.getLogger(__name__)

PROFILES: Dict[str, Dict[str, Any]] = {
    name: {"episodes": episodes} for name, episodes in PROFILE_EPISODES.items()
}


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    policies: List[str] = Field(default_factory=lambda: [kind.value for kind in PolicyKind])
    episodes: PositiveInt = PROFILE_EPISODES["paper"]
    steps_per_episode: int = Field(default=EPISODE_LENGTH, ge=2)
    seeds: List[int] = Field(default_factory=lambda: list(DEFAULT_SEEDS), min_length=1)
    weights: RewardWeights = Field(default_factory=RewardWeights)
    qos_class: TrafficClass = TrafficClass.EMBB
    mobility: MobilityConfig = Field(default_factory=MobilityConfig)
    link_overrides: Dict[str, Dict[str, float]] = Field(default_factory=dict)
    output_dir: str = DEFAULT_OUTPUT_DIR
    agent: AgentConfig = Field(default_factory=AgentConfig)
    dqn: DqnConfig = Field(default_factory=DqnConfig)
    ppo: PpoConfig = Field(default_factory=PpoConfig)
    log_steps: bool = False
    smoothing_window: PositiveInt = SMOOTHING_WINDOW
    save_checkpoints: bool = True
    frozen: bool = False
    snapshot_seed: Optional[NonNegativeInt] = None

    @field_validator("policies")
    @classmethod
    def _check_policies(cls, policies: List[str]) -> List[str]:
        if not policies:
            raise ValueError("At least one policy is required")
        kinds = []
        for name in policies:
            value = parse_policy_kind(name).value
            if value not in kinds:
                kinds.append(value)
        return kinds

    @field_validator("seeds")
    @classmethod
    def _check_seeds(cls, seeds: List[int]) -> List[int]:
        if any(seed < 0 for seed in seeds):
            raise ValueError(f"Seeds must be non-negative, got {seeds}")
        if len(set(seeds)) != len(seeds):
            raise ValueError(f"Seeds must be distinct, got {seeds}")
        return seeds

    @field_validator("link_overrides")
    @classmethod
    def _check_link_overrides(cls, overrides: Dict[str, Dict[str, float]]) -> Dict[str, Dict[str, float]]:
        try:
            resolve_link_params(overrides)
        except ValidationError as e:
            raise ValueError(f"Invalid link parameter override: {e}")
        return overrides

    @model_validator(mode="after")
    def _check_snapshot(self) -> "ExperimentConfig":
        if self.snapshot_seed is not None and not self.frozen:
            raise ValueError("snapshot_seed requires frozen=True")
        return self

    @property
    def policy_kinds(self) -> List[PolicyKind]:
        return [PolicyKind(name) for name in self.policies]

    def env_config(self) -> EnvConfig:
        return EnvConfig(
            mobility=self.mobility,
            link_overrides=self.link_overrides,
            qos=QosRequirement.for_class(self.qos_class),
            weights=self.weights,
            episode_length=self.steps_per_episode,
            frozen=self.frozen,
            snapshot_seed=self.snapshot_seed,
        )


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must hold a JSON object, got {type(data).__name__}")
    return data


def load_experiment_config(
    path: Optional[Union[str, Path]] = None,
    profile: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """Profile defaults, then the config file, then non-None overrides."""
    data: Dict[str, Any] = {}
    if profile is not None:
        if profile not in PROFILES:
            raise ConfigError(f"Unknown profile '{profile}'. Expected one of: {', '.join(PROFILES)}")
        data.update(PROFILES[profile])
    if path is not None:
        data.update(read_config_file(path))
    data.update({key: value for key, value in (overrides or {}).items() if value is not None})

    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid experiment configuration: {e}")
    logger.debug(
        f"Experiment config: policies={config.policies} episodes={config.episodes} seeds={config.seeds}"
    )
    return config
