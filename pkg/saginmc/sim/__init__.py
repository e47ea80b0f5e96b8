"""
Simulation layer: world geometry, link budgets and the link-selection environment.
"""

from .geometry import (
    LeoState,
    MobilityConfig,
    Position3D,
    UavState,
    WorldState,
    advance_mobility,
    elevation_angle,
    initial_world,
    slant_distance,
)
from .channel import (
    LinkKind,
    LinkMetrics,
    LinkParams,
    default_link_params,
    evaluate_links,
    link_capacity,
    link_latency,
    los_probability,
    noise_floor_dbm,
    path_loss_db,
    snr_db,
)
from .env import (
    ActionSpec,
    EnvConfig,
    LinkStateVector,
    QosRequirement,
    RewardWeights,
    SaginEnv,
    StepOutcome,
    TrafficClass,
    availability_flags,
    brute_force_best_action,
    compute_reward,
    enumerate_actions,
    evaluate_action,
    reset,
    step,
)
from .io import read_step_trace, step_row, write_step_trace
from .toy import TwoStateMdp, value_iteration

__all__ = [
    # Geometry
    'LeoState',
    'MobilityConfig',
    'Position3D',
    'UavState',
    'WorldState',
    'advance_mobility',
    'elevation_angle',
    'initial_world',
    'slant_distance',

    # Channel
    'LinkKind',
    'LinkMetrics',
    'LinkParams',
    'default_link_params',
    'evaluate_links',
    'link_capacity',
    'link_latency',
    'los_probability',
    'noise_floor_dbm',
    'path_loss_db',
    'snr_db',

    # Environment
    'ActionSpec',
    'EnvConfig',
    'LinkStateVector',
    'QosRequirement',
    'RewardWeights',
    'SaginEnv',
    'StepOutcome',
    'TrafficClass',
    'availability_flags',
    'brute_force_best_action',
    'compute_reward',
    'enumerate_actions',
    'evaluate_action',
    'reset',
    'step',

    # I/O
    'read_step_trace',
    'step_row',
    'write_step_trace',

    # Toy MDP
    'TwoStateMdp',
    'value_iteration',
]
