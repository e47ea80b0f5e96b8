"""
Learning layer: the numeric substrate, the actor-critic agent and the
reference policies it is compared against.
"""

from .baselines import (
    ArgmaxPolicy,
    BsOnlyPolicy,
    GreedySnrPolicy,
    PolicyKind,
    RandomPolicy,
    RoundRobinPolicy,
    bs_only_policy,
    fixed_policy,
    greedy_snr_policy,
    parse_policy_kind,
    random_policy,
    round_robin_policy,
)
from .nn import AdamState, Head, Mlp, adam_step, gradient_check, mlp_backward, mlp_forward
from .replay import ReplayBuffer, Transition, TransitionBatch
from .rollout import Policy, episode_seed, run_episodes
from .agent import ActorCriticAgent, AgentConfig, select_action, soft_update, td_target, train, update
from .dqn import DqnConfig, DqnLearner, dqn_train, epsilon_schedule
from .ppo import PpoConfig, PpoLearner, clipped_surrogate_gradient, compute_gae, normalize_advantages, ppo_train
from .checkpoint import load_checkpoint, load_mlp, policy_from_checkpoint, save_checkpoint, save_mlp

__all__ = [
    # Baselines
    'ArgmaxPolicy',
    'BsOnlyPolicy',
    'GreedySnrPolicy',
    'PolicyKind',
    'RandomPolicy',
    'RoundRobinPolicy',
    'bs_only_policy',
    'fixed_policy',
    'greedy_snr_policy',
    'parse_policy_kind',
    'random_policy',
    'round_robin_policy',

    # Neural network substrate
    'AdamState',
    'Head',
    'Mlp',
    'adam_step',
    'gradient_check',
    'mlp_backward',
    'mlp_forward',

    # Replay memory and rollouts
    'ReplayBuffer',
    'Transition',
    'TransitionBatch',
    'Policy',
    'episode_seed',
    'run_episodes',

    # Actor-critic agent
    'ActorCriticAgent',
    'AgentConfig',
    'select_action',
    'soft_update',
    'td_target',
    'train',
    'update',

    # DQN and PPO
    'DqnConfig',
    'DqnLearner',
    'dqn_train',
    'epsilon_schedule',
    'PpoConfig',
    'PpoLearner',
    'clipped_surrogate_gradient',
    'compute_gae',
    'normalize_advantages',
    'ppo_train',

    # Checkpoints
    'load_checkpoint',
    'load_mlp',
    'policy_from_checkpoint',
    'save_checkpoint',
    'save_mlp',
]
