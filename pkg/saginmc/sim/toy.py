"""
Two-state, two-action deterministic MDP with the same reset/step interface as
SaginEnv, plus a value-iteration oracle for its optimal policy.

State 0: action 0 moves to state 1 with no reward, action 1 stays with a
small reward. State 1: action 0 stays with reward 1, action 1 falls back to
state 0 with no reward. With a far-sighted discount the optimum is action 0
in both states, which a myopic learner misses in state 0.
"""

from typing import Optional, Tuple

import numpy as np

from saginmc.constants import EPISODE_LENGTH
from saginmc.sim.env import LinkStateVector, StepOutcome

# (next_state, reward) indexed by [state][action]
TRANSITIONS = (
    ((1, 0.0), (0, 0.3)),
    ((1, 1.0), (0, 0.0)),
)
NUM_STATES = 2
NUM_TOY_ACTIONS = 2

_NEUTRAL_FLAGS = LinkStateVector((1, 1, 1, 1))


class TwoStateMdp:
    observation_dim = NUM_STATES
    n_actions = NUM_TOY_ACTIONS

    def __init__(
        self, episode_length: int = EPISODE_LENGTH, seed: Optional[int] = None, terminal_at_end: bool = False
    ):
        self.episode_length = episode_length
        # Off: the last step is a time limit and still bootstraps, matching value_iteration
        self.terminal_at_end = terminal_at_end
        self.state = 0
        self.step_index = 0

    def _observation(self) -> np.ndarray:
        observation = np.zeros(NUM_STATES, dtype=np.float64)
        observation[self.state] = 1.0
        return observation

    def reset(self, seed: Optional[int] = None) -> np.ndarray:
        self.state = 0
        self.step_index = 0
        return self._observation()

    def step(self, action: int) -> StepOutcome:
        if not 0 <= int(action) < NUM_TOY_ACTIONS:
            raise ValueError(f"Toy action must be 0 or 1, got {action}")
        if self.step_index >= self.episode_length:
            raise RuntimeError("Episode finished; call reset() to start a new one")
        self.state, reward = TRANSITIONS[self.state][int(action)]
        self.step_index += 1
        return StepOutcome(
            observation=self._observation(),
            reward=reward,
            capacity=0.0,
            latency=0.0,
            power=0.0,
            state_vector=_NEUTRAL_FLAGS,
            done=self.terminal_at_end and self.step_index >= self.episode_length,
            action=int(action),
            step_index=self.step_index,
        )


def value_iteration(gamma: float, tolerance: float = 1e-12, max_sweeps: int = 100_000) -> Tuple[np.ndarray, np.ndarray]:
    """Optimal Q table and greedy policy of the toy MDP (continuing, no episode end)."""
    q = np.zeros((NUM_STATES, NUM_TOY_ACTIONS))
    for _ in range(max_sweeps):
        updated = np.empty_like(q)
        for state in range(NUM_STATES):
            for action in range(NUM_TOY_ACTIONS):
                next_state, reward = TRANSITIONS[state][action]
                updated[state, action] = reward + gamma * q[next_state].max()
        if np.max(np.abs(updated - q)) < tolerance:
            q = updated
            break
        q = updated
    return q, np.argmax(q, axis=1)
