"""
Replay memory: a capacity-bounded ring buffer sampled uniformly.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np


@dataclass(frozen=True)
class Transition:
    observation: np.ndarray
    action: int
    reward: float
    next_observation: np.ndarray
    done: bool


@dataclass(frozen=True)
class TransitionBatch:
    """Column-stacked transitions."""
    observations: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_observations: np.ndarray
    dones: np.ndarray

    def __len__(self) -> int:
        return len(self.actions)

    @classmethod
    def from_transitions(cls, transitions: List[Transition]) -> "TransitionBatch":
        if not transitions:
            raise ValueError("Cannot build a batch from zero transitions")
        return cls(
            observations=np.stack([t.observation for t in transitions]),
            actions=np.array([t.action for t in transitions], dtype=np.int64),
            rewards=np.array([t.reward for t in transitions], dtype=np.float64),
            next_observations=np.stack([t.next_observation for t in transitions]),
            dones=np.array([t.done for t in transitions], dtype=np.float64),
        )


class ReplayBuffer:
    def __init__(self, capacity: int, seed: Optional[int] = None, rng: Optional[np.random.Generator] = None):
        if capacity < 1:
            raise ValueError(f"Replay capacity must be positive, got {capacity}")
        self.capacity = capacity
        self._items: List[Transition] = []
        self._next = 0
        self._rng = rng if rng is not None else np.random.default_rng(seed)

    def __len__(self) -> int:
        return len(self._items)

    def add(self, transition: Transition) -> None:
        if len(self._items) < self.capacity:
            self._items.append(transition)
        else:
            self._items[self._next] = transition
        self._next = (self._next + 1) % self.capacity

    def sample_indices(self, batch_size: int) -> np.ndarray:
        if batch_size > len(self._items):
            raise ValueError(f"Cannot sample {batch_size} transitions from a buffer of {len(self._items)}")
        return self._rng.integers(0, len(self._items), size=batch_size)

    def sample(self, batch_size: int) -> TransitionBatch:
        """Uniform sampling with replacement."""
        indices = self.sample_indices(batch_size)
        return TransitionBatch.from_transitions([self._items[i] for i in indices])
