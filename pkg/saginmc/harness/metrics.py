"""
Per-episode aggregates and series helpers.
"""

from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd

from saginmc.constants import TRACE_COLUMNS


@dataclass(frozen=True)
class EpisodeRecord:
    episode: int
    episode_return: float
    capacity: float
    latency: float
    power: float
    switch_rate: float

    def to_row(self) -> Dict[str, float]:
        return {
            "episode": self.episode,
            "return": self.episode_return,
            "capacity_bps": self.capacity,
            "latency_s": self.latency,
            "power_w": self.power,
            "switch_rate": self.switch_rate,
        }


def switching_rate(actions: Sequence[int]) -> float:
    """Fraction of consecutive steps whose selected subset changed."""
    if len(actions) < 2:
        raise ValueError(f"Switching rate needs at least 2 actions, got {len(actions)}")
    switches = sum(1 for prev, cur in zip(actions[:-1], actions[1:]) if prev != cur)
    return switches / (len(actions) - 1)


def moving_average(series: Sequence[float], window: int) -> List[float]:
    """Trailing mean over min(window, i + 1) items; same length as the input."""
    if window < 1:
        raise ValueError(f"Window must be at least 1, got {window}")
    values = np.asarray(series, dtype=np.float64)
    if values.size == 0:
        return []
    cumulative = np.concatenate(([0.0], np.cumsum(values)))
    idx = np.arange(1, values.size + 1)
    start = np.maximum(idx - window, 0)
    return list((cumulative[idx] - cumulative[start]) / (idx - start))


class EpisodeAccumulator:
    """Collects one episode's per-step outcomes into an EpisodeRecord."""

    def __init__(self, episode: int):
        self.episode = episode
        self.rewards: List[float] = []
        self.capacities: List[float] = []
        self.latencies: List[float] = []
        self.powers: List[float] = []
        self.actions: List[int] = []

    def add(self, action: int, outcome) -> None:
        self.actions.append(int(action))
        self.rewards.append(outcome.reward)
        self.capacities.append(outcome.capacity)
        self.latencies.append(outcome.latency)
        self.powers.append(outcome.power)

    def record(self) -> EpisodeRecord:
        return EpisodeRecord(
            episode=self.episode,
            episode_return=float(np.sum(self.rewards)),
            capacity=float(np.mean(self.capacities)),
            latency=float(np.mean(self.latencies)),
            power=float(np.mean(self.powers)),
            switch_rate=switching_rate(self.actions),
        )


def records_to_frame(records: Sequence[EpisodeRecord]) -> pd.DataFrame:
    return pd.DataFrame([r.to_row() for r in records], columns=TRACE_COLUMNS)


def frame_to_records(frame: pd.DataFrame) -> List[EpisodeRecord]:
    return [
        EpisodeRecord(
            episode=int(row["episode"]),
            episode_return=float(row["return"]),
            capacity=float(row["capacity_bps"]),
            latency=float(row["latency_s"]),
            power=float(row["power_w"]),
            switch_rate=float(row["switch_rate"]),
        )
        for _, row in frame.iterrows()
    ]


