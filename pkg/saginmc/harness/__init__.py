"""
Experiment harness: episode metrics, seed fan-out, experiment runs and reports.

Only the lightweight helpers are re-exported here; the runner, comparison,
verification and plotting modules are imported by their full path.
"""

from .metrics import EpisodeAccumulator, EpisodeRecord, moving_average, records_to_frame, switching_rate
from .seeding import derive_seed, splitmix64

__all__ = [
    'EpisodeAccumulator',
    'EpisodeRecord',
    'moving_average',
    'records_to_frame',
    'switching_rate',
    'derive_seed',
    'splitmix64',
]
