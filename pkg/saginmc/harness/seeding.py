"""
Master-seed fan-out.

Component seeds are derived from (master seed, label path) rather than drawn
in sequence, so adding a policy or a component never shifts another stream.
Labels are hashed with SHA-256 and folded into the master seed through
splitmix64 rounds.
"""

import hashlib
from typing import Union

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    """One splitmix64 output for the given 64-bit state."""
    z = (state + _GOLDEN_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _label_hash(label: Union[str, int]) -> int:
    digest = hashlib.sha256(str(label).encode()).hexdigest()[:16]
    return int(digest, 16)


def derive_seed(master: int, *labels: Union[str, int]) -> int:
    """Deterministic 63-bit seed for the component named by `labels`."""
    state = splitmix64(int(master) & _MASK64)
    for label in labels:
        state = splitmix64(state ^ _label_hash(label))
    return state >> 1
