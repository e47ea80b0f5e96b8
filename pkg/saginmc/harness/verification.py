"""
Self-checks behind the `physics` and `gradcheck` subcommands.
"""

import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np
import pandas as pd

from saginmc.constants import GRADCHECK_NETS, GRADCHECK_STEP, GRADCHECK_TOLERANCE, LEO_ALTITUDE_M
from saginmc.harness.seeding import derive_seed
from saginmc.learning.nn import Head, Mlp, gradient_check
from saginmc.sim.channel import free_space_path_loss_db, link_latency, noise_floor_dbm

logger = logging.getLogger(__name__)


def physics_anchors() -> pd.DataFrame:
    """Link-budget building blocks evaluated at hand-checked reference points."""
    anchors = [
        ("fspl_100m_28ghz", "dB", free_space_path_loss_db(100.0, 28e9), 101.39, 0.01),
        ("noise_floor_100mhz_nf7", "dBm", noise_floor_dbm(100e6, 7.0), -87.0, 0.01),
        ("leo_delay_550km", "s", link_latency(LEO_ALTITUDE_M, math.inf), 1.834e-3, 1e-6),
    ]
    rows = [
        {
            "anchor": name,
            "unit": unit,
            "value": value,
            "expected": expected,
            "tolerance": tolerance,
            "ok": abs(value - expected) <= tolerance,
        }
        for name, unit, value, expected, tolerance in anchors
    ]
    return pd.DataFrame(rows, columns=["anchor", "unit", "value", "expected", "tolerance", "ok"])


@dataclass(frozen=True)
class GradientCheckResult:
    index: int
    layer_sizes: tuple
    head: str
    max_relative_error: float


def random_small_net(rng: np.random.Generator, seed: int) -> Mlp:
    depth = int(rng.integers(0, 3))
    sizes = [int(rng.integers(2, 7)) for _ in range(depth + 2)]
    head = Head.SOFTMAX if rng.random() < 0.5 else Head.IDENTITY
    return Mlp(sizes, head=head, seed=seed)


def run_gradient_checks(
    count: int = GRADCHECK_NETS,
    seed: int = 0,
    tolerance: float = GRADCHECK_TOLERANCE,
    h: float = GRADCHECK_STEP,
) -> List[GradientCheckResult]:
    """Central-difference check of `count` random small networks of both head types."""
    rng = np.random.default_rng(derive_seed(seed, "gradcheck"))
    results = []
    for index in range(count):
        net = random_small_net(rng, derive_seed(seed, "gradcheck", index))
        error = gradient_check(net, tolerance=tolerance, h=h, seed=index)
        results.append(GradientCheckResult(index, net.layer_sizes, net.head.value, error))
    worst = max(result.max_relative_error for result in results)
    logger.info(f"Gradient check over {count} networks: worst relative error {worst:.3e}")
    return results
