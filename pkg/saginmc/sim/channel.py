"""
Per-link radio model: LOS state, path loss, SNR, capacity, latency and power.

Free-space path loss plus a fixed urban excess loss stands in for the full
3GPP / ITU-R models; LOS is a Bernoulli draw from a per-kind probability.
"""

import logging
import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Dict, Mapping, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat

from saginmc.constants import (
    AERIAL_LOS_A,
    AERIAL_LOS_B,
    BANDWIDTH_HZ,
    CARRIER_FREQUENCY_HZ,
    DEFAULT_ANTENNA_GAIN_DBI,
    DEFAULT_NOISE_FIGURE_DB,
    EXCESS_LOSS_LOS_DB,
    EXCESS_LOSS_NLOS_DB,
    FSPL_CONSTANT_DB,
    LEO_MASK_ELEVATION_DEG,
    LOAD_INITIAL_MAX,
    LOAD_MAX,
    LOAD_STEP_MAX,
    PACKET_BITS,
    POWER_COST_W,
    SPEED_OF_LIGHT_MPS,
    THERMAL_NOISE_DBM_PER_HZ,
    TX_POWER_DBM,
    UMA_LOS_BREAKPOINT_M,
    UMA_LOS_DECAY_M,
)
from saginmc.sim.geometry import Position3D, WorldState, elevation_angle, slant_distance

logger = logging.getLogger(__name__)


class LinkKind(IntEnum):
    BS = 0
    UAV = 1
    HAP = 2
    LEO = 3


class LinkParams(BaseModel):
    """Static radio parameters of one link (Hz, dBm, W, dBi, dB)."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    bandwidth: PositiveFloat
    carrier_frequency: PositiveFloat
    tx_power: float
    power_cost: PositiveFloat
    antenna_gain_tx: float = DEFAULT_ANTENNA_GAIN_DBI
    antenna_gain_rx: float = DEFAULT_ANTENNA_GAIN_DBI
    noise_figure: float = Field(default=DEFAULT_NOISE_FIGURE_DB, ge=0.0)


@dataclass(frozen=True)
class LinkMetrics:
    los: bool
    path_loss: float
    snr: float
    capacity: float
    latency: float
    power: float
    load: float


def default_link_params() -> Dict[LinkKind, LinkParams]:
    return {
        kind: LinkParams(
            bandwidth=BANDWIDTH_HZ[kind],
            carrier_frequency=CARRIER_FREQUENCY_HZ[kind],
            tx_power=TX_POWER_DBM[kind],
            power_cost=POWER_COST_W[kind],
        )
        for kind in LinkKind
    }


def node_position(kind: LinkKind, world: WorldState) -> Position3D:
    if kind is LinkKind.BS:
        return world.bs
    if kind is LinkKind.UAV:
        return world.uav.position
    if kind is LinkKind.HAP:
        return world.hap
    return world.leo.position


def _elevation_or_zero(ue: Position3D, node: Position3D) -> float:
    # A node at or below the UE (LEO at the horizon) is treated as 0 degrees.
    if node.z <= ue.z:
        return 0.0
    return elevation_angle(ue, node)


def uma_los_probability(distance_2d: float) -> float:
    if distance_2d <= UMA_LOS_BREAKPOINT_M:
        return 1.0
    ratio = UMA_LOS_BREAKPOINT_M / distance_2d
    return ratio + math.exp(-distance_2d / UMA_LOS_DECAY_M) * (1.0 - ratio)


def aerial_los_probability(elevation_deg: float) -> float:
    return 1.0 / (1.0 + AERIAL_LOS_A * math.exp(-AERIAL_LOS_B * (elevation_deg - AERIAL_LOS_A)))


def los_probability(kind: LinkKind, world: WorldState) -> float:
    """Probability in [0, 1] that the UE sees `kind` in line of sight."""
    node = node_position(kind, world)
    if kind is LinkKind.BS:
        return uma_los_probability(world.ue.horizontal_distance(node))
    elevation = _elevation_or_zero(world.ue, node)
    if kind is LinkKind.LEO:
        return 1.0 if elevation >= LEO_MASK_ELEVATION_DEG else 0.0
    return aerial_los_probability(elevation)


# Excess loss on top of free space, per kind: (LOS, NLOS) in dB.
EXCESS_LOSS_DB = {kind: (EXCESS_LOSS_LOS_DB, EXCESS_LOSS_NLOS_DB) for kind in LinkKind}


def free_space_path_loss_db(distance: float, frequency: float) -> float:
    return 20.0 * math.log10(distance) + 20.0 * math.log10(frequency) + FSPL_CONSTANT_DB


def path_loss_db(kind: LinkKind, distance: float, frequency: float, los: bool) -> float:
    """FSPL in dB plus the LOS or NLOS excess loss of `kind`."""
    if not distance > 0:
        raise ValueError(f"Distance must be positive, got {distance}")
    los_loss, nlos_loss = EXCESS_LOSS_DB[kind]
    return free_space_path_loss_db(distance, frequency) + (los_loss if los else nlos_loss)


def noise_floor_dbm(bandwidth: float, noise_figure: float) -> float:
    return THERMAL_NOISE_DBM_PER_HZ + 10.0 * math.log10(bandwidth) + noise_figure


def snr_db(params: LinkParams, path_loss: float) -> float:
    received = params.tx_power + params.antenna_gain_tx + params.antenna_gain_rx - path_loss
    return received - noise_floor_dbm(params.bandwidth, params.noise_figure)


def link_capacity(bandwidth: float, snr: float, load: float) -> float:
    """Shannon rate in bits/s over the unloaded share of the bandwidth."""
    if not 0.0 <= load <= 1.0:
        raise ValueError(f"Load must lie in [0, 1], got {load}")
    return (1.0 - load) * bandwidth * math.log2(1.0 + 10.0 ** (snr / 10.0))


def link_latency(
    distance: float,
    rate: float,
    packet_bits: int = PACKET_BITS,
    unavailable_latency: float = math.inf,
) -> float:
    """Propagation delay plus the service time of one packet, in seconds.

    The result never exceeds the caller's `unavailable_latency` sentinel: a
    zero rate returns it outright and any slower service is capped at it.
    """
    if distance < 0:
        raise ValueError(f"Distance must be non-negative, got {distance}")
    if rate <= 0:
        return unavailable_latency
    return min(distance / SPEED_OF_LIGHT_MPS + packet_bits / rate, unavailable_latency)


def initial_loads(rng: np.random.Generator) -> Dict[LinkKind, float]:
    return {kind: float(rng.uniform(0.0, LOAD_INITIAL_MAX)) for kind in LinkKind}


def advance_loads(loads: Mapping[LinkKind, float], rng: np.random.Generator) -> Dict[LinkKind, float]:
    """One step of the per-platform load walk, reflected at 0 and LOAD_MAX."""
    updated = {}
    for kind in LinkKind:
        value = loads[kind] + rng.uniform(-LOAD_STEP_MAX, LOAD_STEP_MAX)
        if value < 0.0:
            value = -value
        elif value > LOAD_MAX:
            value = 2.0 * LOAD_MAX - value
        updated[kind] = float(min(max(value, 0.0), LOAD_MAX))
    return updated


def evaluate_links(
    world: WorldState,
    params: Mapping[LinkKind, LinkParams],
    loads: Mapping[LinkKind, float],
    rng: np.random.Generator,
    packet_bits: int = PACKET_BITS,
    unavailable_latency: float = math.inf,
) -> Dict[LinkKind, LinkMetrics]:
    """Draw LOS for every link in LinkKind order and chain the link budget."""
    metrics: Dict[LinkKind, LinkMetrics] = {}
    for kind in LinkKind:
        link = params[kind]
        los = bool(rng.random() < los_probability(kind, world))
        distance = slant_distance(world.ue, node_position(kind, world))
        loss = path_loss_db(kind, distance, link.carrier_frequency, los)
        snr = snr_db(link, loss)
        capacity = link_capacity(link.bandwidth, snr, loads[kind])
        metrics[kind] = LinkMetrics(
            los=los,
            path_loss=loss,
            snr=snr,
            capacity=capacity,
            latency=link_latency(distance, capacity, packet_bits, unavailable_latency),
            power=link.power_cost,
            load=loads[kind],
        )
    return metrics


def resolve_link_params(overrides: Optional[Mapping[str, Mapping[str, float]]] = None) -> Dict[LinkKind, LinkParams]:
    """Default link parameters with per-kind field overrides keyed by kind name."""
    params = default_link_params()
    for name, fields in (overrides or {}).items():
        try:
            kind = LinkKind[name.upper()]
        except KeyError:
            raise ValueError(f"Unknown link kind in overrides: {name}")
        params[kind] = LinkParams.model_validate({**params[kind].model_dump(), **dict(fields)})
    return params
