"""
3D world state and platform mobility for the single-cell scenario.

The UE and BS are static, the UAV follows a random waypoint model inside the
cell disc and altitude band, the HAP hovers at 20 km and the LEO satellite
sweeps a circular arc in a vertical plane centered on the UE.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveFloat, model_validator

from saginmc.constants import (
    BS_POSITION_M,
    CELL_RADIUS_M,
    HAP_ALTITUDE_M,
    HAP_GROUND_OFFSET_M,
    LEO_ALTITUDE_M,
    LEO_ARC_STEP_DEG,
    STEP_DURATION_S,
    UAV_ALTITUDE_MAX_M,
    UAV_ALTITUDE_MIN_M,
    UAV_SPEED_MPS,
    UE_POSITION_M,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Position3D:
    """A point in meters; z is the altitude above the ground plane."""
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError(f"Position coordinates must be finite: {self}")
        if self.z < 0:
            raise ValueError(f"Position altitude must be non-negative, got z={self.z}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    def horizontal_distance(self, other: "Position3D") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


class MobilityConfig(BaseModel):
    """Mobility parameters; speeds in m/s, angles in degrees, lengths in meters."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    uav_speed: PositiveFloat = UAV_SPEED_MPS
    leo_arc_step: PositiveFloat = LEO_ARC_STEP_DEG
    cell_radius: PositiveFloat = CELL_RADIUS_M
    step_duration: PositiveFloat = STEP_DURATION_S
    uav_altitude_min: PositiveFloat = UAV_ALTITUDE_MIN_M
    uav_altitude_max: PositiveFloat = UAV_ALTITUDE_MAX_M
    ue_position: Tuple[float, float, float] = UE_POSITION_M
    hap_ground_offset: Tuple[float, float] = HAP_GROUND_OFFSET_M

    @model_validator(mode="after")
    def _check_bands(self) -> "MobilityConfig":
        if self.uav_altitude_min >= self.uav_altitude_max:
            raise ValueError(
                f"uav_altitude_min ({self.uav_altitude_min}) must be below "
                f"uav_altitude_max ({self.uav_altitude_max})"
            )
        if self.ue_position[2] < 0:
            raise ValueError(f"UE altitude must be non-negative, got {self.ue_position[2]}")
        return self

    @property
    def step_length(self) -> float:
        """Distance the UAV covers in one time step."""
        return self.uav_speed * self.step_duration


@dataclass(frozen=True)
class UavState:
    position: Position3D
    waypoint: Position3D


@dataclass(frozen=True)
class LeoState:
    """Arc angle in degrees in [0, 360), orbital radius in meters and the arc center."""
    arc_deg: float
    altitude_m: float = LEO_ALTITUDE_M
    center: Tuple[float, float, float] = UE_POSITION_M

    @property
    def position(self) -> Position3D:
        # Circle of radius altitude_m in the x-z plane through the UE, so the slant
        # range is altitude_m everywhere; the lower half is mirrored above the UE.
        theta = math.radians(self.arc_deg)
        cx, cy, cz = self.center
        return Position3D(
            x=cx + self.altitude_m * math.cos(theta),
            y=cy,
            z=cz + self.altitude_m * abs(math.sin(theta)),
        )


@dataclass(frozen=True)
class WorldState:
    ue: Position3D
    bs: Position3D
    uav: UavState
    hap: Position3D
    leo: LeoState
    step_index: int = 0


def draw_waypoint(cfg: MobilityConfig, rng: np.random.Generator) -> Position3D:
    """Draw a point uniformly over the cell disc area and the UAV altitude band."""
    radius = cfg.cell_radius * math.sqrt(rng.random())
    angle = 2.0 * math.pi * rng.random()
    altitude = rng.uniform(cfg.uav_altitude_min, cfg.uav_altitude_max)
    return Position3D(radius * math.cos(angle), radius * math.sin(angle), altitude)


def initial_world(cfg: MobilityConfig, rng: np.random.Generator) -> WorldState:
    """Build the step-0 world: static nodes at their defaults, UAV and LEO randomized."""
    uav = UavState(position=draw_waypoint(cfg, rng), waypoint=draw_waypoint(cfg, rng))
    hap_x, hap_y = cfg.hap_ground_offset
    return WorldState(
        ue=Position3D(*cfg.ue_position),
        bs=Position3D(*BS_POSITION_M),
        uav=uav,
        hap=Position3D(hap_x, hap_y, HAP_ALTITUDE_M),
        leo=LeoState(arc_deg=float(rng.uniform(0.0, 360.0)), center=tuple(cfg.ue_position)),
        step_index=0,
    )


def _advance_uav(uav: UavState, cfg: MobilityConfig, rng: np.random.Generator) -> UavState:
    position = uav.position.as_array()
    target = uav.waypoint.as_array()
    delta = target - position
    remaining = float(np.linalg.norm(delta))

    if remaining <= cfg.step_length:
        return UavState(position=uav.waypoint, waypoint=draw_waypoint(cfg, rng))

    moved = position + delta * (cfg.step_length / remaining)
    return UavState(position=Position3D(*moved), waypoint=uav.waypoint)


def advance_mobility(world: WorldState, cfg: MobilityConfig, rng: np.random.Generator) -> WorldState:
    """Advance the world by one time step; BS, HAP and UE stay where they are."""
    leo = replace(world.leo, arc_deg=(world.leo.arc_deg + cfg.leo_arc_step) % 360.0)
    return replace(
        world,
        uav=_advance_uav(world.uav, cfg, rng),
        leo=leo,
        step_index=world.step_index + 1,
    )


def slant_distance(a: Position3D, b: Position3D) -> float:
    """Euclidean distance between two points in meters."""
    return float(np.linalg.norm(a.as_array() - b.as_array()))


def elevation_angle(ue: Position3D, node: Position3D) -> float:
    """Elevation of `node` seen from `ue`, in degrees within [0, 90]."""
    if node.z <= ue.z:
        raise ValueError(f"Node altitude {node.z} m must exceed UE altitude {ue.z} m")
    rise = node.z - ue.z
    horizontal = ue.horizontal_distance(node)
    angle = math.degrees(math.atan2(rise, horizontal))
    return min(max(angle, 0.0), 90.0)
