"""
I/O utility functions for step-level episode traces.
"""

import logging
from pathlib import Path
from typing import Dict, List, Union

import pandas as pd

from saginmc.constants import STEP_TRACE_COLUMNS
from saginmc.sim.env import StepOutcome, action_mask

logger = logging.getLogger(__name__)


def step_row(episode: int, outcome: StepOutcome) -> Dict:
    """One trace row: step, action bitmask, aggregates, reward and AV/NAV flags."""
    return {
        "episode": episode,
        "step": outcome.step_index,
        "action_mask": action_mask(outcome.action),
        "capacity_bps": outcome.capacity,
        "latency_s": outcome.latency,
        "power_w": outcome.power,
        "reward": outcome.reward,
        "flags": outcome.state_vector.to_string(),
    }


def write_step_trace(rows: List[Dict], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(rows, columns=STEP_TRACE_COLUMNS)
    frame.to_csv(path, index=False)
    logger.info(f"Wrote {len(frame)} step rows to {path}")
    return path


def read_step_trace(path: Union[str, Path]) -> pd.DataFrame:
    """Parse a step trace CSV, validating its columns."""
    try:
        frame = pd.read_csv(path, dtype={"flags": str})
    except Exception as e:
        raise ValueError(f"Error parsing step trace {path}: {str(e)}")

    missing_columns = [col for col in STEP_TRACE_COLUMNS if col not in frame.columns]
    if missing_columns:
        raise ValueError(f"Missing required columns in {path}: {missing_columns}")
    return frame
