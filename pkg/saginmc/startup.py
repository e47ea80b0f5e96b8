"""
Process-level setup for saginmc entry points.
Loads `.env` settings and configures logging before any experiment runs.
"""

import logging
import os
from typing import Optional

from dotenv import load_dotenv

from saginmc.constants import DEFAULT_OUTPUT_DIR

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger(__name__)


def _env_flag(name: str) -> bool:
    return os.getenv(name, "0").lower() in ("1", "true", "yes")


def load_environment() -> None:
    """Load a `.env` file if present and fill in defaults for unset variables."""
    load_dotenv()
    os.environ.setdefault("SAGINMC_OUTPUT_DIR", DEFAULT_OUTPUT_DIR)
    os.environ.setdefault("SAGINMC_LOG_LEVEL", "INFO")
    os.environ.setdefault("SAGINMC_PROFILE", "desk")
    os.environ.setdefault("SAGINMC_DISABLE_PROGRESS", "0")


def configure_logging(level: Optional[str] = None) -> None:
    """Configure root logging; `level` overrides SAGINMC_LOG_LEVEL."""
    level_name = (level or os.getenv("SAGINMC_LOG_LEVEL", "INFO")).upper()
    numeric = getattr(logging, level_name, None)
    if not isinstance(numeric, int):
        raise ValueError(f"Unknown log level: {level_name}")
    logging.basicConfig(level=numeric, format=LOG_FORMAT)
    logger.debug(f"Logging configured at {level_name}")


def progress_disabled() -> bool:
    """True when SAGINMC_DISABLE_PROGRESS asks for quiet training loops."""
    return _env_flag("SAGINMC_DISABLE_PROGRESS")


def default_output_dir() -> str:
    return os.getenv("SAGINMC_OUTPUT_DIR", DEFAULT_OUTPUT_DIR)


def default_profile() -> str:
    return os.getenv("SAGINMC_PROFILE", "desk")
