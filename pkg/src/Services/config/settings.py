"""Runtime settings for the identical-particles lab.

Values come from environment variables (a `.env` file is loaded by `main.py`)
and are overridden by command-line flags where a flag exists.

Environment:
    IDLAB_FAPP_THRESHOLD: overlap below which two states count as FAPP differentiating (default 1e-6)
    IDLAB_SEED: default seed for randomized verifications (default 0)
    IDLAB_LOG_LEVEL: stderr log level (default WARNING)
    IDLAB_CONFIG_DIR: directory holding double-well presets and level files (default ./config)
    IDLAB_PARALLEL: evaluate preset ladders on a thread pool (default false)

Example:
    from src.Services.config.settings import Settings

    settings = Settings.from_env()
    print(settings.fapp_threshold)
"""
from __future__ import annotations

import os
import logging
from dataclasses import dataclass

logger = logging.getLogger(__name__)

PROJECT_ROOT = os.path.normpath(os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "..", ".."))
DEFAULT_CONFIG_DIR = os.path.join(PROJECT_ROOT, "config")

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
MAX_SEED = 2**64 - 1


def _is_truthy(value: str) -> bool:
    return value.strip().lower() in {"1", "true", "yes", "on"}


@dataclass(frozen=True)
class Settings:
    """Resolved runtime settings.

    Attributes:
        fapp_threshold: Overlap magnitude at or below which a pair is FAPP differentiating
        default_seed: Seed used when a command is run without --seed
        log_level: Level name for the stderr log handler
        config_dir: Directory containing `double_well/` presets and `levels/` files
        parallel: Whether preset ladders may be solved on a thread pool
    """
    fapp_threshold: float = 1e-6
    default_seed: int = 0
    log_level: str = "WARNING"
    config_dir: str = DEFAULT_CONFIG_DIR
    parallel: bool = False

    def __post_init__(self) -> None:
        """Validate configuration parameters."""
        if not (0 < self.fapp_threshold < 1):
            raise ValueError("fapp_threshold must be between 0 and 1 (exclusive)")
        if not (0 <= self.default_seed <= MAX_SEED):
            raise ValueError("default_seed must be a 64-bit unsigned integer")
        if self.log_level.upper() not in LOG_LEVELS:
            raise ValueError(f"log_level must be one of {LOG_LEVELS}")

    @classmethod
    def from_env(cls) -> "Settings":
        """Build settings from IDLAB_* environment variables."""
        settings = cls(
            fapp_threshold=float(os.getenv("IDLAB_FAPP_THRESHOLD", "1e-6")),
            default_seed=int(os.getenv("IDLAB_SEED", "0")),
            log_level=os.getenv("IDLAB_LOG_LEVEL", "WARNING").upper(),
            config_dir=os.path.abspath(os.getenv("IDLAB_CONFIG_DIR", DEFAULT_CONFIG_DIR)),
            parallel=_is_truthy(os.getenv("IDLAB_PARALLEL", "false")),
        )
        logger.debug("Settings resolved: %s", settings)
        return settings

    @property
    def well_preset_dir(self) -> str:
        return os.path.join(self.config_dir, "double_well")

    @property
    def levels_dir(self) -> str:
        return os.path.join(self.config_dir, "levels")


__all__ = ["Settings", "DEFAULT_CONFIG_DIR", "PROJECT_ROOT"]
