"""
Runtime settings for okbodies.

Values come from the environment (a `.env` file in the working directory is
loaded first). Nothing else in the package reads os.environ.

Usage:
    from config import get_settings, configure_logging

    settings = get_settings()
    configure_logging(settings.log_level)
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Optional, Tuple

from dotenv import load_dotenv

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

DEFAULT_SEED = 12345
DEFAULT_EPSILON_STEPS = 12


@dataclass(frozen=True)
class Settings:
    data_dir: Path
    seed: int = DEFAULT_SEED
    log_level: str = "WARNING"
    epsilon_steps: int = DEFAULT_EPSILON_STEPS
    oracle_threshold: Fraction = Fraction(95, 100)
    workers: int = 1

    @property
    def epsilon_schedule(self) -> Tuple[Fraction, ...]:
        return epsilon_schedule(self.epsilon_steps)


def epsilon_schedule(steps: int = DEFAULT_EPSILON_STEPS) -> Tuple[Fraction, ...]:
    """The schedule 1/2, 1/4, ..., 1/2**steps."""
    if steps < 4:
        raise ValueError("epsilon schedule needs at least 4 steps")
    return tuple(Fraction(1, 2 ** k) for k in range(1, steps + 1))


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError as e:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from e


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Read settings once per process."""
    load_dotenv()
    threshold = os.getenv("OKLAB_ORACLE_THRESHOLD", "").strip()
    return Settings(
        data_dir=Path(os.getenv("OKLAB_DATA") or Path(__file__).resolve().parent / "data"),
        seed=_env_int("OKLAB_SEED", DEFAULT_SEED),
        log_level=(os.getenv("OKLAB_LOG_LEVEL") or "WARNING").upper(),
        epsilon_steps=_env_int("OKLAB_EPSILON_STEPS", DEFAULT_EPSILON_STEPS),
        oracle_threshold=Fraction(threshold) if threshold else Fraction(95, 100),
        workers=max(1, _env_int("OKLAB_WORKERS", 1)),
    )


def configure_logging(level: Optional[str] = None) -> None:
    """Install a single stream handler on the root logger."""
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(level or get_settings().log_level)
