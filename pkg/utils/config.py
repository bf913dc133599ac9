import logging
import os
from dataclasses import dataclass

DEFAULT_BUDGET = 2_000_000
DEFAULT_MAX_N = 20
DEFAULT_WORKERS = 4


@dataclass(frozen=True)
class Settings:
    """
    Process-wide settings read from the environment.

    :param budget: Maximum number of enumerated objects (table entries,
                   labelings, realizations, constructed vertices)
    :param max_n: Largest vertex count accepted by the exact solvers
    :param workers: Thread pool width used by experiments
    :param log_level: Logging level name
    """

    budget: int = DEFAULT_BUDGET
    max_n: int = DEFAULT_MAX_N
    workers: int = DEFAULT_WORKERS
    log_level: str = "INFO"

    @property
    def level(self) -> int:
        return logging.getLevelName(self.log_level.upper())


def _int_from_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from None
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def load_settings() -> Settings:
    """
    Build Settings from HFORGE_* environment variables.

    :return: The populated settings.
    """
    return Settings(
        budget=_int_from_env("HFORGE_BUDGET", DEFAULT_BUDGET),
        max_n=_int_from_env("HFORGE_MAX_N", DEFAULT_MAX_N),
        workers=_int_from_env("HFORGE_WORKERS", DEFAULT_WORKERS),
        log_level=os.getenv("HFORGE_LOG_LEVEL", "INFO"),
    )
