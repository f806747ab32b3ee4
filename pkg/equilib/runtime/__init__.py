"""Runtime components: configuration and logging."""

from .config import (
    DEFAULT_TOLERANCES,
    EquilibConfig,
    Tolerances,
    create_default_config,
    ensure_config_dir,
    get_config_path,
    load_config,
)
from .log import configure_logging

__all__ = [
    "DEFAULT_TOLERANCES",
    "EquilibConfig",
    "Tolerances",
    "create_default_config",
    "ensure_config_dir",
    "get_config_path",
    "load_config",
    "configure_logging",
]
