"""Configuration management for equilib.

Handles loading and merging configuration from:
1. Global config file (~/.equilib/config.toml)
2. Local project config file (./equilib.toml)
3. An explicit file passed with --config
4. Environment variables (EQUILIB_JOBS)

Files are flat `key = value` lines; keys may be dotted to reach a section,
e.g. `tolerances.transition = 1e-9` or `grid.nodes = 8001`.
"""

import os
from pathlib import Path
from typing import Any, Dict, Optional

import toml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..errors import DomainError

JOBS_ENV = "EQUILIB_JOBS"


class Tolerances(BaseModel):
    """Every numerical tolerance used by the engine, in one place."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    comparison: float = 1e-9
    transition: float = 1e-9  # |γ − Γ| for transition labels
    double_root: float = 1e-10  # relative discriminant threshold
    linear_switch: float = 1e-12  # |β₁ − γβ₂| relative, quadratic becomes linear
    root_xtol: float = 1e-12
    ode_rtol: float = 1e-9
    ode_atol: float = 1e-12
    ode_split: float = 1e-6  # regularized split, relative to the radius
    quadrature_abs: float = 1e-12
    quadrature_rel: float = 1e-11
    frostman: float = 1e-6
    weight_support: float = 1e-6


DEFAULT_TOLERANCES = Tolerances()


class GridConfig(BaseModel):
    """Oracle grid defaults."""
    model_config = ConfigDict(extra="forbid")

    lower: Optional[float] = None
    upper: Optional[float] = None
    nodes: int = Field(default=4001, ge=3)
    max_iter: int = Field(default=20000, ge=1)


class SweepConfig(BaseModel):
    """Worker pool configuration for sweeps."""
    model_config = ConfigDict(extra="forbid")

    jobs: Optional[int] = Field(default=None, ge=1)


class VerifyConfig(BaseModel):
    """Acceptance thresholds for `equilib verify`."""
    model_config = ConfigDict(extra="forbid")

    density_tol: float = 0.02
    support_cells: int = 2
    frostman_tol: float = 1e-3
    window: float = 10.0
    edge_band: float = 0.5  # density is not compared this close to a finite endpoint
    transition_guard: float = 1e-2


class OutputConfig(BaseModel):
    """CSV formatting."""
    model_config = ConfigDict(extra="forbid")

    precision: int = Field(default=15, ge=1, le=17)


class EquilibConfig(BaseModel):
    """Main equilib configuration."""
    model_config = ConfigDict(extra="forbid")

    tolerances: Tolerances = Field(default_factory=Tolerances)
    grid: GridConfig = Field(default_factory=GridConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    verbose: bool = False


def get_config_path(local: bool = False) -> Path:
    """Get the path to the configuration file."""
    if local:
        return Path("./equilib.toml")
    else:
        return Path.home() / ".equilib" / "config.toml"


def _merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    """Merge nested dicts, values in `update` win."""
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _expand_dotted(data: Dict[str, Any]) -> Dict[str, Any]:
    """Turn `{"grid.nodes": 8001}` into `{"grid": {"nodes": 8001}}`."""
    expanded: Dict[str, Any] = {}
    for key, value in data.items():
        if isinstance(value, dict):
            value = _expand_dotted(value)
        head, _, rest = key.partition(".")
        if rest:
            value = _expand_dotted({rest: value})
            key = head
        if isinstance(value, dict) and isinstance(expanded.get(key), dict):
            expanded[key] = _merge(expanded[key], value)
        else:
            expanded[key] = value
    return expanded


def _read(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "r") as f:
            return _expand_dotted(toml.load(f))
    except toml.TomlDecodeError as e:
        raise DomainError(f"cannot parse {path}: {e}", parameter="config") from e


def load_config(path: Optional[Path] = None) -> EquilibConfig:
    """Load configuration from files and environment variables."""
    config_data: Dict[str, Any] = {}

    for candidate in (get_config_path(local=False), get_config_path(local=True)):
        if candidate.exists():
            config_data = _merge(config_data, _read(candidate))

    # Explicit file overrides both
    if path is not None:
        if not path.exists():
            raise DomainError(f"config file {path} not found", parameter="config")
        config_data = _merge(config_data, _read(path))

    if JOBS_ENV in os.environ:
        try:
            jobs = int(os.environ[JOBS_ENV])
        except ValueError as e:
            raise DomainError(
                f"{JOBS_ENV} must be an integer, got {os.environ[JOBS_ENV]!r}",
                parameter=JOBS_ENV,
            ) from e
        config_data = _merge(config_data, {"sweep": {"jobs": jobs}})

    try:
        return EquilibConfig(**config_data)
    except ValidationError as e:
        raise DomainError(str(e), parameter="config") from e


def ensure_config_dir() -> None:
    """Ensure the equilib configuration directory exists."""
    config_dir = Path.home() / ".equilib"
    config_dir.mkdir(exist_ok=True)


def _flatten(data: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, prefix=f"{name}."))
        elif value is not None:
            flat[name] = value
    return flat


def render_default_config() -> str:
    """Default configuration as flat dotted `key = value` lines."""
    lines = ["# equilib configuration", ""]
    for key, value in _flatten(EquilibConfig().model_dump()).items():
        # toml.dumps gives the exact literal form for each scalar
        literal = toml.dumps({"v": value}).split("=", 1)[1].strip()
        lines.append(f"{key} = {literal}")
    return "\n".join(lines) + "\n"


def create_default_config(path: Optional[Path] = None) -> Path:
    """Create a default configuration file if none exists."""
    if path is None:
        ensure_config_dir()
        path = get_config_path(local=False)

    if not path.exists():
        with open(path, "w") as f:
            f.write(render_default_config())
    return path
