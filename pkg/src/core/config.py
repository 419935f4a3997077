from typing import Any, Optional
import os
import re
import json
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import BaseModel, Field

DEFAULT_CONFIG_PATH = "config.json"
PRECISION_ENV_VAR = "KSTAB_PRECISION_DIGITS"

_ENV_PATTERN = re.compile(r"^\$\{(?P<name>[A-Za-z_][A-Za-z0-9_]*)(?::-(?P<default>.*))?\}$")


class PrecisionConfig(BaseModel):
    digits: int = Field(default=50, ge=15)


class LPConfig(BaseModel):
    max_iterations: int = 200000
    bland_after_degenerate: int = 50


class TorusConfig(BaseModel):
    divergence_bound: float = 1e3
    max_iterations: int = 500
    tolerance: float = 1e-10
    regularization: float = 1e-12


class ToricConfig(BaseModel):
    default_resolution: int = Field(default=4, ge=2)
    uniform_samples: int = 40
    l2_samples: int = 40
    l2_resolutions: list[int] = [2, 4, 8]


class MomentumConfig(BaseModel):
    quadrature_tolerance: float = 1e-10
    refine: int = 8


class RunnerConfig(BaseModel):
    jobs: int = Field(default=1, ge=1)


class LoggingConfig(BaseModel):
    level: str = "warning"
    format: str = "console"


class Config(BaseModel):
    precision: PrecisionConfig = PrecisionConfig()
    lp: LPConfig = LPConfig()
    torus: TorusConfig = TorusConfig()
    toric: ToricConfig = ToricConfig()
    momentum: MomentumConfig = MomentumConfig()
    runner: RunnerConfig = RunnerConfig()
    logging: LoggingConfig = LoggingConfig()


def replace_env_vars(data: Any) -> Any:
    """Substitute ``${VAR}`` and ``${VAR:-default}`` string values from the environment."""
    if isinstance(data, str):
        match = _ENV_PATTERN.match(data)
        if match is None:
            return data
        return os.getenv(match.group("name"), match.group("default"))
    elif isinstance(data, dict):
        return {k: v for k, v in ((k, replace_env_vars(v)) for k, v in data.items()) if v is not None}
    elif isinstance(data, list):
        return [replace_env_vars(item) for item in data]
    return data


def load_config(config_path: Optional[str] = None) -> Config:
    """Load configuration from a JSON file.

    An explicitly named file must exist; the default ``config.json`` falls back
    to built-in defaults when absent. ``KSTAB_PRECISION_DIGITS`` always wins
    over the file.
    """
    load_dotenv()
    path = config_path or DEFAULT_CONFIG_PATH
    if os.path.exists(path):
        with open(path, 'r') as f:
            config_data = replace_env_vars(json.load(f))
    elif config_path is not None:
        raise FileNotFoundError(f"Configuration file not found: {config_path}")
    else:
        config_data = {}

    digits = os.getenv(PRECISION_ENV_VAR)
    if digits:
        config_data.setdefault("precision", {})["digits"] = int(digits)

    return Config(**config_data)


@lru_cache(maxsize=1)
def get_config() -> Config:
    """Process-wide configuration, loaded once."""
    return load_config()


def precision_digits() -> int:
    return get_config().precision.digits
