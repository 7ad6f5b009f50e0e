"""
Configuration for the simulator.
Design constants live in config/processor-config.json; per-run options
(tolerance, seed, output) are validated separately.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

from errors import SchemaError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).parent.parent / "config" / "processor-config.json"

DEFAULTS = {
    "tolerance": 1e-10,
    "seed": 0,
    "output_path": "",            # empty = standard output
    "format": "json",
}

# Validation ranges for numeric settings
VALIDATION = {
    "tolerance": (1e-16, 1.0),
    "seed": (0, 2 ** 63 - 1),
}

VALID_FORMATS = {"json", "pretty"}


class SimulatorConfig:
    """Loads and manages processor-config.json."""

    def __init__(self, config_path: Optional[Path] = None):
        if config_path is None:
            config_path = DEFAULT_CONFIG_PATH

        with open(config_path, "r") as f:
            self.config = json.load(f)

        self.tolerances = self.config.get("tolerances", {})
        self.search = self.config.get("search", {})
        self.verify = self.config.get("verify", {})
        self.defaults = self.config.get("defaults", {})

    def get_tolerance(self, name: str, fallback: float = 1e-10) -> float:
        return float(self.tolerances.get(name, fallback))

    def get_search_grid(self, family: str) -> List[float]:
        grids = self.search.get("grids", {})
        if family not in grids:
            raise SchemaError(f"no default theta grid for family {family!r}")
        return [float(t) for t in grids[family]]

    def get_search_setting(self, key: str, fallback: int) -> int:
        return int(self.search.get(key, fallback))

    def get_verify_setting(self, key: str, fallback: int) -> int:
        return int(self.verify.get(key, fallback))


def _validate(key: str, value: Any) -> bool:
    """Validate a run setting value."""
    default = DEFAULTS.get(key)
    if default is None:
        return False

    # Type check
    if isinstance(default, int):
        if not isinstance(value, int) or isinstance(value, bool):
            return False
    if isinstance(default, float):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            return False

    # Range check
    if key in VALIDATION:
        lo, hi = VALIDATION[key]
        return lo <= value <= hi

    if key == "format":
        return value in VALID_FORMATS

    if key == "output_path":
        return isinstance(value, str)

    return True


@dataclass(frozen=True)
class RunConfig:
    tolerance: float = DEFAULTS["tolerance"]
    seed: int = DEFAULTS["seed"]
    output_path: str = DEFAULTS["output_path"]
    format: str = DEFAULTS["format"]

    @classmethod
    def load(cls, path: Optional[Path] = None, base: Optional[Dict[str, Any]] = None) -> "RunConfig":
        """Settings from *base* (config defaults) overlaid by an optional JSON file.

        Missing or invalid keys fall back to the defaults with a warning.
        """
        values = dict(DEFAULTS)
        for key, value in (base or {}).items():
            if key in DEFAULTS and _validate(key, value):
                values[key] = value
        if path is None:
            return cls(**values)

        try:
            with open(path, "r") as f:
                data = json.load(f)
        except (json.JSONDecodeError, OSError) as e:
            logger.warning(f"Failed to load run config, using defaults: {e}")
            return cls(**values)

        if not isinstance(data, dict):
            logger.warning("Run config file is not a dict, using defaults")
            return cls(**values)

        for key, default in DEFAULTS.items():
            if key not in data:
                continue
            value = data[key]
            if _validate(key, value):
                values[key] = value
            else:
                logger.warning(f"Invalid value for {key}: {value!r}, using default {values[key]!r}")
        return cls(**values)

    def override(self, **changes: Any) -> "RunConfig":
        """Apply command-line values; invalid ones raise SchemaError."""
        values = {
            "tolerance": self.tolerance,
            "seed": self.seed,
            "output_path": self.output_path,
            "format": self.format,
        }
        for key, value in changes.items():
            if value is None:
                continue
            if key not in DEFAULTS:
                raise SchemaError(f"unknown run setting {key!r}")
            if not _validate(key, value):
                raise SchemaError(f"invalid value for --{key.replace('_', '-')}: {value!r}")
            values[key] = value
        return RunConfig(**values)
