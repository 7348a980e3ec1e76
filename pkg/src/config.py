"""Pipeline configuration files and flag parsing."""

import re
from typing import Any, Dict, Optional, Tuple

from src.models import OperationSpec, PipelineConfig
from src.repository import DataRepository

SIZE_PATTERN = re.compile(r"^\s*(\d+)\s*[xX]\s*(\d+)\s*$")


class ConfigError(ValueError):
    """Raised when a configuration file or flag value is malformed."""

    pass


def parse_size(value: Any) -> Optional[Tuple[int, int]]:
    """Parse ``"WxH"`` or ``[w, h]`` into a (width, height) tuple.

    None passes through unchanged.
    """
    if value is None:
        return None
    if isinstance(value, str):
        match = SIZE_PATTERN.match(value)
        if not match:
            raise ConfigError(f"Size must look like WxH (e.g. 224x224), got '{value}'")
        width, height = int(match.group(1)), int(match.group(2))
    elif isinstance(value, (list, tuple)) and len(value) == 2:
        try:
            width, height = int(value[0]), int(value[1])
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Size entries must be integers, got {list(value)}") from e
    else:
        raise ConfigError(f"Size must be 'WxH' or [w, h], got {value!r}")
    if width < 1 or height < 1:
        raise ConfigError(f"Size must be positive, got {width}x{height}")
    return width, height


def load_json_config(filepath: str) -> Dict[str, Any]:
    """Read a JSON configuration object.

    Raises:
        ConfigError: If the file is unreadable or not a JSON object
    """
    try:
        data = DataRepository.read_json(filepath)
    except IOError as e:
        raise ConfigError(str(e)) from e
    if not isinstance(data, dict):
        raise ConfigError(f"Config file '{filepath}' must contain a JSON object")
    return data


def build_pipeline_config(
    file_values: Optional[Dict[str, Any]] = None, **overrides: Any
) -> PipelineConfig:
    """Merge config-file values with CLI flags; flags that are not None win."""
    merged: Dict[str, Any] = dict(file_values or {})
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    if merged.get("seed") is None:
        raise ConfigError("A seed is mandatory: pass --seed or set 'seed' in the config file")

    operation = merged.get("operation") or {"name": "identity"}
    if isinstance(operation, str):
        operation = {"name": operation}
    if not isinstance(operation, dict) or "name" not in operation:
        raise ConfigError("'operation' must be a name or an object with a 'name' key")
    params = operation.get("params") or {}
    if not isinstance(params, dict):
        raise ConfigError("'operation.params' must be an object")

    try:
        return PipelineConfig(
            seed=int(merged["seed"]),
            operation=OperationSpec(name=str(operation["name"]), params=dict(params)),
            input=str(merged.get("input") or ""),
            output=str(merged.get("output") or "output"),
            resize=parse_size(merged.get("resize")),
            jobs=int(merged.get("jobs", 1)),
            crop_divisible=(
                int(merged["crop_divisible"])
                if merged.get("crop_divisible") is not None
                else None
            ),
        )
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"Invalid pipeline config: {e}") from e
