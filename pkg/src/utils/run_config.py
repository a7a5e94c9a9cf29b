"""Run configuration: flag > config file > default precedence."""

import json
import logging
import tomllib
from pathlib import Path
from typing import Any, Optional

from src import __version__

logger = logging.getLogger(__name__)

RESOLVED_CONFIG_NAME = "resolved_config.json"


def load_config_file(path: Optional[str | Path], section: str) -> dict[str, Any]:
    """Read one subcommand table from a TOML config file.

    Keys may use dashes or underscores; they are returned with underscores.

    Raises:
        ValueError: If the file is not valid TOML.
    """
    if path is None:
        return {}
    with open(path, "rb") as handle:
        try:
            data = tomllib.load(handle)
        except tomllib.TOMLDecodeError as e:
            raise ValueError(f"config file {path} is not valid TOML: {e}") from e
    table = data.get(section, data.get(section.replace("-", "_"), {}))
    if not isinstance(table, dict):
        raise ValueError(f"config section [{section}] must be a table")
    return {key.replace("-", "_"): value for key, value in table.items()}


def resolve(
    defaults: dict[str, Any],
    file_values: dict[str, Any],
    flags: dict[str, Any],
) -> dict[str, Any]:
    """Merge settings; a flag left unset (None) falls through to the file, then the default."""
    resolved = dict(defaults)
    resolved.update(file_values)
    for key, value in flags.items():
        if value is not None:
            resolved[key] = value
        else:
            resolved.setdefault(key, None)
    return resolved


def write_resolved_config(out_dir: str | Path, command: str, values: dict[str, Any]) -> Path:
    """Record the fully resolved configuration next to a command's outputs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / RESOLVED_CONFIG_NAME
    payload = {
        "command": command,
        "version": __version__,
        "config": {k: _jsonable(v) for k, v in sorted(values.items())},
    }
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    logger.debug("Resolved config written to %s", path)
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    return value
