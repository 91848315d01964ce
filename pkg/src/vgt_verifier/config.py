"""
Run configuration.

Values are layered: dataclass defaults, then an optional key=value file, then
the environment, then explicit command-line flags.
"""

import logging
import os
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Mapping, Optional

from .counting import DEFAULT_ORACLE_BOUND, DEFAULT_TABLE_THRESHOLD
from .detsieve import DEFAULT_PRIME_BOUND
from .errors import ConfigError
from .utils import PathLike

logger = logging.getLogger(__name__)

OUTPUT_FORMATS = ("json", "csv", "text")
THREADS_ENV = "VGT_THREADS"


@dataclass(frozen=True)
class RunConfig:
    """Defaults the CLI falls back on when a flag is not given."""
    prime_bound: int = DEFAULT_PRIME_BOUND
    oracle_bound: int = DEFAULT_ORACLE_BOUND
    thread_count: int = 1
    output_format: str = "text"
    charsum_table_threshold: int = DEFAULT_TABLE_THRESHOLD

    def __post_init__(self):
        if self.prime_bound < 3:
            raise ConfigError(f"prime_bound must be at least 3, got {self.prime_bound}")
        if self.thread_count < 1:
            raise ConfigError(f"thread_count must be at least 1, got {self.thread_count}")
        if self.oracle_bound < 1:
            raise ConfigError(f"oracle_bound must be positive, got {self.oracle_bound}")
        if self.charsum_table_threshold < 0:
            raise ConfigError(f"charsum_table_threshold must be non-negative, got {self.charsum_table_threshold}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"output_format must be one of {', '.join(OUTPUT_FORMATS)}, got {self.output_format!r}")

    def updated(self, values: Mapping[str, Any]) -> "RunConfig":
        """Copy with the given fields replaced; None values are ignored."""
        return replace(self, **{k: v for k, v in values.items() if v is not None})


def _coerce(key: str, raw: str) -> Any:
    types = {f.name: f.type for f in fields(RunConfig)}
    if key not in types:
        raise ConfigError(f"unknown configuration key: {key}")
    if types[key] in (int, "int"):
        try:
            return int(raw)
        except ValueError as e:
            raise ConfigError(f"{key} must be an integer, got {raw!r}") from e
    return raw


def parse_config_text(text: str) -> Dict[str, Any]:
    """Parse key=value lines; blank lines and # comments are skipped."""
    values: Dict[str, Any] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {number}: expected key=value, got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        values[key] = _coerce(key, raw)
    return values


def load_config(path: Optional[PathLike] = None, environ: Optional[Mapping[str, str]] = None) -> RunConfig:
    """
    Build the run configuration from defaults, an optional file and the environment.

    Args:
        path: Optional key=value configuration file
        environ: Environment mapping, os.environ when omitted

    Returns:
        Validated RunConfig

    Raises:
        ConfigError: on unreadable files, unknown keys or invalid values
    """
    config = RunConfig()
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as f:
                config = config.updated(parse_config_text(f.read()))
        except OSError as e:
            raise ConfigError(f"could not read config file {path}: {e}") from e
        logger.debug(f"Configuration loaded from {path}")

    environ = os.environ if environ is None else environ
    if environ.get(THREADS_ENV):
        config = config.updated({"thread_count": _coerce("thread_count", environ[THREADS_ENV])})
        logger.debug(f"thread_count={config.thread_count} from {THREADS_ENV}")
    return config
