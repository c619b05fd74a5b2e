"""Config parsing, experiment registry, output writing and the CLI."""

from .config import ConfigError, ExperimentConfig, parse_config, resolve_config, serialize_config
from .experiments import RUNNERS, run_experiment
from .io import write_outputs

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "RUNNERS",
    "parse_config",
    "resolve_config",
    "run_experiment",
    "serialize_config",
    "write_outputs",
]
