"""Command line, configuration files, metric reports and verification suites."""

from .cli import main
from .config import ConfigError, format_config, merge, read_config
from .suites import SUITES, run_suites

__all__ = ["main", "ConfigError", "read_config", "format_config", "merge", "SUITES", "run_suites"]
