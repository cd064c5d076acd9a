"""Experiment orchestration: configuration, runners and reports."""

from .config import ConfigError, ExperimentConfig, load_config
from .report import RunReport, emit
from . import experiments

__all__ = ["ConfigError", "ExperimentConfig", "load_config",
           "RunReport", "emit", "experiments"]
