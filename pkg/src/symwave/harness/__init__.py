"""Config-driven experiments and the ``symwave`` command line."""
from .config import (DEFAULTS, DESCRIPTIONS, EXPERIMENT_NAMES, ExperimentConfig, config_to_json,
                     default_config, load_config, validate_config)
from .experiments import CRITERIA, Criterion, ExperimentReport, list_experiments, run_experiment

__all__ = [
    "ExperimentConfig", "ExperimentReport", "Criterion", "CRITERIA", "DEFAULTS", "DESCRIPTIONS",
    "EXPERIMENT_NAMES", "run_experiment", "validate_config", "load_config", "default_config",
    "list_experiments", "config_to_json",
]
