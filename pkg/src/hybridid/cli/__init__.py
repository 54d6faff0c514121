"""Command-line orchestration of the pipeline stages."""
from .config import ExperimentConfig, default_config, load_config
from .main import main

__all__ = ["ExperimentConfig", "default_config", "load_config", "main"]
