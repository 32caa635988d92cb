"""Keyed scrambling schemes for lossy broadcast with an eavesdropper:
codecs, rate regions, attack simulators, and an experiment harness."""

__version__ = "0.1.0"

from .models import (
    BroadcastChannel,
    ConfigError,
    ExperimentConfig,
    KeyedRng,
    SchemeParams,
    SourceModel,
    parse_config,
)
from .regions import RegionPoint, RegionVerdict

__all__ = [
    "__version__",
    "BroadcastChannel",
    "ConfigError",
    "ExperimentConfig",
    "KeyedRng",
    "RegionPoint",
    "RegionVerdict",
    "SchemeParams",
    "SourceModel",
    "parse_config",
]
