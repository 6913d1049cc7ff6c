"""UAV handover simulation with DQN/DDQN agents, baselines and model transfer.

Scenarios, configurations and weights are JSON text in the same formats the
``uavho`` command-line tool reads and writes. Flight paths are ``(N, 3)``
float arrays of x, y, z in metres.
"""

from ._core import (
    ConfigError,
    Environment,
    TrainingError,
    WeightParseError,
    average_weights,
    default_config,
    default_scenario,
    evaluate,
    expected_sinrs,
    finetune,
    generate_paths,
    link_budget,
    similarity,
    train,
    validate_config,
)

__all__ = [
    "ConfigError",
    "Environment",
    "TrainingError",
    "WeightParseError",
    "average_weights",
    "default_config",
    "default_scenario",
    "evaluate",
    "expected_sinrs",
    "finetune",
    "generate_paths",
    "link_budget",
    "similarity",
    "train",
    "validate_config",
]
