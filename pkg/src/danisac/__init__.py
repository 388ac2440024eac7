"""danisac: distributed-antenna integrated sensing and communication toolkit.

Simulation and optimization of energy-minimal resource allocation for a
cell-free network that serves communication users and sensing locations in
a time-divided frame.  Provides scenario generation, metric and constraint
evaluation, a self-contained conic interior-point solver, the alternating
optimizer, reference baselines, and a Monte Carlo harness.
"""

__version__ = "0.1.0"

from .config import SystemConfig, parse_config_file, apply_overrides
from .units import dbm_to_watt, watt_to_dbm
from .model import (
    Scenario, generate_scenario, build_scenario, steering_vector,
    sensing_channel, ideal_pattern, pair_targets,
    serialize_scenario, load_scenario,
)

__all__ = [
    "SystemConfig", "parse_config_file", "apply_overrides",
    "dbm_to_watt", "watt_to_dbm",
    "Scenario", "generate_scenario", "build_scenario", "steering_vector",
    "sensing_channel", "ideal_pattern", "pair_targets",
    "serialize_scenario", "load_scenario",
    "__version__",
]
