"""Multi-camera maritime surveillance simulator with regret-matching path planning."""

from .config import ConfigError, ScenarioConfig, parse_config
from .harness import SimTrace, collect_metrics, generate_scenario, run_episode

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "SimTrace",
    "collect_metrics",
    "generate_scenario",
    "parse_config",
    "run_episode",
]
__version__ = "0.1.0"
