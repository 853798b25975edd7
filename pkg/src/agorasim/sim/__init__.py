"""Orchestration layer: configuration, day loop, persistence, replay."""

from .config import (SimConfig, config_from_dict, config_to_dict,
                     is_trading_day, load_config, trading_days)
from .world import WorldState, build_world, run_day
from .runner import run_simulation, read_events, write_events
from .replay import replay_run, reports_from_events
from .compare import compare_baselines, render_table

__all__ = [
    "SimConfig", "config_from_dict", "config_to_dict", "is_trading_day",
    "load_config", "trading_days", "WorldState", "build_world", "run_day",
    "run_simulation", "read_events", "write_events", "replay_run",
    "reports_from_events", "compare_baselines", "render_table",
]
