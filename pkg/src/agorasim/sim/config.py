"""Run configuration: schema, YAML loading, and strict validation.

The config file is plain YAML mirroring SimConfig field for field.  Unknown
keys are rejected at every nesting level so typos fail fast instead of
silently falling back to defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import yaml

from ..errors import ConfigError
from ..feed import FeedParams
from ..socialgraph import GraphParams

SCENARIOS = ("control", "rumor")
POLICY_MODES = ("rules", "llm", "mixed")

DEFAULT_INDUSTRIES = ("tech", "energy", "finance", "health", "consumer")


@dataclass
class PathsConfig:
    personas: str | None = None
    market: str | None = None
    news: str | None = None
    reference: str | None = None
    output: str = "runs/out"


@dataclass
class BeliefInitConfig:
    sentiment_percentile: float = 0.5
    variance: float = 1.0


@dataclass
class EndowmentConfig:
    cash: float = 100000.0
    invest_fraction: float = 0.5


@dataclass
class ChatConfig:
    endpoint: str = ""
    model: str = ""
    temperature: float = 1.3
    timeout: float = 60.0


@dataclass
class SimConfig:
    start_day: int = 0
    end_day: int = 28  # exclusive
    n_agents: int = 100
    activation: float = 0.4
    seed: int = 0
    scenario: str = "control"
    policy_mode: str = "rules"
    injection_count: int = 5
    record_horizon: int = 30  # trade records older than this drop from the graph
    beliefs_all_agents: bool = True
    industries: tuple = DEFAULT_INDUSTRIES
    graph: GraphParams = field(default_factory=GraphParams)
    feed: FeedParams = field(default_factory=FeedParams)
    paths: PathsConfig = field(default_factory=PathsConfig)
    belief_init: BeliefInitConfig = field(default_factory=BeliefInitConfig)
    endowment: EndowmentConfig = field(default_factory=EndowmentConfig)
    chat: ChatConfig = field(default_factory=ChatConfig)

    def __post_init__(self):
        if self.start_day >= self.end_day:
            raise ConfigError("start_day must precede end_day")
        if not 0.0 < self.activation <= 1.0:
            raise ConfigError(f"activation {self.activation} outside (0, 1]")
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.policy_mode not in POLICY_MODES:
            raise ConfigError(f"unknown policy mode {self.policy_mode!r}")
        if self.n_agents < 1:
            raise ConfigError("need at least one agent")
        if self.injection_count < 0:
            raise ConfigError("injection_count must be non-negative")
        if not self.industries:
            raise ConfigError("industries must be non-empty")
        self.industries = tuple(self.industries)


_NESTED = {
    "graph": GraphParams,
    "feed": FeedParams,
    "paths": PathsConfig,
    "belief_init": BeliefInitConfig,
    "endowment": EndowmentConfig,
    "chat": ChatConfig,
}


def _build(cls, data: dict, context: str):
    allowed = {f.name for f in fields(cls)}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {context}: {sorted(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {context} section: {exc}") from exc


def config_from_dict(data: dict) -> SimConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    data = dict(data)
    kwargs = {}
    for key, cls in _NESTED.items():
        if key in data:
            section = data.pop(key)
            if not isinstance(section, dict):
                raise ConfigError(f"{key} section must be a mapping")
            kwargs[key] = _build(cls, section, key)
    top = _build(SimConfig, {**data, **kwargs}, "config")
    return top


def load_config(path) -> SimConfig:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"unparseable config {path}: {exc}") from exc
    return config_from_dict(data)


def config_to_dict(config: SimConfig) -> dict:
    """Plain-dict form used for the manifest and the replay path."""
    out = {}
    for f in fields(SimConfig):
        value = getattr(config, f.name)
        if f.name in _NESTED:
            out[f.name] = {g.name: getattr(value, g.name)
                           for g in fields(type(value))}
        elif isinstance(value, tuple):
            out[f.name] = list(value)
        else:
            out[f.name] = value
    return out


def is_trading_day(day: int) -> bool:
    """Weekday calendar anchored so day 0 is a Monday."""
    return day % 7 < 5


def trading_days(start: int, end: int) -> list:
    return [d for d in range(start, end) if is_trading_day(d)]
