"""Agent personas: demographics, bias levels, strategy and capital tiers.

Also hosts the synthetic bootstrap used when no persona file is supplied:
persona generation, the 40/60 fundamental/technical split with a 10x capital
top tier, and the synthesis of initial trading records that seed the social
graph.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ..errors import EmptyTemplate
from ..socialgraph import TradeRecord

BIAS_NAMES = ("disposition", "lottery", "underdiversification", "turnover")
BIAS_LEVELS = ("low", "medium", "high")
FUNDAMENTAL_FRACTION = 0.4  # top of the rationality ranking
LARGE_CAPITAL_FRACTION = 0.1
LARGE_CAPITAL_MULTIPLIER = 10.0

_REGIONS = ("North", "South", "East", "West", "Central", "Coastal",
            "Inland", "Delta")

_PERSONA_TEMPLATE = (
    "You are a {gender} investor from the {region} region with "
    "{followers} followers, trading industry indices. You follow the "
    "{industries} indices. Your profit-taking is {disposition} "
    "(disposition), your taste for long-shot bets is {lottery}, your "
    "tendency to concentrate holdings is {underdiversification}, and your "
    "trading frequency is {turnover}. You rely on {strategy} analysis."
)


@dataclass(frozen=True)
class Persona:
    agent_id: str
    gender: str
    region: str
    followers: int
    bias_levels: dict  # BIAS_NAMES -> low|medium|high
    strategy: str = "technical"  # "fundamental" | "technical"
    capital_tier: str = "normal"  # "normal" | "large"
    followed_industries: tuple = ()
    system_prompt: str = ""

    def __post_init__(self):
        for name in BIAS_NAMES:
            level = self.bias_levels.get(name)
            if level not in BIAS_LEVELS:
                raise ValueError(f"bad bias level {name}={level}")
        if self.strategy not in ("fundamental", "technical"):
            raise ValueError(f"bad strategy {self.strategy}")


@dataclass(frozen=True)
class TransactionTemplate:
    """Summary of one template investor's trading pattern."""

    trade_count: int
    industry_probs: dict  # industry -> probability, sums to 1
    buy_prob: float = 0.6
    volume_mean: float = 40.0
    volume_sigma: float = 0.6  # lognormal sigma
    history_days: int = 30


def render_system_prompt(persona: Persona) -> str:
    return _PERSONA_TEMPLATE.format(
        gender=persona.gender, region=persona.region,
        followers=persona.followers,
        industries=", ".join(persona.followed_industries),
        strategy=persona.strategy, **persona.bias_levels)


def generate_personas(n: int, industries: list, rng: np.random.Generator):
    """Synthesize n personas plus a rationality ranking.

    Returns (personas, rank) where rank is a permutation of agent ids from
    most to least rational; strategy/capital assignment uses it separately so
    an externally supplied ranking can replace it.
    """
    personas = []
    for i in range(n):
        followed = tuple(sorted(rng.choice(
            industries, size=int(rng.integers(1, min(4, len(industries) + 1))),
            replace=False)))
        persona = Persona(
            agent_id=f"u{i:04d}",
            gender=str(rng.choice(("male", "female"))),
            region=str(rng.choice(_REGIONS)),
            followers=int(np.round(rng.lognormal(4.0, 1.2))),
            bias_levels={name: str(rng.choice(BIAS_LEVELS))
                         for name in BIAS_NAMES},
            followed_industries=followed,
        )
        personas.append(replace(
            persona, system_prompt=render_system_prompt(persona)))
    rank = [p.agent_id for p in personas]
    rng.shuffle(rank)
    return personas, rank


def assign_strategies_and_capital(personas: list, rationality_rank: list):
    """Top 40% of the ranking turn fundamental, top 10% get the large tier."""
    order = {agent_id: pos for pos, agent_id in enumerate(rationality_rank)}
    if sorted(order) != sorted(p.agent_id for p in personas):
        raise ValueError("rationality rank must be a permutation of agents")
    n = len(personas)
    n_fundamental = int(n * FUNDAMENTAL_FRACTION)
    n_large = int(n * LARGE_CAPITAL_FRACTION)
    out = []
    for p in personas:
        pos = order[p.agent_id]
        updated = replace(
            p,
            strategy="fundamental" if pos < n_fundamental else "technical",
            capital_tier="large" if pos < n_large else "normal",
        )
        out.append(replace(updated, system_prompt=render_system_prompt(updated)))
    return out


def synth_transactions(user_id: str, template: TransactionTemplate,
                       seed: int) -> list:
    """Generate trade records that stochastically mirror the template.

    Count jitters by +/-20% around the template count; industries,
    directions, and volumes are drawn from the template distributions and
    days resample uniformly over the history window.
    """
    if not template.industry_probs:
        raise EmptyTemplate("template has no industry distribution")
    rng = np.random.default_rng(seed)
    count = int(np.round(template.trade_count * rng.uniform(0.8, 1.2)))
    if count <= 0:
        return []
    industries = sorted(template.industry_probs)
    probs = np.array([template.industry_probs[i] for i in industries])
    probs = probs / probs.sum()
    records = []
    for _ in range(count):
        industry = industries[int(rng.choice(len(industries), p=probs))]
        direction = "buy" if rng.random() < template.buy_prob else "sell"
        volume = max(1, int(np.round(
            template.volume_mean * rng.lognormal(0.0, template.volume_sigma))))
        day = int(rng.integers(0, template.history_days))
        records.append(TradeRecord(user_id=user_id, industry=industry,
                                   day=day, direction=direction,
                                   volume=volume))
    records.sort(key=lambda r: (r.day, r.industry, r.direction, r.volume))
    return records


def save_personas(personas: list, path) -> None:
    with open(path, "w") as fh:
        for p in personas:
            row = asdict(p)
            row["followed_industries"] = list(p.followed_industries)
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def load_personas(path) -> list:
    personas = []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            row["followed_industries"] = tuple(row["followed_industries"])
            personas.append(Persona(**row))
    return personas
