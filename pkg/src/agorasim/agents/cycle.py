"""The daily cognitive cycle: perceive, want, commit, act, observe, revise.

The cycle is split into granular steps (form_belief / decide /
update_belief_from_feedback) so the day orchestrator can interleave the
market auction between action execution and environment response, while
``bdi_cycle`` runs all six phases in one call for self-contained use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import PolicyFailure
from ..exchange import Order, Portfolio
from .beliefs import BeliefState, signal_to_dim, smooth_dims, text_sentiment
from .personas import Persona
from .policies import PolicyOutput

PHASES = ("belief_formation", "desire_generation", "intention_planning",
          "action_execution", "environment_response", "belief_update")

# How strongly realized returns move the trend/self-assessment dims: a +/-4%
# day saturates the signal.
_RETURN_SIGNAL_GAIN = 25.0


@dataclass(frozen=True)
class TradeIntention:
    asset_id: str
    action: str  # "buy" | "sell" | "hold"
    trading_position: float  # percent of total assets, >= 0
    target_price: float

    def __post_init__(self):
        if self.action not in ("buy", "sell", "hold"):
            raise ValueError(f"bad action {self.action}")
        if self.trading_position < 0:
            raise ValueError("trading_position must be non-negative")
        if self.action == "hold" and self.trading_position != 0:
            raise ValueError("hold implies a zero position")


@dataclass(frozen=True)
class DesireQuery:
    queries: tuple
    stock_ids: tuple = ()


@dataclass
class Observation:
    """Everything an agent may see before today's auction (data <= t-1)."""

    day: int
    trading_day: bool
    news: list = field(default_factory=list)
    feed_posts: list = field(default_factory=list)
    bars: dict = field(default_factory=dict)  # asset -> [DailyBar], oldest first
    pb_history: dict = field(default_factory=dict)  # asset -> [pb]
    fundamentals: dict = field(default_factory=dict)  # asset -> ratio dict
    prev_close: dict = field(default_factory=dict)
    portfolio: Portfolio | None = None
    recommendations: list = field(default_factory=list)
    assets: list = field(default_factory=list)  # followed + recommended + held
    total_assets: float = 0.0

    def tradable_assets(self) -> list:
        return self.assets


@dataclass(frozen=True)
class Feedback:
    """Environment response after the auction settles."""

    market_return: float = 0.0
    own_return: float = 0.0
    fills: dict = field(default_factory=dict)  # asset -> signed units


@dataclass
class AgentState:
    persona: Persona
    belief: BeliefState
    policy: object  # callable(observation, persona, belief, rng) -> PolicyOutput


def form_belief(belief: BeliefState, observation: Observation,
                day: int) -> BeliefState:
    """Phase 1: fold today's news and feed into the belief dimensions."""
    targets = {}
    if observation.news:
        signal = float(np.mean([text_sentiment(n.content)
                                for n in observation.news]))
        targets["fundamentals"] = signal_to_dim(signal)
    if observation.feed_posts:
        signal = float(np.mean([text_sentiment(p.content)
                                for p in observation.feed_posts]))
        targets["peer_sentiment"] = signal_to_dim(signal)
    zs = []
    for asset, history in observation.pb_history.items():
        if len(history) >= 5:
            window = history[-20:]
            std = float(np.std(window))
            if std > 0:
                zs.append((window[-1] - float(np.mean(window))) / std)
    if zs:
        # Expensive market (positive z) lowers the valuation outlook.
        targets["valuation"] = signal_to_dim(-float(np.mean(zs)) / 2.0)
    if not targets:
        return belief
    return smooth_dims(belief, targets, day)


def decide(agent: AgentState, observation: Observation,
           rng: np.random.Generator) -> PolicyOutput:
    """Phases 2-3: desires then committed intentions, via the agent policy.

    A policy that raises PolicyFailure degrades to hold-and-abstain.
    """
    try:
        output = agent.policy(observation, agent.persona, agent.belief, rng)
    except PolicyFailure:
        return PolicyOutput()
    return output


def intentions_to_orders(output: PolicyOutput, observation: Observation) -> list:
    """Phase 4 helper: percent-of-assets intentions to integer-unit orders.

    Buys are clipped so the whole batch stays within available cash; sells
    are clipped to current holdings.  Orders come back with seq=0 and are
    sequenced by the orchestrator.
    """
    portfolio = observation.portfolio
    orders = []
    cash_left = portfolio.cash
    for asset in sorted(output.intentions):
        intent = output.intentions[asset]
        if intent.action == "hold" or intent.trading_position <= 0:
            continue
        units = math.floor(intent.trading_position / 100.0
                           * observation.total_assets / intent.target_price)
        if intent.action == "buy":
            affordable = math.floor(cash_left / intent.target_price)
            units = min(units, affordable)
            if units <= 0:
                continue
            cash_left -= units * intent.target_price
        else:
            units = min(units, portfolio.position(asset))
            if units <= 0:
                continue
        orders.append(Order(agent_id=portfolio.agent_id, asset_id=asset,
                            side=intent.action, limit_price=intent.target_price,
                            quantity=units, seq=0))
    return orders


def update_belief_from_feedback(belief: BeliefState, feedback: Feedback,
                                day: int) -> BeliefState:
    """Phase 6: revise trend and self-assessment from realized returns."""
    clip = lambda s: max(-1.0, min(1.0, s))
    targets = {
        "trend": signal_to_dim(clip(feedback.market_return
                                    * _RETURN_SIGNAL_GAIN)),
        "self_assessment": signal_to_dim(clip(feedback.own_return
                                              * _RETURN_SIGNAL_GAIN)),
    }
    return smooth_dims(belief, targets, day)


@dataclass
class CycleResult:
    orders: list
    social_actions: list
    post: tuple | None
    belief: BeliefState
    output: PolicyOutput
    phases: tuple = PHASES


def bdi_cycle(agent: AgentState, observation: Observation,
              rng: np.random.Generator,
              feedback_fn=None) -> CycleResult:
    """Run the full six-phase cycle for one agent-day.

    ``feedback_fn(orders, actions) -> Feedback`` supplies the environment
    response; without one the environment is taken as unchanged (neutral
    feedback), which still exercises the belief-update phase.
    """
    belief = form_belief(agent.belief, observation, observation.day)
    agent.belief = belief
    output = decide(agent, observation, rng)
    orders = (intentions_to_orders(output, observation)
              if observation.trading_day else [])
    feedback = (feedback_fn(orders, output.actions)
                if feedback_fn is not None else Feedback())
    belief = update_belief_from_feedback(belief, feedback, observation.day)
    agent.belief = belief
    return CycleResult(orders=orders, social_actions=output.actions,
                       post=output.post, belief=belief, output=output)
