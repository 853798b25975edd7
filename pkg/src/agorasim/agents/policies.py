"""Deterministic rule policies standing in for chat-backed decision making.

Both rules are pure functions of (observation, persona, belief, rng stream):
the fundamental rule trades on valuation z-scores gated by belief, the
technical rule on moving-average crossovers with volume confirmation and a
disposition-effect overlay.  They also emit feed reactions and a short post
whose wording carries the agent's sentiment, so opinions can propagate
through the lexicon channel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .beliefs import BeliefState, NEUTRAL, text_sentiment

Z_WINDOW = 20
Z_ENTRY = 1.0  # |z| needed before the fundamental rule acts
GAIN_TAKE_PROFIT = 0.10  # disposition: sell winners past +10%
BASE_POSITION_PCT = 20.0

# Underdiversification concentrates bets: higher level, bigger single-asset
# slice of total assets per trade.
_POSITION_CAP = {"low": 10.0, "medium": 20.0, "high": 35.0}
# Turnover level maps to the fraction of days an agent is willing to trade.
_ACT_PROB = {"low": 0.35, "medium": 0.65, "high": 1.0}

_BULLISH_PHRASES = (
    "I see room for a rebound and growing optimism in {asset}.",
    "Momentum looks strong in {asset}; I expect the rally to continue.",
    "Valuations look cheap, so {asset} seems undervalued to me.",
)
_BEARISH_PHRASES = (
    "I fear a downturn in {asset}; the selloff may continue.",
    "{asset} looks overvalued and I worry about a slump ahead.",
    "Sentiment around {asset} feels like panic; I am cutting exposure.",
)
_NEUTRAL_PHRASES = (
    "Staying on the sidelines for {asset} until the picture clears.",
    "No strong view on {asset} today; watching the volume.",
)


@dataclass(frozen=True)
class SocialAction:
    post_id: str
    action: str  # "like" | "unlike" | "repost"
    comment: str = ""


@dataclass
class PolicyOutput:
    intentions: dict = field(default_factory=dict)  # asset -> TradeIntention
    post: tuple | None = None  # (content, post_type)
    actions: list = field(default_factory=list)  # SocialAction
    narrative: str = ""
    queries: list = field(default_factory=list)


def _conviction(belief: BeliefState) -> float:
    """Signed distance of the belief mean from neutral, in [-1, 1]."""
    return max(-1.0, min(1.0, (belief.mean - NEUTRAL) / NEUTRAL))


def _sell_cap_pct(observation, asset: str) -> float:
    """Holding's share of total assets, the ceiling for any sell intention."""
    units = observation.portfolio.position(asset)
    if units <= 0:
        return 0.0
    total = observation.total_assets
    if total <= 0:
        return 0.0
    return 100.0 * units * observation.prev_close[asset] / total


def _make_intention(observation, asset, action, pct, target_price):
    from .cycle import TradeIntention  # local import avoids a cycle
    lo = observation.prev_close[asset] * 0.9
    hi = observation.prev_close[asset] * 1.1
    return TradeIntention(asset_id=asset, action=action,
                          trading_position=max(0.0, pct),
                          target_price=min(hi, max(lo, target_price)))


def _feed_reactions(observation, belief, rng) -> list:
    actions = []
    own_sign = np.sign(_conviction(belief))
    for post in observation.feed_posts:
        tone = text_sentiment(post.content)
        roll = rng.random()
        if tone == 0.0 or own_sign == 0:
            continue
        if np.sign(tone) == own_sign:
            if abs(tone) > 0.5 and roll < 0.15:
                actions.append(SocialAction(post.post_id, "repost",
                                            comment="Echoing this view."))
            elif roll < 0.6:
                actions.append(SocialAction(post.post_id, "like"))
        elif roll < 0.4:
            actions.append(SocialAction(post.post_id, "unlike"))
    return actions


def _compose_post(persona, belief, traded_assets, observation, rng):
    conviction = _conviction(belief)
    assets = list(traded_assets) or list(persona.followed_industries)
    if not assets:
        return None
    asset = assets[int(rng.integers(0, len(assets)))]
    if conviction > 0.05:
        phrases = _BULLISH_PHRASES
    elif conviction < -0.05:
        phrases = _BEARISH_PHRASES
    else:
        phrases = _NEUTRAL_PHRASES
    content = phrases[int(rng.integers(0, len(phrases)))].format(asset=asset)
    if traded_assets:
        post_type = "type2"
    elif observation.news:
        post_type = "type1"
    else:
        post_type = "type3"
    return content, post_type


def _queries(persona) -> list:
    return [f"{ind} outlook" for ind in persona.followed_industries]


CONVICTION_GATE = 0.25  # |conviction| needed for the sentiment overlay


def _belief_overlay(out, observation, belief, cap, rng) -> list:
    """Belief-driven exposure adjustment shared by both rules.

    Strong pessimism trims holdings and strong optimism adds exposure even
    without a valuation or crossover trigger; this is the channel through
    which circulating sentiment moves order flow.
    """
    conviction = _conviction(belief)
    traded = []
    if abs(conviction) < CONVICTION_GATE:
        return traded
    for asset in observation.tradable_assets():
        if asset in out.intentions:
            continue
        prev_close = observation.prev_close[asset]
        if conviction < 0:
            pct = min(cap, BASE_POSITION_PCT * -conviction,
                      _sell_cap_pct(observation, asset))
            if pct <= 0:
                continue
            target = prev_close * (1.0 + 0.04 * conviction
                                   + 0.01 * (rng.random() - 0.5))
            out.intentions[asset] = _make_intention(
                observation, asset, "sell", pct, target)
        else:
            pct = min(cap, BASE_POSITION_PCT * conviction)
            target = prev_close * (1.0 + 0.04 * conviction
                                   + 0.01 * (rng.random() - 0.5))
            out.intentions[asset] = _make_intention(
                observation, asset, "buy", pct, target)
        traded.append(asset)
    return traded


# Baseline chance of an unprompted trade per asset-day, scaled by the
# lottery-preference level.
_NOISE_TRADE_PROB = {"low": 0.05, "medium": 0.10, "high": 0.16}


def _noise_trades(out, observation, persona, belief, cap, rng) -> list:
    """Lottery-preference driven speculative trades.

    Keeps the market liquid when neither rule has a signal; direction is
    tilted by conviction so sentiment still leans on net order flow.
    """
    conviction = _conviction(belief)
    p_trade = _NOISE_TRADE_PROB[persona.bias_levels["lottery"]]
    traded = []
    for asset in observation.tradable_assets():
        if asset in out.intentions:
            continue
        if rng.random() >= p_trade:
            continue
        prev_close = observation.prev_close[asset]
        side = "buy" if rng.random() < 0.5 + conviction / 2.0 else "sell"
        if side == "sell" and observation.portfolio.position(asset) <= 0:
            side = "buy"
        pct = min(cap, 5.0 + 5.0 * rng.random())
        if side == "sell":
            pct = min(pct, _sell_cap_pct(observation, asset))
            if pct <= 0:
                continue
        target = prev_close * (1.0 + 0.04 * (rng.random() - 0.5)
                               + 0.02 * conviction)
        out.intentions[asset] = _make_intention(observation, asset, side,
                                                pct, target)
        traded.append(asset)
    return traded


def rule_fundamental_policy(observation, persona, belief: BeliefState,
                            rng: np.random.Generator) -> PolicyOutput:
    """Value rule: buy cheap-and-optimistic, sell rich-and-pessimistic.

    Cheap/rich is the z-score of the asset's price-to-book ratio against its
    trailing window; position size scales with conviction and is capped by
    the underdiversification level.
    """
    out = PolicyOutput(queries=_queries(persona))
    conviction = _conviction(belief)
    cap = _POSITION_CAP[persona.bias_levels["underdiversification"]]
    traded = []
    for asset in observation.tradable_assets():
        history = observation.pb_history.get(asset, [])
        if len(history) < 5:
            continue
        window = history[-Z_WINDOW:]
        std = float(np.std(window))
        if std == 0:
            continue
        z = (window[-1] - float(np.mean(window))) / std
        prev_close = observation.prev_close[asset]
        if z < -Z_ENTRY and conviction > 0:
            pct = min(cap, BASE_POSITION_PCT * conviction)
            target = prev_close * (1.0 + 0.03 * conviction)
            out.intentions[asset] = _make_intention(
                observation, asset, "buy", pct, target)
            traded.append(asset)
        elif z > Z_ENTRY and conviction < 0:
            pct = min(cap, BASE_POSITION_PCT * -conviction,
                      _sell_cap_pct(observation, asset))
            if pct <= 0:
                continue
            target = prev_close * (1.0 + 0.03 * conviction)
            out.intentions[asset] = _make_intention(
                observation, asset, "sell", pct, target)
            traded.append(asset)
    traded.extend(_belief_overlay(out, observation, belief, cap, rng))
    traded.extend(_noise_trades(out, observation, persona, belief, cap, rng))
    out.actions = _feed_reactions(observation, belief, rng)
    out.post = _compose_post(persona, belief, traded, observation, rng)
    return out


def rule_technical_policy(observation, persona, belief: BeliefState,
                          rng: np.random.Generator) -> PolicyOutput:
    """Momentum rule: trade moving-average crossovers, volume confirmed.

    The turnover level throttles how often the agent is active; the
    disposition level sells winners past the take-profit line and holds
    losers.
    """
    out = PolicyOutput(queries=_queries(persona))
    conviction = _conviction(belief)
    cap = _POSITION_CAP[persona.bias_levels["underdiversification"]]
    disposition = persona.bias_levels["disposition"]
    active = rng.random() < _ACT_PROB[persona.bias_levels["turnover"]]
    traded = []
    for asset in observation.tradable_assets():
        bars = observation.bars.get(asset, [])
        if not bars:
            continue
        today = bars[-1]
        prev_close = observation.prev_close[asset]
        units = observation.portfolio.position(asset)
        basis = observation.portfolio.cost_basis.get(asset, 0.0)
        gain = (prev_close - basis) / basis if units > 0 and basis > 0 else 0.0

        # Disposition overlay fires regardless of the activity throttle.
        if units > 0 and gain > GAIN_TAKE_PROFIT and disposition != "low":
            pct = _sell_cap_pct(observation, asset)
            if pct > 0:
                out.intentions[asset] = _make_intention(
                    observation, asset, "sell", min(pct, cap),
                    prev_close * 0.995)
                traded.append(asset)
            continue

        if not active or len(bars) < 2:
            continue
        yesterday = bars[-2]
        golden = today.ma_5 > today.ma_30 and yesterday.ma_5 <= yesterday.ma_30
        death = today.ma_5 < today.ma_30 and yesterday.ma_5 >= yesterday.ma_30
        confirmed = today.vol >= today.vol_5
        if golden and confirmed and conviction > -0.5:
            pct = min(cap, BASE_POSITION_PCT * (0.5 + max(0.0, conviction)))
            target = prev_close * (1.0 + 0.02 + 0.02 * max(0.0, conviction))
            out.intentions[asset] = _make_intention(
                observation, asset, "buy", pct, target)
            traded.append(asset)
        elif death and units > 0:
            if gain < 0 and disposition == "high":
                continue  # ride the loser
            pct = min(cap, _sell_cap_pct(observation, asset))
            if pct > 0:
                target = prev_close * (1.0 - 0.02 + 0.02 * min(0.0, conviction))
                out.intentions[asset] = _make_intention(
                    observation, asset, "sell", pct, target)
                traded.append(asset)
    traded.extend(_belief_overlay(out, observation, belief, cap, rng))
    traded.extend(_noise_trades(out, observation, persona, belief, cap, rng))
    out.actions = _feed_reactions(observation, belief, rng)
    out.post = _compose_post(persona, belief, traded, observation, rng)
    return out


def make_rule_policy(strategy: str):
    if strategy == "fundamental":
        return rule_fundamental_policy
    if strategy == "technical":
        return rule_technical_policy
    raise ValueError(f"unknown strategy {strategy}")
