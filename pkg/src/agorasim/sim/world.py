"""World state and the ten-phase daily loop.

Each day: sample active agents, deliver news to opinion leaders, let active
agents run their cognitive cycle against the day-start snapshot, auction and
settle the resulting orders, roll prices/bars/fundamentals forward, apply
social output, rebuild the similarity graph, feed realized returns back into
beliefs, and append everything to the event buffer.  Agents never see
anything from the current day before the auction: observations are built
from data through yesterday, by construction.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from .. import rng as rngmod
from ..agents import (AgentState, Observation, Feedback, decide, form_belief,
                      init_belief, intentions_to_orders, sentiment_score,
                      update_belief_from_feedback)
from ..agents.beliefs import BeliefInitParams
from ..agents.llm import HTTPChatClient, LLMPolicy
from ..agents.personas import (TransactionTemplate,
                               assign_strategies_and_capital,
                               generate_personas, load_personas,
                               synth_transactions)
from ..agents.policies import make_rule_policy
from ..errors import ConfigError, MissingData
from ..exchange import (FundamentalBase, IndexSpec, Portfolio,
                        adjust_fundamentals, compute_index, load_market_file,
                        match_call_auction, settle, update_daily_bar,
                        validate_batch)
from ..feed import NewsItem, PostStore, apply_action, inject_news, rank_feed
from ..socialgraph import (SocialGraph, TradeRecord, build_graph,
                           degree_centrality)
from .config import SimConfig, is_trading_day

DEFAULT_BASE_PRICE = 50.0

# Limit prices snap to a dyadic tick so every trade cost is an exact binary
# float: settlement then conserves cash to literally zero tolerance.
TICK = 1.0 / 256.0


def snap_price(price: float, prev_close: float) -> float:
    """Round to the tick grid, staying inside the +/-10% band."""
    lo, hi = prev_close * 0.9, prev_close * 1.1
    p = round(price / TICK) * TICK
    if p < lo:
        p = math.ceil(lo / TICK) * TICK
    if p > hi:
        p = math.floor(hi / TICK) * TICK
    return p


@dataclass
class WorldState:
    config: SimConfig
    agents: dict = field(default_factory=dict)  # agent_id -> AgentState
    portfolios: dict = field(default_factory=dict)
    store: PostStore = field(default_factory=PostStore)
    graph: SocialGraph = field(default_factory=SocialGraph)
    records: list = field(default_factory=list)  # TradeRecord history
    index_specs: dict = field(default_factory=dict)
    fundamentals: dict = field(default_factory=dict)  # stock -> FundamentalBase
    stock_industry: dict = field(default_factory=dict)  # stock -> index_id
    closes: dict = field(default_factory=dict)  # stock -> latest close
    bars: dict = field(default_factory=dict)  # stock -> [DailyBar]
    pb_history: dict = field(default_factory=dict)  # stock -> [pb]
    index_values: dict = field(default_factory=dict)  # index -> [value]
    news_by_day: dict = field(default_factory=dict)
    day: int = 0
    seq: int = 0
    events: list = field(default_factory=list)
    prev_assets: dict = field(default_factory=dict)  # agent -> prior valuation
    composite_history: list = field(default_factory=list)
    volume_history: list = field(default_factory=list)  # total units per day


def emit(state: WorldState, event_type: str, **payload) -> None:
    state.events.append({"day": state.day, "seq": state.seq,
                         "type": event_type, **payload})
    state.seq += 1


def load_news(path) -> list:
    """Read the news schedule (YAML list of item mappings)."""
    try:
        with open(path) as fh:
            rows = yaml.safe_load(fh) or []
    except FileNotFoundError as exc:
        raise MissingData(f"news file not found: {path}") from exc
    items = []
    for row in rows:
        items.append(NewsItem(
            item_id=str(row["item_id"]), day=int(row["day"]),
            content=str(row["content"]),
            is_rumor=bool(row.get("is_rumor", False)),
            category=str(row.get("category", "")),
            rumor_of=row.get("rumor_of")))
    return items


def default_market(industries) -> tuple:
    """One stock per industry at a flat base price, used without a market file."""
    specs, bases, mapping = {}, {}, {}
    for ind in industries:
        stock = f"{ind}_0"
        specs[ind] = IndexSpec(index_id=ind,
                               constituents={stock: (1.0, DEFAULT_BASE_PRICE)})
        bases[stock] = FundamentalBase(
            stock_id=stock, eps0=DEFAULT_BASE_PRICE / 12.0,
            bvps0=DEFAULT_BASE_PRICE / 2.0, sps0=DEFAULT_BASE_PRICE / 1.2,
            dps0=DEFAULT_BASE_PRICE / 40.0)
        mapping[stock] = ind
    return specs, bases, mapping


def _make_policy(persona, config: SimConfig):
    mode = config.policy_mode
    if mode == "llm" or (mode == "mixed" and persona.capital_tier == "large"):
        client = HTTPChatClient(
            endpoint=config.chat.endpoint, model=config.chat.model,
            api_key=os.environ.get("AGORASIM_API_KEY", ""),
            temperature=config.chat.temperature, timeout=config.chat.timeout)
        return LLMPolicy(client=client)
    return make_rule_policy(persona.strategy)


def build_world(config: SimConfig) -> WorldState:
    state = WorldState(config=config, day=config.start_day)

    if config.paths.market:
        state.index_specs, state.fundamentals = load_market_file(
            config.paths.market)
        for idx, spec in state.index_specs.items():
            for stock in spec.constituents:
                state.stock_industry[stock] = idx
        industries = tuple(sorted(state.index_specs))
    else:
        state.index_specs, state.fundamentals, state.stock_industry = (
            default_market(config.industries))
        industries = config.industries

    base_prices = {}
    for spec in state.index_specs.values():
        for stock, (_, p0) in spec.constituents.items():
            base_prices[stock] = p0
    state.closes = dict(base_prices)
    for stock, p0 in base_prices.items():
        state.bars[stock] = []
        state.pb_history[stock] = [p0 / state.fundamentals[stock].bvps0]
    for idx, spec in state.index_specs.items():
        state.index_values[idx] = [compute_index(spec, state.closes)]

    if config.paths.personas:
        personas = load_personas(config.paths.personas)
        if len(personas) != config.n_agents:
            raise ConfigError(
                f"persona file holds {len(personas)} agents, "
                f"config expects {config.n_agents}")
    else:
        gen_rng = rngmod.stream(config.seed, "personas")
        personas, rank = generate_personas(config.n_agents, list(industries),
                                           gen_rng)
        personas = assign_strategies_and_capital(personas, rank)

    if config.paths.news:
        for item in load_news(config.paths.news):
            state.news_by_day.setdefault(item.day, []).append(item)

    for persona in personas:
        agent_id = persona.agent_id
        belief = init_belief(BeliefInitParams(
            sentiment_percentile=config.belief_init.sentiment_percentile,
            variance=config.belief_init.variance,
            seed=rngmod.derive_seed(config.seed, "belief", agent_id)),
            day=config.start_day)
        state.agents[agent_id] = AgentState(
            persona=persona, belief=belief,
            policy=_make_policy(persona, config))

        cash = config.endowment.cash
        if persona.capital_tier == "large":
            cash *= 10.0
        pf = Portfolio(agent_id=agent_id, cash=cash)
        followed = _followed_stocks(state, persona)
        if followed and config.endowment.invest_fraction > 0:
            budget = cash * config.endowment.invest_fraction / len(followed)
            for stock in followed:
                units = int(budget // base_prices[stock])
                if units > 0:
                    pf.holdings[stock] = units
                    pf.cost_basis[stock] = base_prices[stock]
                    pf.cash -= units * base_prices[stock]
        state.portfolios[agent_id] = pf

        template = TransactionTemplate(
            trade_count=20,
            industry_probs={ind: 1.0 / len(persona.followed_industries)
                            for ind in persona.followed_industries})
        offset = config.start_day - template.history_days
        for rec in synth_transactions(
                agent_id, template,
                seed=rngmod.derive_seed(config.seed, "synthtx", agent_id)):
            state.records.append(TradeRecord(
                user_id=agent_id, industry=rec.industry,
                day=rec.day + offset, direction=rec.direction,
                volume=rec.volume))

    state.graph = build_graph(state.records, now=config.start_day,
                              params=config.graph,
                              users=list(state.agents))

    for agent_id in sorted(state.portfolios):
        pf = state.portfolios[agent_id]
        emit(state, "init", agent=agent_id, cash=round(pf.cash, 6),
             holdings={k: pf.holdings[k] for k in sorted(pf.holdings)})
        state.prev_assets[agent_id] = pf.total_value(state.closes)
    for stock in sorted(state.closes):
        emit(state, "price", asset=stock, close=state.closes[stock], volume=0)
    for idx in sorted(state.index_specs):
        emit(state, "index", index=idx,
             value=round(state.index_values[idx][-1], 8))
    state.composite_history.append(_composite(state))
    state.volume_history.append(0)
    return state


def _followed_stocks(state: WorldState, persona) -> list:
    stocks = []
    for ind in persona.followed_industries:
        spec = state.index_specs.get(ind)
        if spec:
            stocks.extend(spec.constituents)
    return sorted(set(stocks))


def _composite(state: WorldState) -> float:
    return float(np.mean([values[-1]
                          for _, values in sorted(state.index_values.items())]))


def _build_observation(state: WorldState, agent_id: str, deliveries: dict,
                       trading: bool) -> Observation:
    persona = state.agents[agent_id].persona
    pf = state.portfolios[agent_id]
    assets = sorted(set(_followed_stocks(state, persona)) | set(pf.holdings))
    feed_posts = rank_feed(agent_id, state.graph, state.store, state.day,
                           state.config.feed, state.config.graph.threshold)
    prev_close = {a: state.closes[a] for a in assets}
    obs = Observation(
        day=state.day, trading_day=trading,
        news=deliveries.get(agent_id, []),
        feed_posts=feed_posts,
        bars={a: state.bars[a] for a in assets},
        pb_history={a: state.pb_history[a] for a in assets},
        fundamentals={a: {"pb": state.pb_history[a][-1]} for a in assets},
        prev_close=prev_close,
        portfolio=pf,
        assets=assets,
        total_assets=pf.total_value(state.closes),
    )
    return obs


def run_day(state: WorldState) -> WorldState:
    config = state.config
    day = state.day
    trading = is_trading_day(day)

    # (1) active-agent sample: exactly round(activation * N), seeded.
    all_ids = sorted(state.agents)
    k = int(round(config.activation * len(all_ids)))
    sampler = rngmod.stream(config.seed, "activation", day)
    active = sorted(sampler.choice(all_ids, size=k, replace=False).tolist())

    # (2) news delivery to the m most central users.
    todays_news = state.news_by_day.get(day, [])
    deliveries = {}
    if todays_news:
        centrality = degree_centrality(state.graph)
        deliveries = inject_news(todays_news, centrality,
                                 config.injection_count,
                                 rumor_mode=config.scenario == "rumor")
        for user in sorted(deliveries):
            for item in deliveries[user]:
                emit(state, "delivery", user=user, item=item.item_id,
                     is_rumor=item.is_rumor)

    # (3) cognitive cycle against the day-start snapshot; no day-t market
    # data exists yet, so isolation holds by construction.
    outputs = {}
    orders = []
    seq = 0
    for agent_id in active:
        agent = state.agents[agent_id]
        obs = _build_observation(state, agent_id, deliveries, trading)
        agent.belief = form_belief(agent.belief, obs, day)
        policy_rng = rngmod.stream(config.seed, "agent", agent_id,
                                   "policy", day)
        output = decide(agent, obs, policy_rng)
        outputs[agent_id] = (output, obs)
        if trading:
            for order in intentions_to_orders(output, obs):
                orders.append(
                    type(order)(agent_id=order.agent_id,
                                asset_id=order.asset_id, side=order.side,
                                limit_price=snap_price(
                                    order.limit_price,
                                    state.closes[order.asset_id]),
                                quantity=order.quantity, seq=seq))
                seq += 1

    # (4)-(5) validate, auction per asset, settle.
    trades = []
    day_volume = 0
    volumes = dict.fromkeys(state.closes, 0)
    new_closes = dict(state.closes)
    if trading:
        accepted, rejected = validate_batch(orders, state.closes,
                                            state.portfolios)
        for order, reason in rejected:
            emit(state, "reject", agent=order.agent_id, asset=order.asset_id,
                 side=order.side, price=order.limit_price,
                 qty=order.quantity, reason=reason)
        for order in accepted:
            emit(state, "order", agent=order.agent_id, asset=order.asset_id,
                 side=order.side, price=order.limit_price, qty=order.quantity)
        by_asset = {}
        for order in accepted:
            by_asset.setdefault(order.asset_id, []).append(order)
        for asset in sorted(by_asset):
            price, asset_trades, _ = match_call_auction(
                by_asset[asset], state.closes[asset], day=day)
            if price is None:
                continue
            settle(asset_trades, state.portfolios)
            trades.extend(asset_trades)
            new_closes[asset] = price
            volumes[asset] = sum(t.quantity for t in asset_trades)
            day_volume += volumes[asset]
        for t in trades:
            emit(state, "trade", buyer=t.buyer_id, seller=t.seller_id,
                 asset=t.asset_id, price=t.price, qty=t.quantity)

    # (6) roll prices, bars, indices, fundamentals.
    if trading:
        state.closes = new_closes
        for stock in sorted(state.closes):
            bar = update_daily_bar(state.bars[stock], stock, day,
                                   state.closes[stock], volumes[stock])
            state.bars[stock].append(bar)
            _, pb, _, _ = adjust_fundamentals(state.fundamentals[stock],
                                              state.closes[stock])
            state.pb_history[stock].append(pb)
            emit(state, "price", asset=stock, close=state.closes[stock],
                 volume=volumes[stock])
        for idx in sorted(state.index_specs):
            value = compute_index(state.index_specs[idx], state.closes)
            state.index_values[idx].append(value)
            emit(state, "index", index=idx, value=round(value, 8))
        state.composite_history.append(_composite(state))
        state.volume_history.append(day_volume)

    # (7) posts and votes land after the auction.
    for agent_id in active:
        output, _ = outputs[agent_id]
        for action in output.actions:
            if action.post_id not in state.store.posts:
                continue
            new_post = apply_action(state.store, action.post_id,
                                    action.action, actor_id=agent_id,
                                    day=day, comment=action.comment)
            emit(state, "action", actor=agent_id, post=action.post_id,
                 action=action.action,
                 repost=(new_post.post_id
                         if action.action == "repost" else None))
        if output.post is not None:
            content, post_type = output.post
            post = state.store.add(agent_id, day, content, post_type)
            emit(state, "post", post=post.post_id, author=agent_id,
                 post_type=post_type, content=content)

    # (8) new trade records, then rebuild the decayed-similarity graph.
    for t in trades:
        industry = state.stock_industry[t.asset_id]
        state.records.append(TradeRecord(user_id=t.buyer_id,
                                         industry=industry, day=day,
                                         direction="buy", volume=t.quantity))
        state.records.append(TradeRecord(user_id=t.seller_id,
                                         industry=industry, day=day,
                                         direction="sell", volume=t.quantity))
    horizon = day - config.record_horizon
    state.records = [r for r in state.records if r.day >= horizon]
    state.graph = build_graph(state.records, now=day + 1, params=config.graph,
                              users=list(state.agents))

    # (9) environment response feeds realized returns back into beliefs.
    composite_return = 0.0
    if trading and len(state.composite_history) >= 2:
        prev, cur = state.composite_history[-2], state.composite_history[-1]
        composite_return = cur / prev - 1.0 if prev else 0.0
    updated = all_ids if config.beliefs_all_agents else active
    for agent_id in updated:
        assets_now = state.portfolios[agent_id].total_value(state.closes)
        prev = state.prev_assets[agent_id]
        own_return = assets_now / prev - 1.0 if prev else 0.0
        agent = state.agents[agent_id]
        agent.belief = update_belief_from_feedback(
            agent.belief, Feedback(market_return=composite_return,
                                   own_return=own_return), day)
        state.prev_assets[agent_id] = assets_now
        emit(state, "belief", agent=agent_id,
             sentiment=round(sentiment_score(agent.belief), 8))

    mean_sentiment = float(np.mean(
        [sentiment_score(state.agents[a].belief) for a in all_ids]))
    emit(state, "sentiment", mean=round(mean_sentiment, 8),
         active=len(active), trading=trading)

    state.day += 1
    return state
