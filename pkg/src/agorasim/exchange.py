"""Order-driven daily call auction for industry indices.

One batch auction per asset per day: orders are validated against a +/-10%
price band around the previous close, matched at the single price that
maximizes executed volume (price priority, then submission order), and
settled against agent portfolios with strict cash/holdings conservation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

from .errors import MissingConstituent, SettlementFault

PRICE_BAND = 0.10

# Rejection reasons returned by validate_order.
PRICE_OUT_OF_BAND = "PriceOutOfBand"
INSUFFICIENT_CASH = "InsufficientCash"
INSUFFICIENT_HOLDINGS = "InsufficientHoldings"
BAD_QUANTITY = "BadQuantity"


@dataclass(frozen=True)
class Order:
    agent_id: str
    asset_id: str
    side: str  # "buy" | "sell"
    limit_price: float
    quantity: int
    seq: int


@dataclass(frozen=True)
class Trade:
    buyer_id: str
    seller_id: str
    asset_id: str
    price: float
    quantity: int
    day: int


@dataclass
class Portfolio:
    agent_id: str
    cash: float
    holdings: dict = field(default_factory=dict)  # asset_id -> units
    cost_basis: dict = field(default_factory=dict)  # asset_id -> avg unit cost

    def position(self, asset_id: str) -> int:
        return self.holdings.get(asset_id, 0)

    def total_value(self, closes: dict) -> float:
        value = self.cash
        for asset, units in self.holdings.items():
            value += units * closes[asset]
        return value


@dataclass(frozen=True)
class IndexSpec:
    """Fixed-weight index over constituent stocks.

    ``constituents`` maps stock_id -> (weight at t=0, base price at t=0).
    Weights must sum to 1; the base index value anchors the level.
    """

    index_id: str
    constituents: dict
    base_value: float = 100.0

    def __post_init__(self):
        total = sum(w for w, _ in self.constituents.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights for {self.index_id} sum to {total}, expected 1")
        for stock, (_, p0) in self.constituents.items():
            if p0 <= 0:
                raise ValueError(f"non-positive base price for {stock}")


@dataclass(frozen=True)
class FundamentalBase:
    """Static per-share base values captured at t=0."""

    stock_id: str
    eps0: float
    bvps0: float
    sps0: float
    dps0: float

    def __post_init__(self):
        if self.bvps0 <= 0 or self.sps0 <= 0:
            raise ValueError("bvps0 and sps0 must be positive")


@dataclass(frozen=True)
class DailyBar:
    asset_id: str
    day: int
    close: float
    pre_close: float
    change: float
    pct_chg: float
    vol: int
    vol_5: float
    vol_10: float
    vol_30: float
    ma_5: float
    ma_10: float
    ma_30: float


def validate_order(order: Order, prev_close: float, portfolio: Portfolio,
                   reserved_cash: float = 0.0, reserved_units: int = 0):
    """Validate one order against the price band and the agent's portfolio.

    ``reserved_cash``/``reserved_units`` account for earlier accepted orders
    from the same agent in the same batch.  Returns (True, None) or
    (False, reason).
    """
    if order.quantity <= 0:
        return False, BAD_QUANTITY
    lo = prev_close * (1.0 - PRICE_BAND)
    hi = prev_close * (1.0 + PRICE_BAND)
    # Band endpoints are attainable; tolerate float noise at the boundary.
    if order.limit_price < lo - 1e-9 or order.limit_price > hi + 1e-9:
        return False, PRICE_OUT_OF_BAND
    if order.side == "buy":
        needed = order.limit_price * order.quantity
        if portfolio.cash - reserved_cash < needed - 1e-9:
            return False, INSUFFICIENT_CASH
    else:
        if portfolio.position(order.asset_id) - reserved_units < order.quantity:
            return False, INSUFFICIENT_HOLDINGS
    return True, None


def validate_batch(orders: list, prev_closes: dict, portfolios: dict):
    """Validate a day's orders in seq order with running reservations.

    Returns (accepted, rejected) where rejected holds (order, reason) pairs.
    """
    accepted, rejected = [], []
    cash_reserved: dict = {}
    units_reserved: dict = {}
    for order in sorted(orders, key=lambda o: o.seq):
        pf = portfolios[order.agent_id]
        ok, reason = validate_order(
            order, prev_closes[order.asset_id], pf,
            reserved_cash=cash_reserved.get(order.agent_id, 0.0),
            reserved_units=units_reserved.get((order.agent_id, order.asset_id), 0),
        )
        if not ok:
            rejected.append((order, reason))
            continue
        accepted.append(order)
        if order.side == "buy":
            cash_reserved[order.agent_id] = (
                cash_reserved.get(order.agent_id, 0.0)
                + order.limit_price * order.quantity
            )
        else:
            key = (order.agent_id, order.asset_id)
            units_reserved[key] = units_reserved.get(key, 0) + order.quantity
    return accepted, rejected


def _executable_volume(buys, sells, price):
    buy_vol = sum(o.quantity for o in buys if o.limit_price >= price)
    sell_vol = sum(o.quantity for o in sells if o.limit_price <= price)
    return min(buy_vol, sell_vol)


def clearing_price(orders: list, prev_close: float):
    """Price maximizing executable volume, or (None, 0) if no cross.

    Candidates are the distinct limit prices present.  Ties go to the price
    closest to the previous close, then to the lower price, which keeps runs
    deterministic.
    """
    buys = [o for o in orders if o.side == "buy"]
    sells = [o for o in orders if o.side == "sell"]
    if not buys or not sells:
        return None, 0
    best_price, best_vol = None, 0
    for price in sorted({o.limit_price for o in orders}):
        vol = _executable_volume(buys, sells, price)
        if vol == 0:
            continue
        if (best_price is None
                or vol > best_vol
                or (vol == best_vol
                    and (abs(price - prev_close), price)
                    < (abs(best_price - prev_close), best_price))):
            best_price, best_vol = price, vol
    return best_price, best_vol


def match_call_auction(orders: list, prev_close: float, day: int = 0):
    """Match one asset's validated orders in a single call auction.

    Returns (clearing_price | None, trades, unfilled_orders).  The short side
    fills completely; at most one marginal order on the long side is filled
    partially, chosen by price priority then seq.
    """
    price, volume = clearing_price(orders, prev_close)
    if price is None:
        return None, [], list(orders)

    buys = sorted((o for o in orders if o.side == "buy" and o.limit_price >= price),
                  key=lambda o: (-o.limit_price, o.seq))
    sells = sorted((o for o in orders if o.side == "sell" and o.limit_price <= price),
                   key=lambda o: (o.limit_price, o.seq))
    excluded = [o for o in orders
                if (o.side == "buy" and o.limit_price < price)
                or (o.side == "sell" and o.limit_price > price)]

    trades = []
    leftovers = []
    bi, si = 0, 0
    buy_left = buys[0].quantity if buys else 0
    sell_left = sells[0].quantity if sells else 0
    remaining = volume
    while remaining > 0:
        qty = min(buy_left, sell_left, remaining)
        trades.append(Trade(
            buyer_id=buys[bi].agent_id, seller_id=sells[si].agent_id,
            asset_id=buys[bi].asset_id, price=price, quantity=qty, day=day,
        ))
        remaining -= qty
        buy_left -= qty
        sell_left -= qty
        if buy_left == 0:
            bi += 1
            buy_left = buys[bi].quantity if bi < len(buys) else 0
        if sell_left == 0:
            si += 1
            sell_left = sells[si].quantity if si < len(sells) else 0

    # Anything not fully filled at the clearing price expires unfilled.
    if buy_left > 0:
        leftovers.append(replace(buys[bi], quantity=buy_left))
        bi += 1
    leftovers.extend(buys[bi:])
    if sell_left > 0:
        leftovers.append(replace(sells[si], quantity=sell_left))
        si += 1
    leftovers.extend(sells[si:])
    leftovers.extend(excluded)
    return price, trades, leftovers


def settle(trades: list, portfolios: dict) -> None:
    """Apply trades to portfolios in place.  Zero-sum, no fees.

    Raises SettlementFault if any balance would go negative, which can only
    happen if validation or matching is broken.
    """
    for t in trades:
        buyer = portfolios[t.buyer_id]
        seller = portfolios[t.seller_id]
        cost = t.price * t.quantity
        if buyer.cash < cost - 1e-6:
            raise SettlementFault(
                f"buyer {t.buyer_id} cash {buyer.cash} < {cost}")
        if seller.position(t.asset_id) < t.quantity:
            raise SettlementFault(
                f"seller {t.seller_id} holds {seller.position(t.asset_id)} "
                f"< {t.quantity} of {t.asset_id}")
        held = buyer.position(t.asset_id)
        prev_cost = buyer.cost_basis.get(t.asset_id, 0.0)
        buyer.cost_basis[t.asset_id] = (
            (prev_cost * held + cost) / (held + t.quantity))
        buyer.cash -= cost
        buyer.holdings[t.asset_id] = held + t.quantity
        seller.cash += cost
        seller.holdings[t.asset_id] = seller.position(t.asset_id) - t.quantity
        if seller.holdings[t.asset_id] == 0:
            del seller.holdings[t.asset_id]
            seller.cost_basis.pop(t.asset_id, None)


def compute_index(spec: IndexSpec, prices: dict) -> float:
    """Fixed-weight index level: base * sum_j w_j0 * P_jt / P_j0."""
    total = 0.0
    for stock, (weight, base_price) in spec.constituents.items():
        if stock not in prices:
            raise MissingConstituent(f"{spec.index_id} missing price for {stock}")
        total += weight * prices[stock] / base_price
    return spec.base_value * total


def adjust_fundamentals(base: FundamentalBase, sim_price: float):
    """Valuation ratios re-derived from the simulated price.

    Returns (pe, pb, ps, dv); pe is None when base earnings are not positive.
    """
    pe = sim_price / base.eps0 if base.eps0 > 0 else None
    pb = sim_price / base.bvps0
    ps = sim_price / base.sps0
    dv = base.dps0 / sim_price
    return pe, pb, ps, dv


def update_daily_bar(history: list, asset_id: str, day: int,
                     close: float, vol: int) -> DailyBar:
    """Build today's bar; moving stats truncate to the available history."""
    closes = [b.close for b in history] + [close]
    vols = [b.vol for b in history] + [vol]
    pre_close = history[-1].close if history else close

    def tail_mean(xs, window):
        win = xs[-min(window, len(xs)):]
        return sum(win) / len(win)

    change = close - pre_close
    return DailyBar(
        asset_id=asset_id, day=day, close=close, pre_close=pre_close,
        change=change, pct_chg=change / pre_close, vol=vol,
        vol_5=tail_mean(vols, 5), vol_10=tail_mean(vols, 10),
        vol_30=tail_mean(vols, 30),
        ma_5=tail_mean(closes, 5), ma_10=tail_mean(closes, 10),
        ma_30=tail_mean(closes, 30),
    )


def load_market_file(path):
    """Read the combined constituents/fundamentals file.

    Columns: index_id, stock_id, w_j0, P_j0, eps0, bvps0, sps0, dps0.
    Returns ({index_id: IndexSpec}, {stock_id: FundamentalBase}).
    """
    rows_by_index: dict = {}
    fundamentals: dict = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            idx = row["index_id"]
            stock = row["stock_id"]
            rows_by_index.setdefault(idx, {})[stock] = (
                float(row["w_j0"]), float(row["P_j0"]))
            fundamentals[stock] = FundamentalBase(
                stock_id=stock, eps0=float(row["eps0"]),
                bvps0=float(row["bvps0"]), sps0=float(row["sps0"]),
                dps0=float(row["dps0"]))
    specs = {idx: IndexSpec(index_id=idx, constituents=cons)
             for idx, cons in rows_by_index.items()}
    return specs, fundamentals
