"""Aggregate reconstruction from the event log alone.

No policy code runs here: prices, volumes, wealth, order flow, and sentiment
are all re-derived from logged events, so a finished run (including an
LLM-backed one) can be audited deterministically after the fact.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from ..analytics import (inequality, sell_buy_ratio, stylized_facts,
                         tracking_metrics)
from ..errors import LengthMismatch, MissingData, TooFewSamples, ZeroVariance


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def load_reference(path):
    """Reference series CSV with a day column and a value column."""
    values = []
    try:
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                values.append(float(row["value"]))
    except FileNotFoundError as exc:
        raise MissingData(f"reference file not found: {path}") from exc
    return values


def reports_from_events(events: list, reference_path=None) -> dict:
    """Compute the full report bundle from an ordered event list."""
    n_stocks = len({e["asset"] for e in events if e["type"] == "price"})
    n_indices = len({e["index"] for e in events if e["type"] == "index"})

    # Price events always arrive in complete sorted blocks (day 0 snapshot,
    # then one block per trading day); each block is one sample point.
    closes: dict = {}
    portfolios: dict = {}
    days, composite, volumes = [], [], []
    index_values: dict = {}
    sentiment_rows, gini_rows = [], []
    directions = []
    first_delivery = None
    block: list = []

    for event in events:
        etype = event["type"]
        if etype == "init":
            portfolios[event["agent"]] = (float(event["cash"]),
                                          dict(event["holdings"]))
        elif etype == "price":
            closes[event["asset"]] = event["close"]
            block.append(event)
            if len(block) == n_stocks:
                days.append(block[0]["day"])
                volumes.append(sum(e["volume"] for e in block))
                block = []
        elif etype == "index":
            index_values.setdefault(event["index"], []).append(event["value"])
            if all(len(v) == len(days) for v in index_values.values()) \
                    and len(index_values) == n_indices:
                composite.append(float(np.mean(
                    [v[-1] for _, v in sorted(index_values.items())])))
        elif etype == "order":
            directions.append(event["side"])
        elif etype == "trade":
            cost = event["price"] * event["qty"]
            bcash, bhold = portfolios[event["buyer"]]
            bhold[event["asset"]] = bhold.get(event["asset"], 0) + event["qty"]
            portfolios[event["buyer"]] = (bcash - cost, bhold)
            scash, shold = portfolios[event["seller"]]
            shold[event["asset"]] = shold.get(event["asset"], 0) - event["qty"]
            portfolios[event["seller"]] = (scash + cost, shold)
        elif etype == "delivery" and first_delivery is None:
            first_delivery = event["day"]
        elif etype == "sentiment":
            sentiment_rows.append([event["day"], event["mean"]])
            wealth = [cash + sum(units * closes[a]
                                 for a, units in holdings.items())
                      for cash, holdings in portfolios.values()]
            daily = inequality(wealth)
            gini_rows.append([event["day"], round(daily.gini, 10),
                              round(daily.top10_share, 10),
                              round(daily.bottom50_share, 10)])

    reports = {
        "days": days,
        "composite": composite,
        "volumes": volumes,
        "sentiment": sentiment_rows,
        "inequality": gini_rows,
        "injection_day": first_delivery,
        "order_counts": {
            "buy": directions.count("buy"),
            "sell": directions.count("sell"),
        },
        "sell_buy_ratio": _clean(sell_buy_ratio(directions)),
    }

    sf = None
    if len(composite) >= 5:
        try:
            sf = stylized_facts(composite, volumes)
        except (TooFewSamples, ZeroVariance):
            sf = None
    if sf is not None:
        reports["stylized_facts"] = {
            "kurtosis": _clean(sf.kurtosis),
            "leverage": _clean(sf.leverage),
            "volume_return_corr": _clean(sf.volume_return_corr),
            "volume_return_p": _clean(sf.volume_return_p),
            "garch_alpha": _clean(sf.garch_alpha),
            "garch_beta": _clean(sf.garch_beta),
            "garch_persistence": _clean(sf.garch_persistence),
            "garch_converged": sf.garch_converged,
            "n_returns": sf.n_returns,
        }
    else:
        reports["stylized_facts"] = None

    wealth = [cash + sum(units * closes[a] for a, units in holdings.items())
              for cash, holdings in portfolios.values()]
    final = inequality(wealth)
    reports["final_inequality"] = {
        "gini": round(final.gini, 10),
        "top10_share": round(final.top10_share, 10),
        "bottom50_share": round(final.bottom50_share, 10),
    }

    if reference_path:
        ref = load_reference(reference_path)
        try:
            rmse, mae, corr = tracking_metrics(composite, ref)
            reports["tracking"] = {"rmse": rmse, "mae": mae, "corr": corr}
        except LengthMismatch:
            reports["tracking"] = None
    else:
        reports["tracking"] = None
    return reports


def replay_run(run_dir) -> dict:
    """Recompute the report bundle for a finished run directory."""
    run_dir = Path(run_dir)
    events_path = run_dir / "events.jsonl"
    if not events_path.exists():
        raise MissingData(f"no event log in {run_dir}")
    events = []
    with open(events_path) as fh:
        for line in fh:
            if line.strip():
                events.append(json.loads(line))
    reference = None
    manifest_path = run_dir / "manifest.json"
    if manifest_path.exists():
        with open(manifest_path) as fh:
            manifest = json.load(fh)
        reference = manifest["config"]["paths"].get("reference")
    return reports_from_events(events, reference_path=reference)
