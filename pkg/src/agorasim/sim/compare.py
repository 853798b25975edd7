"""Stylized-facts comparison across the classical baselines and the engine."""

from __future__ import annotations

import csv
import math

import numpy as np

from ..analytics import (garch_fit, kurtosis, leverage_effect, log_returns,
                         volume_return_test)
from ..baselines import BHParams, HPMParams, simulate_bh, simulate_hpm
from ..errors import (LengthMismatch, MissingData, TooFewSamples,
                      ZeroVariance)

COLUMNS = ("kurtosis", "leverage", "volume_return_corr", "volume_return_p",
           "garch_persistence")


def _metrics(returns, volumes=None) -> dict:
    row = dict.fromkeys(COLUMNS, math.nan)
    try:
        row["kurtosis"] = kurtosis(returns)
    except (TooFewSamples, ZeroVariance):
        pass
    try:
        row["leverage"] = leverage_effect(returns)
    except (TooFewSamples, ZeroVariance):
        pass
    if volumes is not None:
        try:
            dv = np.diff(np.asarray(volumes, dtype=float))
            row["volume_return_corr"], row["volume_return_p"] = (
                volume_return_test(dv, returns))
        except (TooFewSamples, ZeroVariance, LengthMismatch):
            pass
    try:
        _, alpha, beta, _, ok = garch_fit(returns)
        if ok:
            row["garch_persistence"] = alpha + beta
    except (TooFewSamples, ZeroVariance):
        pass
    return row


def _median_rows(rows: list) -> dict:
    out = {}
    for col in COLUMNS:
        values = [r[col] for r in rows if not math.isnan(r[col])]
        out[col] = float(np.median(values)) if values else math.nan
    return out


def load_reference_market(path):
    """CSV with value and volume columns; volume may be absent."""
    prices, volumes = [], []
    try:
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                prices.append(float(row["value"]))
                if "volume" in row and row["volume"]:
                    volumes.append(float(row["volume"]))
    except FileNotFoundError as exc:
        raise MissingData(f"reference file not found: {path}") from exc
    return prices, volumes or None


def compare_baselines(seeds=range(10), horizon: int = 2000,
                      reference_path=None, engine_reports=None) -> list:
    """One metrics row per system, medians over the seed set."""
    hpm_rows, bh_rows = [], []
    for seed in seeds:
        _, returns, _ = simulate_hpm(HPMParams(horizon=horizon, seed=seed))
        hpm_rows.append(_metrics(returns))
        _, returns, _ = simulate_bh(BHParams(horizon=horizon, seed=seed))
        bh_rows.append(_metrics(returns))
    table = [
        {"system": "HPM", **_median_rows(hpm_rows)},
        {"system": "BH", **_median_rows(bh_rows)},
    ]
    if reference_path:
        prices, volumes = load_reference_market(reference_path)
        table.append({"system": "RealData",
                      **_metrics(log_returns(prices), volumes)})
    if engine_reports is not None and engine_reports.get("stylized_facts"):
        sf = engine_reports["stylized_facts"]
        table.append({"system": "Engine",
                      "kurtosis": sf["kurtosis"],
                      "leverage": sf["leverage"],
                      "volume_return_corr": sf["volume_return_corr"],
                      "volume_return_p": sf["volume_return_p"],
                      "garch_persistence": sf["garch_persistence"]})
    return table


def render_table(table: list) -> str:
    header = ["system"] + list(COLUMNS)
    lines = ["\t".join(header)]
    for row in table:
        cells = [str(row["system"])]
        for col in COLUMNS:
            value = row.get(col)
            if value is None or (isinstance(value, float)
                                 and math.isnan(value)):
                cells.append("-")
            else:
                cells.append(f"{value:.4f}")
        lines.append("\t".join(cells))
    return "\n".join(lines)
