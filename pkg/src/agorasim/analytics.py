"""Stylized-facts and socio-economic measurement suite.

Operates on any price/volume/wealth series, whether produced by the agent
engine, the classical baselines, or loaded from a reference file.  The four
stylized facts are quantified as: Pearson kurtosis of log returns (fat
tails), conditional |return| autocorrelation after negative returns
(leverage effect), the volume-change/|return| correlation test, and the
alpha+beta persistence of a fitted GARCH(1,1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, signal, stats

from .errors import AllZero, LengthMismatch, TooFewSamples, ZeroVariance


@dataclass(frozen=True)
class StylizedFactsReport:
    kurtosis: float
    leverage: float
    volume_return_corr: float
    volume_return_p: float
    garch_omega: float
    garch_alpha: float
    garch_beta: float
    garch_converged: bool
    n_returns: int

    @property
    def garch_persistence(self) -> float:
        return self.garch_alpha + self.garch_beta


@dataclass(frozen=True)
class InequalityReport:
    gini: float
    top10_share: float
    bottom50_share: float


def log_returns(prices) -> np.ndarray:
    prices = np.asarray(prices, dtype=float)
    if np.any(prices <= 0):
        raise ValueError("log returns need positive prices")
    return np.diff(np.log(prices))


def kurtosis(returns) -> float:
    """Raw (non-excess) Pearson kurtosis m4 / m2^2; 3 for a Gaussian."""
    r = np.asarray(returns, dtype=float)
    if r.size < 4:
        raise TooFewSamples(f"kurtosis needs >= 4 samples, got {r.size}")
    centered = r - r.mean()
    m2 = np.mean(centered ** 2)
    if m2 == 0:
        raise ZeroVariance("constant return series")
    return float(np.mean(centered ** 4) / m2 ** 2)


def leverage_effect(returns, lag: int = 1) -> float:
    """Correlation of |r_t| with |r_(t+lag)| restricted to days with r_t < 0."""
    r = np.asarray(returns, dtype=float)
    idx = np.nonzero(r[:-lag] < 0)[0] if lag > 0 else np.nonzero(r < 0)[0]
    if idx.size < 10:
        raise TooFewSamples(f"need >= 10 negative-return days, got {idx.size}")
    a = np.abs(r[idx])
    b = np.abs(r[idx + lag])
    if a.std() == 0 or b.std() == 0:
        raise ZeroVariance("degenerate |return| subset")
    return float(stats.pearsonr(a, b).statistic)


def volume_return_test(volume_changes, returns):
    """(correlation, p-value) between volume change and |log return|."""
    dv = np.asarray(volume_changes, dtype=float)
    r = np.abs(np.asarray(returns, dtype=float))
    if dv.size != r.size:
        raise LengthMismatch(f"{dv.size} != {r.size}")
    if dv.size < 10:
        raise TooFewSamples(f"need >= 10 observations, got {dv.size}")
    if dv.std() == 0 or r.std() == 0:
        raise ZeroVariance("constant series in volume-return test")
    res = stats.pearsonr(dv, r)
    return float(res.statistic), float(res.pvalue)


def _garch_filter(r2_lagged: np.ndarray, omega: float, alpha: float,
                  beta: float, s0: float) -> np.ndarray:
    # sigma2[t] = omega + alpha * r2[t-1] + beta * sigma2[t-1], a linear
    # recursion solvable with an IIR filter instead of a Python loop.
    x = omega + alpha * r2_lagged
    out, _ = signal.lfilter([1.0], [1.0, -beta], x, zi=np.array([beta * s0]))
    return out


def _garch_negloglik(params, r, r2_lagged, s0):
    omega, alpha, beta = params
    if omega <= 0 or alpha < 0 or beta < 0 or alpha + beta >= 1:
        return 1e12
    sigma2 = np.empty_like(r)
    sigma2[0] = s0
    sigma2[1:] = _garch_filter(r2_lagged, omega, alpha, beta, s0)
    if np.any(sigma2 <= 0):
        return 1e12
    return 0.5 * float(np.sum(np.log(2 * np.pi * sigma2) + r ** 2 / sigma2))


# Multi-start grid; robustness without exposing tuning knobs.
GARCH_STARTS = [(a, b) for a in (0.05, 0.10, 0.20) for b in (0.60, 0.80, 0.90)]


def garch_fit(returns):
    """Gaussian GARCH(1,1) maximum likelihood fit.

    Returns (omega, alpha, beta, loglik, converged).  The fit is run on
    standardized returns from a fixed start grid and is deterministic for a
    given input; ``converged`` is False when every start fails, in which case
    the best point found is still reported.
    """
    r = np.asarray(returns, dtype=float)
    if r.size < 50:
        raise TooFewSamples(f"garch fit needs >= 50 returns, got {r.size}")
    r = r - r.mean()
    scale = r.std()
    if scale == 0:
        raise ZeroVariance("constant return series")
    z = r / scale
    z2_lagged = z[:-1] ** 2
    s0 = 1.0  # standardized sample variance

    best = None
    converged = False
    for alpha0, beta0 in GARCH_STARTS:
        omega0 = max(1.0 - alpha0 - beta0, 1e-4)
        res = optimize.minimize(
            _garch_negloglik, x0=np.array([omega0, alpha0, beta0]),
            args=(z, z2_lagged, s0), method="Nelder-Mead",
            options={"xatol": 1e-6, "fatol": 1e-8, "maxiter": 2000},
        )
        if best is None or res.fun < best.fun:
            best = res
        converged = converged or bool(res.success)
    omega, alpha, beta = best.x
    alpha = max(alpha, 0.0)
    beta = max(beta, 0.0)
    valid = omega > 0 and alpha + beta < 1
    return (float(omega * scale ** 2), float(alpha), float(beta),
            float(-best.fun), bool(converged and valid))


def simulate_garch(omega: float, alpha: float, beta: float, n: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Self-simulation used by the recovery oracle."""
    r = np.empty(n)
    sigma2 = omega / (1.0 - alpha - beta)
    for t in range(n):
        r[t] = math.sqrt(sigma2) * rng.standard_normal()
        sigma2 = omega + alpha * r[t] ** 2 + beta * sigma2
    return r


def gini(wealths) -> float:
    """Gini coefficient in [0, 1] via the sorted-rank formula."""
    w = np.asarray(wealths, dtype=float)
    if np.any(w < 0):
        raise ValueError("negative wealth")
    total = w.sum()
    if total == 0:
        raise AllZero("all wealths zero")
    n = w.size
    ranked = np.sort(w)
    i = np.arange(1, n + 1)
    return float(2.0 * np.sum(i * ranked) / (n * total) - (n + 1) / n)


def wealth_shares(wealths):
    """(top-decile share, bottom-half share) of total wealth."""
    w = np.asarray(wealths, dtype=float)
    if w.sum() == 0:
        raise AllZero("all wealths zero")
    ranked = np.sort(w)[::-1]
    n = w.size
    top_n = max(1, n // 10)
    bottom_n = n // 2
    top = ranked[:top_n].sum() / w.sum()
    bottom = ranked[n - bottom_n:].sum() / w.sum() if bottom_n else 0.0
    return float(top), float(bottom)


def turnover_and_return(traded_values: dict, asset_values: dict,
                        agent_ids: list):
    """Per-agent turnover/return plus top-10% and bottom-50% group means.

    ``traded_values`` maps day -> {agent: value traded that day};
    ``asset_values`` maps day -> {agent: total assets at day end}.  Turnover
    is the mean over days of traded value / total assets; return compares the
    final valuation to the first.  Groups are ranked by return.
    """
    days = sorted(asset_values)
    if not days:
        raise TooFewSamples("no valuation days")
    per_agent = {}
    for agent in agent_ids:
        ratios = []
        for day in days:
            value = asset_values[day][agent]
            traded = traded_values.get(day, {}).get(agent, 0.0)
            ratios.append(traded / value if value > 0 else 0.0)
        initial = asset_values[days[0]][agent]
        final = asset_values[days[-1]][agent]
        ret = (final - initial) / initial if initial > 0 else 0.0
        per_agent[agent] = (sum(ratios) / len(ratios), ret)

    ranked = sorted(agent_ids, key=lambda a: (-per_agent[a][1], a))
    n = len(ranked)
    top = ranked[:max(1, n // 10)]
    bottom = ranked[n - n // 2:] if n // 2 else []

    def group_mean(group):
        if not group:
            return 0.0, 0.0
        t = sum(per_agent[a][0] for a in group) / len(group)
        r = sum(per_agent[a][1] for a in group) / len(group)
        return t, r

    return per_agent, group_mean(top), group_mean(bottom)


def tracking_metrics(sim_series, ref_series):
    """(rmse, mae, corr) between series normalized to start at 1."""
    sim = np.asarray(sim_series, dtype=float)
    ref = np.asarray(ref_series, dtype=float)
    if sim.size != ref.size:
        raise LengthMismatch(f"{sim.size} != {ref.size}")
    if sim.size < 2:
        raise TooFewSamples("need at least two points")
    sim = sim / sim[0]
    ref = ref / ref[0]
    diff = sim - ref
    rmse = float(np.sqrt(np.mean(diff ** 2)))
    mae = float(np.mean(np.abs(diff)))
    if sim.std() == 0 or ref.std() == 0:
        corr = 1.0 if rmse == 0 else 0.0
    else:
        corr = float(stats.pearsonr(sim, ref).statistic)
    return rmse, mae, corr


def sell_buy_ratio(directions) -> float:
    """count(sell) / count(buy); +inf flags a window with sells but no buys."""
    sells = sum(1 for d in directions if d == "sell")
    buys = sum(1 for d in directions if d == "buy")
    if buys == 0:
        return math.inf if sells else 0.0
    return sells / buys


def stylized_facts(prices, volumes) -> StylizedFactsReport:
    """Full SF1-SF4 bundle for one price/volume series."""
    r = log_returns(prices)
    vols = np.asarray(volumes, dtype=float)
    dv = np.diff(vols)
    try:
        lev = leverage_effect(r)
    except (TooFewSamples, ZeroVariance):
        lev = float("nan")
    try:
        corr, p = volume_return_test(dv, r[: dv.size] if dv.size < r.size else r)
    except (TooFewSamples, ZeroVariance, LengthMismatch):
        corr, p = float("nan"), float("nan")
    try:
        omega, alpha, beta, _, ok = garch_fit(r)
    except (TooFewSamples, ZeroVariance):
        omega, alpha, beta, ok = float("nan"), float("nan"), float("nan"), False
    return StylizedFactsReport(
        kurtosis=kurtosis(r), leverage=lev,
        volume_return_corr=corr, volume_return_p=p,
        garch_omega=omega, garch_alpha=alpha, garch_beta=beta,
        garch_converged=ok, n_returns=int(r.size),
    )


def inequality(wealths) -> InequalityReport:
    top, bottom = wealth_shares(wealths)
    return InequalityReport(gini=gini(wealths), top10_share=top,
                            bottom50_share=bottom)
