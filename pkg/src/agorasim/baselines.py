"""Classical agent-based reference models for the stylized-facts table.

Two generators: a herding/predisposition/misalignment model with
discrete-choice switching between fundamentalist and chartist demand, and a
heterogeneous-beliefs asset pricing model with discrete-choice strategy
fractions and a stochastic-volatility shock.  Both work in log price space
and are bit-deterministic under a seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterDomain


@dataclass(frozen=True)
class HPMParams:
    fundamental_price: float = 1.0  # price level whose log is the anchor
    market_impact: float = 0.01  # mu
    switching_flexibility: float = 1.0  # beta, intensity of choice
    fundamentalist_reaction: float = 0.12  # phi
    chartist_reaction: float = 1.50  # chi
    predisposition: float = -0.327  # alpha_0
    herding: float = 1.79  # alpha_n
    misalignment: float = 18.43  # alpha_p
    noise_fundamentalist: float = 0.758  # sigma_f
    noise_chartist: float = 2.087  # sigma_c
    horizon: int = 2000
    seed: int = 0


@dataclass(frozen=True)
class BHParams:
    fundamental_price: float = 1.0
    trend_coefficients: tuple = (0.0, 1.01)  # g_h per belief type
    bias_coefficients: tuple = (0.0, 0.0)  # b_h per belief type
    choice_intensity: float = 3.6  # beta
    gross_return: float = 1.01  # R, risk/discount parameter
    sv_scale: float = 0.30  # innovation of the log-variance AR(1)
    sv_persistence: float = 0.85
    base_noise: float = 0.01  # stationary shock scale
    horizon: int = 2000
    seed: int = 0


def _check(params, noise_fields):
    if params.horizon < 1:
        raise ParameterDomain(f"horizon {params.horizon} < 1")
    for name in noise_fields:
        if getattr(params, name) < 0:
            raise ParameterDomain(f"{name} must be non-negative")
    if params.fundamental_price <= 0:
        raise ParameterDomain("fundamental price must be positive")


def simulate_hpm(params: HPMParams):
    """Herding model run.

    Returns (prices, log_returns, fundamentalist_fractions).  Attractiveness
    a_t mixes herding (majority size), predisposition, and squared log-price
    misalignment from the fundamental; the fundamentalist fraction follows a
    logit in a_t.
    """
    _check(params, ("noise_fundamentalist", "noise_chartist",
                    "switching_flexibility"))
    rng = np.random.default_rng(params.seed)
    T = params.horizon
    p_star = np.log(params.fundamental_price)
    p = np.full(T + 2, p_star)  # log prices, two warmup points
    nf = np.empty(T + 2)
    nf[:2] = 0.5
    shocks_f = rng.normal(0.0, params.noise_fundamentalist, T + 2)
    shocks_c = rng.normal(0.0, params.noise_chartist, T + 2)

    a = (params.herding * (2 * nf[1] - 1) + params.predisposition
         + params.misalignment * (p[1] - p_star) ** 2)
    for t in range(1, T + 1):
        frac = 1.0 / (1.0 + np.exp(-params.switching_flexibility * a))
        nf[t] = frac
        demand_f = (params.fundamentalist_reaction * (p_star - p[t])
                    + shocks_f[t])
        demand_c = (params.chartist_reaction * (p[t] - p[t - 1])
                    + shocks_c[t])
        p[t + 1] = p[t] + params.market_impact * (
            frac * demand_f + (1.0 - frac) * demand_c)
        a = (params.herding * (2 * frac - 1) + params.predisposition
             + params.misalignment * (p[t] - p_star) ** 2)

    log_prices = p[1:T + 2]
    prices = np.exp(log_prices)
    returns = np.diff(log_prices)
    fractions = nf[1:T + 1]
    return prices, returns, fractions


def predisposition_only_fraction(params: HPMParams) -> float:
    """Closed-form fraction when herding and misalignment are zero."""
    return 1.0 / (1.0 + np.exp(
        -params.switching_flexibility * params.predisposition))


def simulate_bh(params: BHParams):
    """Heterogeneous-beliefs run.

    Deviations x_t from the log fundamental follow
    x_t = (sum_h n_h (g_h x_{t-1} + b_h)) / R + sigma_t z_t, with strategy
    fractions from a discrete choice over realized forecast profits and a
    log-variance AR(1) driving sigma_t.

    Returns (prices, log_returns, fractions) where fractions has one row per
    step on the belief-type simplex.
    """
    _check(params, ("sv_scale", "base_noise", "choice_intensity"))
    if len(params.trend_coefficients) != len(params.bias_coefficients):
        raise ParameterDomain("trend/bias coefficient lengths differ")
    if params.gross_return <= 0:
        raise ParameterDomain("gross return must be positive")
    rng = np.random.default_rng(params.seed)
    T = params.horizon
    g = np.asarray(params.trend_coefficients, dtype=float)
    b = np.asarray(params.bias_coefficients, dtype=float)
    H = g.size
    R = params.gross_return

    x = np.zeros(T + 3)
    fractions = np.full((T, H), 1.0 / H)
    z = rng.standard_normal(T)
    eta = rng.standard_normal(T)

    log_var = np.log(params.base_noise ** 2) if params.base_noise > 0 else -np.inf
    target_log_var = log_var
    n_h = np.full(H, 1.0 / H)
    for t in range(T):
        # Fitness: realized profit of each forecast rule one period ago,
        # (x_t - R x_{t-1}) * (forecast_h made at t-2 minus R x_{t-1}).
        profit = (x[t + 1] - R * x[t]) * (g * x[t - 1] + b - R * x[t])
        if params.choice_intensity > 0 and t > 0:
            w = params.choice_intensity * profit
            w -= w.max()
            expw = np.exp(w)
            n_h = expw / expw.sum()
        fractions[t] = n_h

        if params.sv_scale > 0 and np.isfinite(log_var):
            log_var = (target_log_var
                       + params.sv_persistence * (log_var - target_log_var)
                       + params.sv_scale * eta[t])
            sigma = np.exp(0.5 * log_var)
        else:
            sigma = params.base_noise
        x[t + 2] = float(n_h @ (g * x[t + 1] + b)) / R + sigma * z[t]

    log_prices = np.log(params.fundamental_price) + x[1:T + 2]
    prices = np.exp(log_prices)
    returns = np.diff(log_prices)
    return prices, returns, fractions
