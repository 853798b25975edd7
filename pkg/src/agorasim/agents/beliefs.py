"""Belief state on five dimensions, initialization, and sentiment scoring.

Dimensions are stored on a 0-10 scale (5 = neutral): outlook on economic
fundamentals, market valuation, short-term trend, sentiment of surrounding
investors, and self-assessment.  The reported sentiment score is an affine
map of the dimension mean onto a 1-5 scale, so a fully neutral belief scores
exactly 3.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

import numpy as np

DIMENSIONS = ("fundamentals", "valuation", "trend", "peer_sentiment",
              "self_assessment")
NEUTRAL = 5.0
SMOOTHING = 0.8  # weight kept on the previous belief at each update

# Tiny lexicon used by rule agents to react to news and posts.  Crude, but it
# gives the deterministic policies a text channel that propagates through the
# feed the same way richer narratives would.
_NEGATIVE = {
    "collapse", "panic", "recession", "plunge", "plummet", "crash",
    "bankruptcy", "selloff", "sell-off", "slump", "fear", "default",
    "crisis", "downturn", "layoffs", "tumble", "contraction", "losses",
    "bearish", "overvalued", "bubble", "flight", "worried", "pessimistic",
}
_POSITIVE = {
    "rally", "growth", "surge", "optimism", "optimistic", "recovery",
    "stimulus", "upgrade", "boom", "record", "profit", "profits",
    "expansion", "bullish", "undervalued", "rebound", "confidence",
    "strong", "gains", "upside",
}
_WORD = re.compile(r"[a-z][a-z-]*")


@dataclass(frozen=True)
class BeliefState:
    dims: tuple  # five floats in [0, 10], ordered as DIMENSIONS
    narrative: str = ""
    last_updated: int = -1

    def __post_init__(self):
        if len(self.dims) != len(DIMENSIONS):
            raise ValueError(f"expected {len(DIMENSIONS)} dims")
        if any(d < 0 or d > 10 for d in self.dims):
            raise ValueError(f"dims out of [0, 10]: {self.dims}")

    @property
    def mean(self) -> float:
        return sum(self.dims) / len(self.dims)


@dataclass(frozen=True)
class BeliefInitParams:
    sentiment_percentile: float  # historical percentile P of the anchor index
    variance: float  # 20-day variance proxy
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.sentiment_percentile <= 1.0:
            raise ValueError("percentile must be in [0, 1]")
        if self.variance < 0:
            raise ValueError("variance must be non-negative")


def init_belief(params: BeliefInitParams, day: int = 0) -> BeliefState:
    """Sample the five dimensions around the market sentiment anchor.

    The anchor mean is 10 * P so the historical-median sentiment lands at a
    neutral 5; each dimension is an independent clamped Gaussian draw.
    """
    mu = 10.0 * params.sentiment_percentile
    rng = np.random.default_rng(params.seed)
    dims = np.clip(rng.normal(mu, np.sqrt(params.variance), len(DIMENSIONS)),
                   0.0, 10.0)
    return BeliefState(dims=tuple(float(d) for d in dims), last_updated=day)


def sentiment_score(belief: BeliefState) -> float:
    """Reported sentiment on the 1-5 scale: 1 + 4 * mean(dims) / 10."""
    return 1.0 + 4.0 * belief.mean / 10.0


def text_sentiment(text: str) -> float:
    """Lexicon polarity of a text in [-1, 1]; 0 when no cue words appear."""
    words = _WORD.findall(text.lower())
    pos = sum(1 for w in words if w in _POSITIVE)
    neg = sum(1 for w in words if w in _NEGATIVE)
    if pos + neg == 0:
        return 0.0
    return (pos - neg) / (pos + neg)


def signal_to_dim(signal: float) -> float:
    """Map a [-1, 1] signal onto the 0-10 dimension scale."""
    return NEUTRAL * (1.0 + max(-1.0, min(1.0, signal)))


def smooth_dims(belief: BeliefState, targets: dict, day: int,
                narrative: str | None = None) -> BeliefState:
    """Exponential smoothing toward per-dimension targets on the 0-10 scale."""
    dims = list(belief.dims)
    for name, target in targets.items():
        i = DIMENSIONS.index(name)
        dims[i] = SMOOTHING * dims[i] + (1.0 - SMOOTHING) * target
        dims[i] = max(0.0, min(10.0, dims[i]))
    return replace(belief, dims=tuple(dims), last_updated=day,
                   narrative=belief.narrative if narrative is None else narrative)
