"""Deterministic agent-based stock market simulator.

Agents with personas and evolving beliefs trade industry indices through a
daily call auction, exchange opinions on a simulated social feed, and the
resulting series are scored against the classic stylized facts of financial
returns.
"""

__version__ = "0.1.0"
