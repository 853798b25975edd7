"""Dynamic user-user graph built from trading behavior.

Each user's records are collapsed into a per-industry intensity vector with
exponential time decay; pairs whose generalized Jaccard similarity exceeds a
threshold get an undirected weighted edge.  The graph is rebuilt from scratch
at every day boundary, which keeps the decay semantics exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

from .errors import UnknownUser


@dataclass(frozen=True)
class TradeRecord:
    user_id: str
    industry: str
    day: int
    direction: str  # "buy" | "sell"
    volume: int


@dataclass(frozen=True)
class GraphParams:
    decay: float = 0.5  # per-day exponential decay rate
    threshold: float = 0.2  # minimum similarity for an edge


@dataclass
class SocialGraph:
    nodes: set = field(default_factory=set)
    edges: dict = field(default_factory=dict)  # frozenset({u, v}) -> weight

    def weight(self, u: str, v: str) -> float:
        return self.edges.get(frozenset((u, v)), 0.0)


def trading_intensity(user: str, industry: str, records: list,
                      now: int, decay: float) -> float:
    """Sum of e^(-decay * age) over the user's records in one industry."""
    return sum(math.exp(-decay * (now - r.day))
               for r in records
               if r.user_id == user and r.industry == industry)


def intensity_vector(user: str, records: list, now: int, decay: float) -> dict:
    vec: dict = {}
    for r in records:
        if r.user_id != user:
            continue
        vec[r.industry] = vec.get(r.industry, 0.0) + math.exp(-decay * (now - r.day))
    return vec


def similarity(u_vec: dict, v_vec: dict) -> float:
    """Generalized Jaccard: sum(min) / sum(max) over non-negative vectors.

    A pair of all-zero vectors scores 0 so inactive users stay isolated.
    """
    num = den = 0.0
    # sorted union keeps float summation order independent of argument order
    for industry in sorted(set(u_vec) | set(v_vec)):
        a = u_vec.get(industry, 0.0)
        b = v_vec.get(industry, 0.0)
        num += min(a, b)
        den += max(a, b)
    return num / den if den > 0 else 0.0


def build_graph(records: list, now: int, params: GraphParams,
                users=None) -> SocialGraph:
    """Recompute the full graph from decayed records.

    ``users`` may extend the node set beyond users with records; edges need
    similarity strictly above the threshold.
    """
    nodes = set(users) if users is not None else set()
    nodes.update(r.user_id for r in records)
    vectors = {u: intensity_vector(u, records, now, params.decay) for u in nodes}
    graph = SocialGraph(nodes=nodes)
    for u, v in combinations(sorted(nodes), 2):
        s = similarity(vectors[u], vectors[v])
        if s > params.threshold:
            graph.edges[frozenset((u, v))] = s
    return graph


def neighbors(graph: SocialGraph, user: str, threshold: float) -> list:
    """(neighbor, weight) pairs above the threshold, strongest first."""
    if user not in graph.nodes:
        raise UnknownUser(user)
    found = []
    for pair, w in graph.edges.items():
        if user in pair and w > threshold:
            (other,) = pair - {user}
            found.append((other, w))
    found.sort(key=lambda nw: (-nw[1], nw[0]))
    return found


def degree_centrality(graph: SocialGraph) -> dict:
    """Degree / (n - 1) per node; all zeros when n <= 1."""
    n = len(graph.nodes)
    degrees = dict.fromkeys(graph.nodes, 0)
    for pair in graph.edges:
        for u in pair:
            degrees[u] += 1
    if n <= 1:
        return dict.fromkeys(graph.nodes, 0.0)
    return {u: d / (n - 1) for u, d in degrees.items()}


def _adjacency(graph: SocialGraph) -> dict:
    adj = {u: set() for u in graph.nodes}
    for pair in graph.edges:
        u, v = tuple(pair)
        adj[u].add(v)
        adj[v].add(u)
    return adj


def graph_stats(graph: SocialGraph):
    """(density, average clustering coefficient, largest component size)."""
    n = len(graph.nodes)
    density = (2 * len(graph.edges) / (n * (n - 1))) if n > 1 else 0.0

    adj = _adjacency(graph)
    clustering_total = 0.0
    for u in graph.nodes:
        nbrs = adj[u]
        k = len(nbrs)
        if k < 2:
            continue
        links = sum(1 for a, b in combinations(nbrs, 2) if b in adj[a])
        clustering_total += 2 * links / (k * (k - 1))
    avg_clustering = clustering_total / n if n else 0.0

    largest = 0
    seen: set = set()
    for start in graph.nodes:
        if start in seen:
            continue
        size = 0
        stack = [start]
        seen.add(start)
        while stack:
            node = stack.pop()
            size += 1
            for nb in adj[node]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        largest = max(largest, size)
    return density, avg_clustering, largest


def export_edges(graph: SocialGraph) -> list:
    """Sorted (u, v, weight) rows for the daily edge-list log."""
    rows = []
    for pair, w in graph.edges.items():
        u, v = sorted(pair)
        rows.append((u, v, w))
    rows.sort()
    return rows
