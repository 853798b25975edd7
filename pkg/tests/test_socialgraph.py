"""Social graph tests with networkx as the independent statistics oracle."""

import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from agorasim.errors import UnknownUser
from agorasim.socialgraph import (GraphParams, SocialGraph, TradeRecord,
                                  build_graph, degree_centrality,
                                  export_edges, graph_stats,
                                  intensity_vector, neighbors, similarity,
                                  trading_intensity)


def R(user, industry, day, direction="buy", volume=10):
    return TradeRecord(user_id=user, industry=industry, day=day,
                       direction=direction, volume=volume)


def random_records(rng, n_users=12, n_records=60, n_industries=4, days=10):
    return [R(f"u{rng.integers(n_users)}", f"i{rng.integers(n_industries)}",
              int(rng.integers(days)))
            for _ in range(n_records)]


class TestIntensity:
    def test_hand_value(self):
        # [DERIVED: hand calc] e^0 + e^-0.5 for two trades at day 5 and 4
        records = [R("u", "tech", 5), R("u", "tech", 4), R("u", "oil", 5)]
        got = trading_intensity("u", "tech", records, now=5, decay=0.5)
        assert got == pytest.approx(1.0 + math.exp(-0.5))

    def test_vector_groups_by_industry(self):
        records = [R("u", "tech", 3), R("u", "oil", 3), R("v", "tech", 3)]
        vec = intensity_vector("u", records, now=3, decay=1.0)
        assert set(vec) == {"tech", "oil"}
        assert vec["tech"] == pytest.approx(1.0)

    def test_decay_monotone_in_age(self):
        for age in range(1, 6):
            newer = trading_intensity("u", "t", [R("u", "t", 10 - age + 1)],
                                      now=10, decay=0.5)
            older = trading_intensity("u", "t", [R("u", "t", 10 - age)],
                                      now=10, decay=0.5)
            assert older < newer


class TestSimilarity:
    def test_hand_value(self):
        # [DERIVED: hand calc] min-sum 1+0, max-sum 2+3 -> 1/5
        assert similarity({"a": 1.0, "b": 0.0}, {"a": 2.0, "b": 3.0}) == \
            pytest.approx(0.2)

    def test_identical_vectors(self):
        assert similarity({"a": 2.0}, {"a": 2.0}) == 1.0  # [TRIVIAL]

    def test_all_zero_isolated(self):
        assert similarity({}, {}) == 0.0
        assert similarity({"a": 0.0}, {}) == 0.0

    @settings(max_examples=200, deadline=None)
    @given(st.dictionaries(st.sampled_from("abcd"),
                           st.floats(0, 100), max_size=4),
           st.dictionaries(st.sampled_from("abcd"),
                           st.floats(0, 100), max_size=4))
    def test_symmetric_and_bounded(self, u, v):
        s = similarity(u, v)
        assert 0.0 <= s <= 1.0
        assert s == similarity(v, u)


class TestBuildGraph:
    def test_threshold_is_strict(self):
        # two users with similarity exactly tau get no edge
        records = [R("u", "a", 0), R("u", "b", 0),
                   R("v", "a", 0), R("v", "b", 0)]
        graph = build_graph(records, now=0, params=GraphParams(threshold=1.0))
        assert not graph.edges
        graph = build_graph(records, now=0,
                            params=GraphParams(threshold=0.99))
        assert graph.weight("u", "v") == pytest.approx(1.0)

    def test_users_extend_nodes(self):
        graph = build_graph([], now=0, params=GraphParams(),
                            users=["a", "b"])
        assert graph.nodes == {"a", "b"} and not graph.edges

    def test_density_non_increasing_in_threshold(self):
        rng = np.random.default_rng(5)
        records = random_records(rng)
        densities = []
        for tau in (0.1, 0.2, 0.3, 0.4):
            g = build_graph(records, now=10, params=GraphParams(threshold=tau))
            densities.append(graph_stats(g)[0])
        assert densities == sorted(densities, reverse=True)

    def test_density_non_increasing_in_decay(self):
        rng = np.random.default_rng(6)
        records = random_records(rng)
        densities = []
        for lam in (0.1, 0.5, 1.0, 2.0):
            g = build_graph(records, now=10,
                            params=GraphParams(decay=lam, threshold=0.2))
            densities.append(graph_stats(g)[0])
        assert densities == sorted(densities, reverse=True)


def to_nx(graph: SocialGraph) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(graph.nodes)
    for pair, w in graph.edges.items():
        u, v = tuple(pair)
        g.add_edge(u, v, weight=w)
    return g


class TestStatsAgainstNetworkx:
    @pytest.mark.parametrize("seed", range(5))
    def test_density_clustering_component(self, seed):
        # [DERIVED: networkx oracle]
        rng = np.random.default_rng(seed)
        graph = build_graph(random_records(rng), now=10,
                            params=GraphParams(threshold=0.15))
        density, clustering, largest = graph_stats(graph)
        g = to_nx(graph)
        assert density == pytest.approx(nx.density(g))
        assert clustering == pytest.approx(nx.average_clustering(g))
        assert largest == max((len(c) for c in nx.connected_components(g)),
                              default=0)

    @pytest.mark.parametrize("seed", range(5))
    def test_degree_centrality(self, seed):
        rng = np.random.default_rng(100 + seed)
        graph = build_graph(random_records(rng), now=10,
                            params=GraphParams(threshold=0.15))
        got = degree_centrality(graph)
        want = nx.degree_centrality(to_nx(graph))
        assert set(got) == set(want)
        for node in got:
            assert got[node] == pytest.approx(want[node])


class TestNeighbors:
    def graph(self):
        g = SocialGraph(nodes={"u", "a", "b", "c"})
        g.edges[frozenset(("u", "a"))] = 0.9
        g.edges[frozenset(("u", "b"))] = 0.5
        g.edges[frozenset(("u", "c"))] = 0.3
        return g

    def test_sorted_strongest_first(self):
        assert neighbors(self.graph(), "u", 0.2) == \
            [("a", 0.9), ("b", 0.5), ("c", 0.3)]

    def test_threshold_filters(self):
        assert neighbors(self.graph(), "u", 0.5) == [("a", 0.9)]

    def test_unknown_user(self):
        with pytest.raises(UnknownUser):
            neighbors(self.graph(), "nobody", 0.1)

    def test_tie_breaks_by_id(self):
        g = SocialGraph(nodes={"u", "b", "a"})
        g.edges[frozenset(("u", "b"))] = 0.5
        g.edges[frozenset(("u", "a"))] = 0.5
        assert neighbors(g, "u", 0.0) == [("a", 0.5), ("b", 0.5)]


def test_export_edges_sorted():
    g = SocialGraph(nodes={"c", "a", "b"})
    g.edges[frozenset(("c", "a"))] = 0.4
    g.edges[frozenset(("a", "b"))] = 0.6
    assert export_edges(g) == [("a", "b", 0.6), ("a", "c", 0.4)]
