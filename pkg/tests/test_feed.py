"""Feed tests: hot score, ranking vs brute force, actions, news injection."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from agorasim.errors import CycleDetected, UnknownPost, UnknownUser
from agorasim.feed import (FeedParams, NewsItem, Post, PostStore,
                           apply_action, hot_score, inject_news, rank_feed,
                           repost_chain)
from agorasim.socialgraph import SocialGraph

PARAMS = FeedParams()


def make_post(post_id, author, day, up=0, down=0):
    return Post(post_id=post_id, author_id=author, created_day=day,
                content="", upvotes=up, downvotes=down)


class TestHotScore:
    def test_hand_value(self):
        # [DERIVED: hand calc] net = 10-2+1 = 9, age 1 -> log10(9)/2^1.8
        post = make_post("p", "a", day=4, up=10, down=2)
        want = math.log10(9) / (1.0 + 1.0) ** 1.8
        assert hot_score(post, now=5, params=PARAMS) == pytest.approx(want)

    def test_downvoted_bottoms_at_zero(self):
        post = make_post("p", "a", day=0, up=1, down=50)
        assert hot_score(post, now=3, params=PARAMS) == 0.0

    def test_fresh_post_uses_epsilon_age(self):
        post = make_post("p", "a", day=5, up=9, down=0)
        want = math.log10(10) / (PARAMS.epsilon + 1.0) ** 1.8
        assert hot_score(post, now=5, params=PARAMS) == pytest.approx(want)

    @settings(max_examples=300, deadline=None)
    @given(st.integers(0, 500), st.integers(0, 500), st.integers(0, 60))
    def test_monotone_in_votes_and_age(self, up, down, age):
        post = make_post("p", "a", day=0, up=up, down=down)
        base = hot_score(post, now=age, params=PARAMS)
        liked = make_post("p", "a", day=0, up=up + 1, down=down)
        assert hot_score(liked, now=age, params=PARAMS) >= base
        assert hot_score(post, now=age + 1, params=PARAMS) <= base


def star_graph(center, others, weight=0.9):
    g = SocialGraph(nodes={center, *others})
    for o in others:
        g.edges[frozenset((center, o))] = weight
    return g


class TestRankFeed:
    def test_brute_force_random_fixtures(self):
        # [DERIVED: independent sort-truncate oracle]
        rng = np.random.default_rng(17)
        for _ in range(50):
            authors = [f"a{i}" for i in range(4)]
            graph = star_graph("me", authors)
            store = PostStore()
            now = 20
            for _ in range(int(rng.integers(5, 30))):
                post = store.add(str(rng.choice(authors + ["me", "stranger"])),
                                 int(rng.integers(0, now + 1)), "text")
                post.upvotes = int(rng.integers(0, 40))
                post.downvotes = int(rng.integers(0, 10))
            graph.nodes.add("stranger")
            got = rank_feed("me", graph, store, now, PARAMS, threshold=0.2)
            eligible = [p for p in store.posts.values()
                        if p.author_id in set(authors)
                        and now - PARAMS.window <= p.created_day <= now]
            eligible.sort(key=lambda p: (-hot_score(p, now, PARAMS),
                                         -p.created_day, p.post_id))
            assert [p.post_id for p in got] == \
                [p.post_id for p in eligible[:PARAMS.top_k]]

    def test_own_posts_excluded(self):
        graph = star_graph("me", ["a"])
        store = PostStore()
        store.add("me", 5, "mine")
        kept = store.add("a", 5, "theirs")
        got = rank_feed("me", graph, store, 5, PARAMS, threshold=0.2)
        assert [p.post_id for p in got] == [kept.post_id]

    def test_window_excludes_stale_posts(self):
        graph = star_graph("me", ["a"])
        store = PostStore()
        store.add("a", 0, "old")
        fresh = store.add("a", 10, "fresh")
        got = rank_feed("me", graph, store, 20, PARAMS, threshold=0.2)
        assert [p.post_id for p in got] == [fresh.post_id]

    def test_unknown_user(self):
        with pytest.raises(UnknownUser):
            rank_feed("ghost", SocialGraph(), PostStore(), 0, PARAMS, 0.2)

    def test_below_threshold_author_invisible(self):
        graph = star_graph("me", ["a"], weight=0.1)
        store = PostStore()
        store.add("a", 5, "post")
        assert rank_feed("me", graph, store, 5, PARAMS, threshold=0.2) == []


class TestActions:
    def test_like_unlike(self):
        store = PostStore()
        post = store.add("a", 0, "text")
        apply_action(store, post.post_id, "like")
        apply_action(store, post.post_id, "like")
        apply_action(store, post.post_id, "unlike")
        assert (post.upvotes, post.downvotes) == (2, 1)

    def test_repost_lineage(self):
        store = PostStore()
        root = store.add("a", 0, "origin")
        mid = apply_action(store, root.post_id, "repost", actor_id="b",
                           day=1, comment="take 1")
        leaf = apply_action(store, mid.post_id, "repost", actor_id="c",
                            day=2, comment="take 2")
        chain = repost_chain(store, leaf.post_id)
        assert [p.post_id for p in chain] == \
            [root.post_id, mid.post_id, leaf.post_id]
        assert leaf.root_id == root.post_id

    def test_unknown_post(self):
        with pytest.raises(UnknownPost):
            apply_action(PostStore(), "p999999", "like")

    def test_cycle_detected(self):
        store = PostStore()
        a = store.add("a", 0, "a")
        b = apply_action(store, a.post_id, "repost", actor_id="b", day=1)
        a.parent_id = b.post_id  # corrupt the store on purpose
        with pytest.raises(CycleDetected):
            repost_chain(store, b.post_id)

    def test_bad_action(self):
        store = PostStore()
        post = store.add("a", 0, "x")
        with pytest.raises(ValueError):
            apply_action(store, post.post_id, "boost")


class TestInjectNews:
    def items(self):
        return [
            NewsItem(item_id="n1", day=3, content="factual report"),
            NewsItem(item_id="r1", day=3, content="scary rumor",
                     is_rumor=True, rumor_of="n1"),
            NewsItem(item_id="n2", day=3, content="other factual"),
        ]

    def test_control_mode_drops_rumors(self):
        delivered = inject_news(self.items(), {"u1": 0.9, "u2": 0.5}, m=2)
        assert {i.item_id for i in delivered["u1"]} == {"n1", "n2"}

    def test_rumor_mode_swaps_pairs(self):
        delivered = inject_news(self.items(), {"u1": 0.9}, m=1,
                                rumor_mode=True)
        assert {i.item_id for i in delivered["u1"]} == {"r1", "n2"}

    def test_top_m_by_centrality_tie_by_id(self):
        centrality = {"b": 0.5, "a": 0.5, "c": 0.9}
        delivered = inject_news(self.items(), centrality, m=2)
        assert set(delivered) == {"c", "a"}

    def test_standalone_rumor_only_in_rumor_mode(self):
        items = [NewsItem(item_id="r9", day=0, content="whisper",
                          is_rumor=True)]
        assert inject_news(items, {"u": 1.0}, m=1) == {"u": []}
        delivered = inject_news(items, {"u": 1.0}, m=1, rumor_mode=True)
        assert [i.item_id for i in delivered["u"]] == ["r9"]
