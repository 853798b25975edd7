"""Social feed: posts, votes, repost lineage, hot-score ranking, news delivery.

Ranking balances popularity against recency: a post's score is
log10(net votes) / (age + 1)^1.8, with age measured in normalized days.  With
the default normalization a post's score falls below 1% of its day-0 value in
about two weeks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import CycleDetected, UnknownPost, UnknownUser
from .socialgraph import SocialGraph, neighbors

HOT_SCORE_EXPONENT = 1.8

POST_TYPES = ("type1", "type2", "type3")  # event commentary / trade recap / outlook


@dataclass
class Post:
    post_id: str
    author_id: str
    created_day: int
    content: str
    post_type: str = "type1"
    upvotes: int = 0
    downvotes: int = 0
    parent_id: str | None = None
    root_id: str | None = None

    def __post_init__(self):
        if self.root_id is None:
            self.root_id = self.post_id


@dataclass(frozen=True)
class FeedParams:
    alpha: float = 1.0  # time normalization, in days
    epsilon: float = 1e-3  # positive age floor
    top_k: int = 5  # posts recommended per user per day
    window: int = 14  # lookback days for candidate posts


@dataclass(frozen=True)
class NewsItem:
    item_id: str
    day: int
    content: str
    is_rumor: bool = False
    category: str = ""
    rumor_of: str | None = None  # factual item this rumor replaces


@dataclass
class PostStore:
    posts: dict = field(default_factory=dict)
    _counter: int = 0

    def add(self, author_id: str, day: int, content: str,
            post_type: str = "type1", parent: Post | None = None) -> Post:
        self._counter += 1
        post = Post(
            post_id=f"p{self._counter:06d}", author_id=author_id,
            created_day=day, content=content, post_type=post_type,
            parent_id=parent.post_id if parent else None,
            root_id=parent.root_id if parent else None,
        )
        self.posts[post.post_id] = post
        return post

    def get(self, post_id: str) -> Post:
        try:
            return self.posts[post_id]
        except KeyError:
            raise UnknownPost(post_id) from None

    def by_author(self, author_id: str) -> list:
        return [p for p in self.posts.values() if p.author_id == author_id]


def hot_score(post: Post, now: int, params: FeedParams) -> float:
    """Votes-over-age ranking score, non-negative.

    Net votes clamp at 1 before the log so heavily downvoted posts bottom out
    at zero instead of going undefined.
    """
    net = max(post.upvotes - post.downvotes + 1, 1)
    age = max((now - post.created_day) / params.alpha, params.epsilon)
    return math.log10(net) / (age + 1.0) ** HOT_SCORE_EXPONENT


def rank_feed(target_user: str, graph: SocialGraph, store: PostStore,
              now: int, params: FeedParams, threshold: float) -> list:
    """Top-k posts from the user's perception field.

    Candidates are posts authored by neighbors with similarity above the
    threshold, created within the lookback window.  Ties break toward newer
    posts, then post id.
    """
    if target_user not in graph.nodes:
        raise UnknownUser(target_user)
    allowed = {u for u, _ in neighbors(graph, target_user, threshold)}
    candidates = [
        p for p in store.posts.values()
        if p.author_id in allowed and now - params.window <= p.created_day <= now
    ]
    candidates.sort(key=lambda p: (-hot_score(p, now, params),
                                   -p.created_day, p.post_id))
    return candidates[:params.top_k]


def apply_action(store: PostStore, post_id: str, action: str,
                 actor_id: str | None = None, day: int = 0,
                 comment: str = "") -> Post:
    """Apply like/unlike/repost to a post.  Repost returns the new post."""
    post = store.get(post_id)
    if action == "like":
        post.upvotes += 1
        return post
    if action == "unlike":
        post.downvotes += 1
        return post
    if action == "repost":
        if actor_id is None:
            raise ValueError("repost needs an actor")
        return store.add(actor_id, day, comment, post_type=post.post_type,
                         parent=post)
    raise ValueError(f"unknown action {action!r}")


def repost_chain(store: PostStore, post_id: str) -> list:
    """Posts from chain root to the given post, following parents."""
    chain = []
    seen = set()
    post = store.get(post_id)
    while post is not None:
        if post.post_id in seen:
            raise CycleDetected(post_id)
        seen.add(post.post_id)
        chain.append(post)
        post = store.get(post.parent_id) if post.parent_id else None
    chain.reverse()
    if chain[0].post_id != chain[-1].root_id:
        raise CycleDetected(f"root mismatch for {post_id}")
    return chain


def inject_news(news: list, centrality: dict, m: int,
                rumor_mode: bool = False) -> dict:
    """Deliver the day's items to the m most central users.

    In rumor mode, factual items with a rumor counterpart are swapped out for
    the counterpart; standalone rumor items are dropped in control mode.
    Ties in centrality break by user id.
    """
    rumors_by_source = {item.rumor_of: item for item in news
                        if item.is_rumor and item.rumor_of}
    delivered_items = []
    for item in news:
        if item.is_rumor:
            continue
        if rumor_mode and item.item_id in rumors_by_source:
            delivered_items.append(rumors_by_source[item.item_id])
        else:
            delivered_items.append(item)
    if rumor_mode:
        delivered_items.extend(
            item for item in news if item.is_rumor and not item.rumor_of)

    ranked = sorted(centrality, key=lambda u: (-centrality[u], u))
    return {user: list(delivered_items) for user in ranked[:m]}
