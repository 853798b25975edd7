"""Chat-completion-backed decision policy.

Renders the prompt-template catalog with persona and observation fields,
sends the dialogue to a chat endpoint, and parses structured YAML blocks
from the responses.  Malformed responses are retried once and then degrade
to hold-and-abstain; a run never dies because the backend hiccuped.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import requests
import yaml

from ..errors import SchemaViolation, ServiceUnavailable
from .cycle import TradeIntention
from .policies import PolicyOutput, SocialAction

log = logging.getLogger(__name__)

DEFAULT_TEMPERATURE = 1.3

# Named templates rendered with str.format; placeholders are filled from the
# persona and the day's observation.
PROMPT_TEMPLATES = {
    "system": (
        "You are role-playing an investor trading industry indices in a "
        "simulated A-share-style market. Stay strictly in character.\n"
        "Core persona (unchangeable): {system_prompt}\n"
        "You are a {strategy} investor.\n"
        "Industries you focus on: {followed_industries}\n"
        "Holdings overview: {holdings_brief}"
    ),
    "identity": (
        "Auxiliary information for today.\n"
        "Today is day {day}, a {day_kind}.\n"
        "Your previous belief: {belief}\n"
        "Total assets: {total_assets:.2f}; available cash: {cash:.2f}; "
        "cumulative return: {return_pct:.2f}%\n"
        "Holding details:\n{holdings_detail}"
    ),
    "forum_check": (
        "You are browsing the forum. For the post below decide on one "
        "action consistent with your persona.\n"
        "Post id: {post_id}\nPost content: {post_content}\n"
        "Quoted source content: {root_content}\n"
        "Choose exactly one of: Repost (add a comment), Unlike, Like.\n"
        "Answer as: <action>ACTION</action><reason>REASON</reason>"
    ),
    "news_analysis": (
        "Here is today's filtered public news. Briefly give your initial "
        "reaction in character.\nNews:\n{news}"
    ),
    "query_init": (
        "Assets and industries you currently follow:\n{stock_details}\n"
        "Today is day {day}. Think about what news or announcement "
        "information would help your next trade: what themes, which "
        "keywords?"
    ),
    "query_formulation": (
        "Now write the concrete queries you want to run.\n"
        "Reply in YAML:\n"
        "queries:  # list of short, specific questions, most important first\n"
        "- question 1\n"
        "stock_id:  # optional list of asset codes to look up\n"
        "- CODE1"
    ),
    "belief_update": (
        "Your previous belief: {old_belief}\n"
        "Given the news you read, the posts you browsed, and your persona, "
        "restate your belief in one first-person paragraph covering: market "
        "trend over the next month, market valuation, macroeconomic "
        "conditions, market sentiment, and an honest self-evaluation. Plain "
        "text only."
    ),
    "index_selection": (
        "Considering everything above, pick the indices you may trade today "
        "from your holdings and the recommended list.\n"
        "Holdings: {current_stock_details}\n"
        "Followed industries: {followed_industries}\n"
        "Recommended indices: {recommended}\n"
        "Current belief: {belief}\n"
        "Reply in YAML:\n"
        "selected_index:  # index codes only\n- CODE1\nreason: one paragraph"
    ),
    "data_query": (
        "Today is day {day}. You flagged these indices as tradable: "
        "{selected}. You may only use data from yesterday and earlier.\n"
        "Yesterday's summary quotes:\n{stock_summary}\n"
        "Your positions in them:\n{positions_info}\n"
        "Available indicators: {indicator_schema}\n"
        "Reply in YAML with the indicators you want:\n"
        "indicators:\n- indicator1\nstart_day:\nend_day:\nreason:"
    ),
    "decision_step1": (
        "Time to decide. Using everything gathered today and staying in "
        "character, analyze the indices {selected}: overall market view, "
        "impact of news, per-index technical and fundamental picture with a "
        "buy/hold/sell lean, and the main risks. Natural language."
    ),
    "decision_step2": (
        "Now commit to final decisions for each index.\n"
        "Remaining available position (percent of total assets): "
        "{available_position:.2f}\n"
        "Per-index data:\n{stock_info}\n"
        "Rules: prices must stay inside the daily limit band; hold means "
        "trading_position 0; a sell cannot exceed your current position; "
        "trading_position is the percent of total assets committed and is "
        "always positive.\n"
        "Reply in YAML mapping each index code to action "
        "(buy/sell/hold), trading_position, target_price."
    ),
    "posting": (
        "Before logging off, write one social post (100-200 words) of type "
        "type1 (event commentary), type2 (trade recap), or type3 (market "
        "outlook), in character, then summarize your updated belief.\n"
        "Prior belief: {old_belief}\n"
        "Reply in YAML:\npost: text\ntype: type1/type2/type3\nbelief: text"
    ),
}


class ChatClient:
    """Minimal interface: complete(messages) -> assistant text."""

    def complete(self, messages: list) -> str:  # pragma: no cover - interface
        raise NotImplementedError


@dataclass
class HTTPChatClient(ChatClient):
    """OpenAI-style chat completion endpoint client.

    Credentials come from the environment, never from config files.  Request
    and response bodies are appended verbatim to ``transcript`` so a live run
    can be replayed and audited offline.
    """

    endpoint: str
    model: str
    api_key: str = ""
    temperature: float = DEFAULT_TEMPERATURE
    timeout: float = 60.0
    retries: int = 1
    transcript: list = field(default_factory=list)

    def complete(self, messages: list) -> str:
        payload = {"model": self.model, "messages": messages,
                   "temperature": self.temperature}
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error = None
        for _ in range(self.retries + 1):
            try:
                resp = requests.post(self.endpoint, json=payload,
                                     headers=headers, timeout=self.timeout)
                resp.raise_for_status()
                body = resp.json()
                self.transcript.append({"request": payload, "response": body})
                return body["choices"][0]["message"]["content"]
            except (requests.RequestException, KeyError, ValueError) as exc:
                last_error = exc
        raise ServiceUnavailable(str(last_error))


def parse_yaml_block(text: str) -> dict:
    """Parse the first YAML mapping found in a response."""
    cleaned = text.strip()
    if "```" in cleaned:
        parts = cleaned.split("```")
        candidates = [p for i, p in enumerate(parts) if i % 2 == 1]
        cleaned = candidates[0] if candidates else cleaned
        cleaned = cleaned.removeprefix("yaml").strip()
    try:
        data = yaml.safe_load(cleaned)
    except yaml.YAMLError as exc:
        raise SchemaViolation(f"unparseable YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaViolation(f"expected a mapping, got {type(data).__name__}")
    return data


def parse_decisions(data: dict, observation) -> dict:
    """Validate a decision mapping into TradeIntentions."""
    intentions = {}
    for asset, spec in data.items():
        if asset not in observation.prev_close:
            raise SchemaViolation(f"unknown asset {asset}")
        if not isinstance(spec, dict) or "action" not in spec:
            raise SchemaViolation(f"bad decision for {asset}")
        action = str(spec["action"]).lower()
        if action not in ("buy", "sell", "hold"):
            raise SchemaViolation(f"bad action {action} for {asset}")
        if action == "hold":
            continue
        try:
            pct = float(spec.get("trading_position", 0))
            price = float(spec.get("target_price") or
                          observation.prev_close[asset])
        except (TypeError, ValueError) as exc:
            raise SchemaViolation(f"non-numeric fields for {asset}") from exc
        if pct < 0 or price <= 0:
            raise SchemaViolation(f"negative size or price for {asset}")
        if action == "sell":
            units = observation.portfolio.position(asset)
            held_pct = (100.0 * units * observation.prev_close[asset]
                        / observation.total_assets
                        if observation.total_assets > 0 else 0.0)
            pct = min(pct, held_pct)  # clip, do not reject
            if pct <= 0:
                continue
        lo = observation.prev_close[asset] * 0.9
        hi = observation.prev_close[asset] * 1.1
        intentions[asset] = TradeIntention(
            asset_id=asset, action=action, trading_position=pct,
            target_price=min(hi, max(lo, price)))
    return intentions


@dataclass
class LLMPolicy:
    """Policy driving decisions through a chat backend.

    Callable with the same signature as the rule policies.  Each structured
    step retries once on a schema violation; if the second attempt also
    fails, the agent holds and abstains for the day.
    """

    client: ChatClient
    templates: dict = field(default_factory=lambda: dict(PROMPT_TEMPLATES))

    def _ask(self, messages: list, parser, observation):
        for attempt in (0, 1):
            text = self.client.complete(messages)
            try:
                return parser(text)
            except SchemaViolation:
                if attempt == 1:
                    raise
                messages = messages + [
                    {"role": "assistant", "content": text},
                    {"role": "user", "content":
                        "That reply did not match the requested YAML schema. "
                        "Answer again with only the YAML block."}]
        raise SchemaViolation("unreachable")

    def __call__(self, observation, persona, belief, rng) -> PolicyOutput:
        base = [
            {"role": "system", "content": self.templates["system"].format(
                system_prompt=persona.system_prompt,
                strategy=persona.strategy,
                followed_industries=", ".join(persona.followed_industries),
                holdings_brief=json.dumps(observation.portfolio.holdings,
                                          sort_keys=True))},
            {"role": "user", "content": self.templates["identity"].format(
                day=observation.day,
                day_kind=("trading day" if observation.trading_day
                          else "non-trading day"),
                belief=belief.narrative or "neutral",
                total_assets=observation.total_assets,
                cash=observation.portfolio.cash,
                return_pct=0.0,
                holdings_detail=json.dumps(observation.portfolio.holdings,
                                           sort_keys=True))},
        ]
        try:
            queries = self._ask(
                base + [{"role": "user",
                         "content": self.templates["query_formulation"]}],
                lambda text: parse_yaml_block(text).get("queries", []),
                observation)
            decision_prompt = self.templates["decision_step2"].format(
                available_position=100.0,
                stock_info=json.dumps(
                    {a: observation.prev_close[a]
                     for a in observation.tradable_assets()},
                    sort_keys=True))
            decisions = self._ask(
                base + [{"role": "user", "content": decision_prompt}],
                lambda text: parse_decisions(parse_yaml_block(text),
                                             observation),
                observation)
            posting = self._ask(
                base + [{"role": "user",
                         "content": self.templates["posting"].format(
                             old_belief=belief.narrative or "neutral")}],
                self._parse_post, observation)
        except (ServiceUnavailable, SchemaViolation) as exc:
            log.warning("policy degraded to hold: %s", exc)
            return PolicyOutput()

        actions = []
        for post in observation.feed_posts:
            try:
                verdict = self._ask(
                    base + [{"role": "user",
                             "content": self.templates["forum_check"].format(
                                 post_id=post.post_id,
                                 post_content=post.content,
                                 root_content="")}],
                    self._parse_forum_action, observation)
            except (ServiceUnavailable, SchemaViolation):
                continue
            if verdict:
                actions.append(SocialAction(post.post_id, verdict[0],
                                            comment=verdict[1]))
        return PolicyOutput(
            intentions=decisions, post=(posting["post"], posting["type"]),
            actions=actions, narrative=posting.get("belief", ""),
            queries=list(queries or []))

    @staticmethod
    def _parse_post(text: str) -> dict:
        data = parse_yaml_block(text)
        if "post" not in data or str(data.get("type")) not in (
                "type1", "type2", "type3"):
            raise SchemaViolation("posting response missing post/type")
        return {"post": str(data["post"]), "type": str(data["type"]),
                "belief": str(data.get("belief", ""))}

    @staticmethod
    def _parse_forum_action(text: str):
        lowered = text.lower()
        if "<action>" not in lowered:
            raise SchemaViolation("missing action tag")
        action = lowered.split("<action>", 1)[1].split("</action>", 1)[0]
        action = action.strip()
        if action not in ("like", "unlike", "repost"):
            raise SchemaViolation(f"bad forum action {action}")
        comment = ""
        if "<reason>" in lowered and action == "repost":
            comment = text.lower().split("<reason>", 1)[1]
            comment = comment.split("</reason>", 1)[0].strip()
        return action, comment
