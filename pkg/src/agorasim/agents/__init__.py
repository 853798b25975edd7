"""BDI agent layer: personas, beliefs, decision policies, daily cycle."""

from .beliefs import (BeliefInitParams, BeliefState, init_belief,
                      sentiment_score, text_sentiment)
from .personas import (Persona, TransactionTemplate,
                       assign_strategies_and_capital, generate_personas,
                       synth_transactions)
from .cycle import (AgentState, Feedback, Observation, TradeIntention,
                    bdi_cycle, decide, form_belief, intentions_to_orders,
                    update_belief_from_feedback)
from .policies import (PolicyOutput, SocialAction, rule_fundamental_policy,
                       rule_technical_policy, make_rule_policy)
from .llm import ChatClient, HTTPChatClient, LLMPolicy, PROMPT_TEMPLATES

__all__ = [
    "BeliefInitParams", "BeliefState", "init_belief", "sentiment_score",
    "text_sentiment", "Persona", "TransactionTemplate",
    "assign_strategies_and_capital", "generate_personas",
    "synth_transactions", "AgentState", "Feedback", "Observation",
    "TradeIntention", "bdi_cycle", "decide", "form_belief",
    "intentions_to_orders", "update_belief_from_feedback", "PolicyOutput",
    "SocialAction", "rule_fundamental_policy", "rule_technical_policy",
    "make_rule_policy", "ChatClient", "HTTPChatClient", "LLMPolicy",
    "PROMPT_TEMPLATES",
]
