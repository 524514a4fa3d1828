"""Classifies a user request into the retrieval use cases to run."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from ..gateway import ModelGateway

logger = logging.getLogger(__name__)

USE_CASES = ("search", "qa", "trace", "reading")

DELEGATOR_ROLE_PROMPT = (
    "You route user requests about a software project's document corpus to "
    "the right tools. Available tools: search (find relevant documents), qa "
    "(answer a question with quotations), trace (history of a requirement "
    "across document versions), reading (work through one long document).\n"
    "Reply with one line: 'USE: <comma-separated tool names>' in execution "
    "order, then optionally explain."
)

_USE_RE = re.compile(r"^\s*USE:\s*(.+?)\s*$", re.IGNORECASE | re.MULTILINE)


@dataclass
class DelegationPlan:
    use_cases: list[str]
    rationale: str

    def to_json_dict(self) -> dict:
        return {"use_cases": list(self.use_cases), "rationale": self.rationale}


def delegate(gateway: ModelGateway, user_query: str) -> DelegationPlan:
    """Ask the delegator model which use cases apply, in order.

    The reply is constrained to a 'USE:' line; anything unparseable or naming
    no known use case falls back to question answering.
    """
    if not user_query.strip():
        raise ValueError("user query must be non-empty")
    reply = gateway.complete("delegator", DELEGATOR_ROLE_PROMPT, user_query)
    match = _USE_RE.search(reply)
    if not match:
        logger.warning("delegator reply without USE line; falling back to qa")
        return DelegationPlan(use_cases=["qa"], rationale="fallback: unparseable reply")
    names = []
    for token in match.group(1).split(","):
        name = token.strip().lower()
        if name in USE_CASES and name not in names:
            names.append(name)
    if not names:
        logger.warning("delegator named no known use case; falling back to qa")
        return DelegationPlan(use_cases=["qa"], rationale="fallback: no known use case")
    return DelegationPlan(use_cases=names, rationale=reply.strip())
