"""Shared test helpers: deterministic backends and fixture builders."""

from __future__ import annotations

import random
from typing import Callable

from docrelay.gateway import (
    ChatRequest,
    ModelGateway,
    ScriptRule,
    ScriptedBackend,
    hashed_embedding,
    stub_caption,
)


class FnBackend:
    """Backend whose chat replies are computed from the request by a callable.

    Useful when replies must depend on prompt content (e.g. which document
    version is being examined) without relying on call order.
    """

    def __init__(self, fn: Callable[[ChatRequest], str]):
        self.fn = fn

    def complete(self, request: ChatRequest) -> str:
        return self.fn(request)

    def caption(self, image_bytes: bytes) -> str:
        return stub_caption(image_bytes)

    def embed(self, text: str):
        return hashed_embedding(text)


def scripted_gateway(*rules: tuple[str, str] | dict) -> ModelGateway:
    """Gateway over a ScriptedBackend; rules are (role, reply) pairs or dicts
    with an optional 'pattern'."""
    parsed = []
    for rule in rules:
        if isinstance(rule, dict):
            parsed.append(ScriptRule(role=rule["role"], reply=rule["reply"],
                                     pattern=rule.get("pattern")))
        else:
            parsed.append(ScriptRule(role=rule[0], reply=rule[1]))
    return ModelGateway(backend=ScriptedBackend(parsed))


def fn_gateway(fn: Callable[[ChatRequest], str]) -> ModelGateway:
    return ModelGateway(backend=FnBackend(fn))


def scenario_markdown(title: str = "Password policy validation",
                      section: str = "Password",
                      language: str = "en",
                      preconditions: list[str] | None = None,
                      steps: list[tuple[str, str]] | None = None) -> str:
    """Canonical scenario markdown for scripted writer/translator replies."""
    preconditions = preconditions or ["A user account exists"]
    steps = steps or [
        ("Attempt to set a short password", "The password is rejected"),
        ("Set a 12-character password with a digit and symbol",
         "The password is accepted"),
        ("Enter a wrong password 5 times", "The account locks for 15 minutes"),
    ]
    lines = [f"# {title}", "", f"Source section: {section}",
             f"Language: {language}", "", "Preconditions:"]
    lines += [f"- {p}" for p in preconditions]
    lines += ["", "| Step No. | Action | Expected Result |", "| --- | --- | --- |"]
    lines += [f"| {i} | {a} | {e} |" for i, (a, e) in enumerate(steps, start=1)]
    return "\n".join(lines) + "\n"


SAMPLE_FSD = """1 Introduction
General words about the portal and its modules.

2 Login
The login page accepts a user name and a password.

2.1 Password
Passwords must be at least 12 characters long and contain a digit and a
special character. After 5 failed attempts the account locks for 15 minutes.

2.2 Session
Sessions expire after 30 minutes of inactivity.

3 Registration
Customers register with an e-mail address confirmed within 48 hours.
"""


_WORDS = ("alpha bravo charlie delta echo foxtrot golf hotel india juliet "
          "kilo lima mike november oscar papa quebec romeo sierra tango "
          "uniform victor whiskey xray yankee zulu").split()


def random_text(rng: random.Random, words: int, vocabulary=_WORDS) -> str:
    return " ".join(rng.choice(vocabulary) for _ in range(words))


def corpus_store(docs: dict[str, tuple[str, list[str]]], metadata=None):
    """Store from {doc_id: (title, [version bodies...])}, day-spaced
    timestamps in ingestion order."""
    from datetime import datetime, timedelta, timezone

    from docrelay.store import DocumentStore

    store = DocumentStore()
    t0 = datetime(2025, 1, 1, tzinfo=timezone.utc)
    day = 0
    for doc_id, (title, bodies) in docs.items():
        for body in bodies:
            store.ingest_version(doc_id, title, body,
                                 metadata=dict(metadata or {}),
                                 timestamp=t0 + timedelta(days=day))
            day += 1
    return store
