"""Model gateway: one choke point for chat completion, image captioning and
embeddings.

Two backends are provided: a remote HTTP backend speaking the messages-array
chat-completion wire format, and a scripted backend that replays canned rules
for offline, deterministic tests. Every request/response pair is recorded on
a thread-safe tap so tests can assert on the exact traffic.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import numpy as np

from .errors import ProtocolError, ScriptError, TransportError

logger = logging.getLogger(__name__)

EMBED_DIM = 256
MAX_RETRIES = 3
BACKOFF_SECONDS = 0.5

ENV_ENDPOINT = "MODEL_ENDPOINT"
ENV_API_KEY = "MODEL_API_KEY"
ENV_MODEL = "MODEL_NAME"
ENV_EMBED_ENDPOINT = "EMBED_ENDPOINT"


@dataclass
class ChatRequest:
    """A single chat completion request: one agent's private context."""

    role: str                       # symbolic agent tag, used by the scripted backend
    role_prompt: str                # system prompt
    turns: list[tuple[str, str]]    # (speaker, text); speaker in {user, assistant}
    temperature: float = 0.0
    max_tokens: int = 2048

    def __post_init__(self) -> None:
        if not self.turns:
            raise ValueError("ChatRequest.turns must be non-empty")
        if self.turns[-1][0] != "user":
            raise ValueError("last turn must be spoken by the user")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")

    @property
    def prompt_text(self) -> str:
        """All text the model would see, concatenated (for tap assertions)."""
        parts = [self.role_prompt] + [text for _, text in self.turns]
        return "\n".join(parts)


@dataclass(frozen=True)
class TapRecord:
    kind: str           # chat | caption | embed
    role: str
    request: ChatRequest | None
    reply: str

    @property
    def prompt_text(self) -> str:
        return self.request.prompt_text if self.request is not None else ""


def hashed_embedding(text: str, dim: int = EMBED_DIM) -> np.ndarray:
    """Deterministic bag-of-buckets test embedding.

    Lowercases, splits on non-alphanumerics, hashes each token into one of
    ``dim`` buckets, counts, and L2-normalizes. Token hashing uses sha256 so
    vectors are stable across processes. Text with no alphanumeric tokens is
    treated as a single token so the result still has unit norm.
    """
    if not text:
        raise ValueError("cannot embed empty text")
    tokens = [t for t in re.split(r"[^0-9a-z]+", text.lower()) if t]
    if not tokens:
        tokens = [text]
    vec = np.zeros(dim, dtype=np.float64)
    for token in tokens:
        vec[_token_bucket(token, dim)] += 1.0
    return vec / np.linalg.norm(vec)


def _token_bucket(token: str, dim: int) -> int:
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % dim


def stub_caption(image_bytes: bytes) -> str:
    """Captioner stub: names the image by a prefix of its content hash."""
    if not image_bytes:
        raise ValueError("cannot caption empty image bytes")
    return f"IMAGE({hashlib.sha256(image_bytes).hexdigest()[:8]})"


class ChatBackend(Protocol):
    def complete(self, request: ChatRequest) -> str: ...
    def caption(self, image_bytes: bytes) -> str: ...
    def embed(self, text: str) -> np.ndarray: ...


@dataclass
class ScriptRule:
    role: str
    reply: str
    pattern: str | None = None      # regex asserted against the request's prompt text


class ScriptedBackend:
    """Replays canned rules, consumed strictly in file order per role.

    A rule with a ``pattern`` is an assertion: if the next rule for the
    requested role does not match the prompt text, the backend errors out
    instead of silently replying, which keeps test scripts honest.
    Identical request sequences always yield identical replies.
    """

    def __init__(self, rules: list[ScriptRule]):
        self._by_role: dict[str, list[ScriptRule]] = {}
        for rule in rules:
            self._by_role.setdefault(rule.role, []).append(rule)
        self._cursor: dict[str, int] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "ScriptedBackend":
        rules = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            rules.append(ScriptRule(role=raw["role"], reply=raw["reply"],
                                    pattern=raw.get("pattern")))
        return cls(rules)

    def reset(self) -> None:
        with self._lock:
            self._cursor.clear()

    def complete(self, request: ChatRequest) -> str:
        with self._lock:
            queue = self._by_role.get(request.role, [])
            idx = self._cursor.get(request.role, 0)
            if idx >= len(queue):
                raise ScriptError(f"script exhausted for role {request.role!r}")
            rule = queue[idx]
            if rule.pattern and not re.search(rule.pattern, request.prompt_text,
                                              re.DOTALL):
                raise ScriptError(
                    f"script mismatch for role {request.role!r} at rule {idx}: "
                    f"pattern {rule.pattern!r} not found in prompt"
                )
            self._cursor[request.role] = idx + 1
            return rule.reply

    def caption(self, image_bytes: bytes) -> str:
        return stub_caption(image_bytes)

    def embed(self, text: str) -> np.ndarray:
        return hashed_embedding(text)


class HttpBackend:
    """Chat-completion backend over HTTP with bearer-token auth.

    Endpoint, key and model name come from MODEL_ENDPOINT, MODEL_API_KEY and
    MODEL_NAME unless given explicitly. Embeddings go to EMBED_ENDPOINT when
    set, otherwise fall back to the local hashed embedder. Captioning uses the
    stub unless a captioner is plugged into the gateway.
    """

    def __init__(self, endpoint: str | None = None, api_key: str | None = None,
                 model: str | None = None, embed_endpoint: str | None = None,
                 timeout: float = 60.0, backoff: float = BACKOFF_SECONDS):
        self.endpoint = endpoint or os.environ.get(ENV_ENDPOINT, "")
        self.api_key = api_key or os.environ.get(ENV_API_KEY, "")
        self.model = model or os.environ.get(ENV_MODEL, "default")
        self.embed_endpoint = embed_endpoint or os.environ.get(ENV_EMBED_ENDPOINT)
        self.timeout = timeout
        self.backoff = backoff
        if not self.endpoint:
            raise TransportError(f"{ENV_ENDPOINT} is not configured")

    def complete(self, request: ChatRequest) -> str:
        messages = [{"role": "system", "content": request.role_prompt}]
        for speaker, text in request.turns:
            messages.append({"role": speaker, "content": text})
        body = {
            "model": self.model,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        data = self._post(self.endpoint, body)
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProtocolError(f"malformed completion payload: {exc}") from exc
        if not isinstance(content, str) or not content.strip():
            raise ProtocolError("backend returned empty completion text")
        return content

    def caption(self, image_bytes: bytes) -> str:
        return stub_caption(image_bytes)

    def embed(self, text: str) -> np.ndarray:
        if not text:
            raise ValueError("cannot embed empty text")
        if not self.embed_endpoint:
            return hashed_embedding(text)
        data = self._post(self.embed_endpoint, {"model": self.model, "input": text})
        try:
            components = data["data"][0]["embedding"]
            vec = np.asarray(components, dtype=np.float64)
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed embedding payload: {exc}") from exc
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise ProtocolError("backend returned a zero embedding")
        return vec / norm

    def _post(self, url: str, body: dict) -> dict:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Exception | None = None
        for attempt in range(MAX_RETRIES):
            try:
                response = requests.post(url, json=body, headers=headers,
                                         timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = exc
                logger.warning("model backend unreachable (attempt %d/%d): %s",
                               attempt + 1, MAX_RETRIES, exc)
            else:
                if response.status_code >= 500:
                    last_error = TransportError(
                        f"server error {response.status_code}", attempts=attempt + 1)
                    logger.warning("model backend 5xx (attempt %d/%d)",
                                   attempt + 1, MAX_RETRIES)
                elif response.status_code >= 400:
                    raise ProtocolError(
                        f"backend rejected request ({response.status_code}): "
                        f"{response.text[:200]}")
                else:
                    try:
                        return response.json()
                    except ValueError as exc:
                        raise ProtocolError(f"non-JSON payload: {exc}") from exc
            if attempt < MAX_RETRIES - 1:
                time.sleep(self.backoff * 2 ** attempt)
        raise TransportError(f"model backend unreachable after {MAX_RETRIES} "
                             f"attempts: {last_error}", attempts=MAX_RETRIES)


@dataclass
class ModelGateway:
    """Front door for all model traffic, with an append-only tap.

    The tap lists every request/response pair in order, so transcripts and
    context-isolation properties can be asserted against real traffic.
    """

    backend: ChatBackend
    captioner: Callable[[bytes], str] | None = None
    _tap: list[TapRecord] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def complete(self, role: str, role_prompt: str, user_text: str,
                 history: list[tuple[str, str]] | None = None,
                 temperature: float = 0.0, max_tokens: int = 2048) -> str:
        turns = list(history or []) + [("user", user_text)]
        request = ChatRequest(role=role, role_prompt=role_prompt, turns=turns,
                              temperature=temperature, max_tokens=max_tokens)
        reply = self.backend.complete(request)
        if not reply:
            raise ProtocolError(f"empty reply for role {role!r}")
        self._record(TapRecord(kind="chat", role=role, request=request, reply=reply))
        return reply

    def caption_image(self, image_bytes: bytes) -> str:
        if not image_bytes:
            raise ValueError("cannot caption empty image bytes")
        caption = (self.captioner or self.backend.caption)(image_bytes)
        self._record(TapRecord(kind="caption", role="captioner", request=None,
                               reply=caption))
        return caption

    def embed(self, text: str) -> np.ndarray:
        if not text:
            raise ValueError("cannot embed empty text")
        vector = self.backend.embed(text)
        self._record(TapRecord(kind="embed", role="embedder", request=None,
                               reply=f"vector[{vector.shape[0]}]"))
        return vector

    @property
    def tap(self) -> list[TapRecord]:
        with self._lock:
            return list(self._tap)

    def tap_for_role(self, role: str) -> list[TapRecord]:
        return [record for record in self.tap if record.role == role]

    def _record(self, record: TapRecord) -> None:
        with self._lock:
            self._tap.append(record)
