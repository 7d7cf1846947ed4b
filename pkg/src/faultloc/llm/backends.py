"""Backends: a scripted mock for offline runs and a chat-completions HTTP client."""
from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Protocol

import httpx

from ..division import count_tokens
from ..errors import BackendRefusal, ContextOverflow, ScriptExhausted, ScriptMismatch, TransportError
from .transcript import AgentTranscript
from .types import ChatMessage, CompletionRequest, CompletionResponse, ToolCall, Usage

log = logging.getLogger(__name__)

DEFAULT_MODEL = "gpt-4o-mini-2024-07-18"


class Backend(Protocol):
    def complete(self, request: CompletionRequest) -> CompletionResponse: ...


def complete(backend: Backend, request: CompletionRequest, transcript: AgentTranscript | None = None) -> CompletionResponse:
    response = backend.complete(request)
    if transcript is not None:
        transcript.record_completion(request, response)
    return response


def request_tokens(request: CompletionRequest, counter_id: str = "chars4") -> int:
    total = 0
    for m in request.messages:
        total += count_tokens(m.content, counter_id)
        for tc in m.tool_calls:
            total += count_tokens(tc.tool_name + tc.arguments, counter_id)
    return total


def _finish(message: ChatMessage, request: CompletionRequest) -> CompletionResponse:
    completion = count_tokens(message.content) + sum(count_tokens(tc.tool_name + tc.arguments) for tc in message.tool_calls)
    return CompletionResponse(
        message,
        "tool_calls" if message.tool_calls else "stop",
        Usage(request_tokens(request), completion),
    )


# ---------------------------------------------------------------------------
# scripted mock


@dataclass
class MockStep:
    """One canned reply, optionally guarded by a matcher on the latest user/tool message."""

    reply: ChatMessage
    match: str | None = None
    regex: str | None = None
    request: dict[str, Any] | None = None  # exact wire request, used for transcript replay
    times: int | None = None  # rules mode: how many requests this rule may answer

    def matches(self, request: CompletionRequest) -> bool:
        if self.request is not None:
            return request.to_wire() == self.request
        text = request.latest_input()
        if self.match is not None and self.match not in text:
            return False
        if self.regex is not None and not re.search(self.regex, text, re.S):
            return False
        return True

    def describe(self) -> str:
        if self.request is not None:
            return "exact recorded request"
        return f"match={self.match!r} regex={self.regex!r}"


def _reply_from_spec(spec: dict[str, Any], step_no: int) -> ChatMessage:
    calls = []
    for j, tc in enumerate(spec.get("tool_calls") or ()):
        args = tc.get("arguments", {})
        if not isinstance(args, str):
            args = json.dumps(args, sort_keys=True)
        calls.append(ToolCall(tc.get("id") or f"call_{step_no}_{j}", tc.get("name") or tc.get("tool_name"), args))
    return ChatMessage("assistant", spec.get("content", ""), tuple(calls))


class MockBackend:
    """Deterministic backend answering from a script.

    ``sequential`` mode (default) consumes steps in order; each step's matcher must
    accept the request. ``rules`` mode answers each request with the first step
    whose matcher accepts it. Anything unmatched raises :class:`ScriptMismatch`.
    A ``responder`` callable may be given instead of steps.
    """

    def __init__(
        self,
        steps: Iterable[MockStep] = (),
        mode: str = "sequential",
        context_limit: int | None = None,
        responder: Callable[[CompletionRequest], ChatMessage] | None = None,
    ):
        if mode not in ("sequential", "rules"):
            raise ValueError(f"unknown mock mode {mode!r}")
        self.steps = list(steps)
        self.mode = mode
        self.context_limit = context_limit
        self.responder = responder
        self.calls = 0
        self._cursor = 0
        self._used: dict[int, int] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_script(cls, script: dict[str, Any] | list) -> "MockBackend":
        if isinstance(script, list):
            script = {"steps": script}
        steps = []
        for i, s in enumerate(script.get("steps", [])):
            steps.append(MockStep(_reply_from_spec(s.get("reply", s), i), s.get("match"), s.get("regex"), None, s.get("times")))
        return cls(steps, script.get("mode", "sequential"), script.get("context_limit"))

    @classmethod
    def from_script_file(cls, path) -> "MockBackend":
        with open(path, encoding="utf-8") as fh:
            return cls.from_script(json.load(fh))

    @classmethod
    def from_transcripts(cls, transcripts: Iterable[AgentTranscript]) -> "MockBackend":
        """Replay recorded completions; every request must equal the recorded one."""
        steps = []
        for t in transcripts:
            for e in t.events:
                if e["type"] == "completion":
                    steps.append(MockStep(ChatMessage.from_wire(e["response"]["message"]), request=e["request"]))
        return cls(steps)

    def _pick(self, request: CompletionRequest) -> ChatMessage:
        if self.responder is not None:
            return self.responder(request)
        if self.mode == "sequential":
            if self._cursor >= len(self.steps):
                raise ScriptExhausted(
                    f"mock script exhausted after {len(self.steps)} steps; latest input: {request.latest_input()[:200]!r}"
                )
            step = self.steps[self._cursor]
            if not step.matches(request):
                raise ScriptMismatch(
                    f"step {self._cursor} ({step.describe()}) does not match request; "
                    f"latest input: {request.latest_input()[:200]!r}"
                )
            self._cursor += 1
            return step.reply
        for i, step in enumerate(self.steps):
            if step.times is not None and self._used.get(i, 0) >= step.times:
                continue
            if step.matches(request):
                self._used[i] = self._used.get(i, 0) + 1
                return step.reply
        raise ScriptMismatch(f"no mock rule matches request; latest input: {request.latest_input()[:200]!r}")

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        with self._lock:
            if self.context_limit is not None:
                n = request_tokens(request)
                if n > self.context_limit:
                    raise ContextOverflow(f"request of {n} tokens exceeds mock context limit {self.context_limit}")
            self.calls += 1
            message = self._pick(request)
        return _finish(message, request)

    @property
    def remaining(self) -> int:
        return len(self.steps) - self._cursor


# ---------------------------------------------------------------------------
# remote chat-completions endpoint


@dataclass
class RemoteConfig:
    base_url: str = "https://api.openai.com/v1"
    api_key: str = ""
    model: str = DEFAULT_MODEL
    max_retries: int = 3
    backoff_base: float = 0.5
    timeout: float = 120.0
    max_inflight: int = 4

    @classmethod
    def from_env(cls, **overrides: Any) -> "RemoteConfig":
        cfg = cls(
            base_url=os.environ.get("FL_API_BASE_URL", cls.base_url),
            api_key=os.environ.get("FL_API_KEY", ""),
            model=os.environ.get("FL_MODEL", DEFAULT_MODEL),
        )
        for k, v in overrides.items():
            if v is not None:
                setattr(cfg, k, v)
        return cfg


_RETRY_STATUS = {408, 409, 429, 500, 502, 503, 504}
_OVERFLOW_MARKERS = ("context_length_exceeded", "maximum context length", "context window")


class RemoteBackend:
    def __init__(self, config: RemoteConfig, client: httpx.Client | None = None, sleep=time.sleep):
        self.config = config
        self._client = client or httpx.Client(timeout=config.timeout)
        self._sem = threading.BoundedSemaphore(config.max_inflight)
        self._sleep = sleep

    def _post(self, payload: dict[str, Any]) -> httpx.Response:
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        last: str = ""
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                self._sleep(self.config.backoff_base * 2 ** (attempt - 1))
            try:
                resp = self._client.post(url, json=payload, headers=headers)
            except httpx.TransportError as exc:
                last = f"{type(exc).__name__}: {exc}"
                log.warning("transport failure (attempt %d): %s", attempt + 1, last)
                continue
            if resp.status_code in _RETRY_STATUS:
                last = f"HTTP {resp.status_code}: {resp.text[:200]}"
                log.warning("retryable status (attempt %d): %s", attempt + 1, last)
                continue
            return resp
        raise TransportError(f"giving up after {self.config.max_retries + 1} attempts: {last}")

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        payload = request.to_wire(self.config.model)
        with self._sem:
            resp = self._post(payload)
        if resp.status_code >= 400:
            body = resp.text
            if any(marker in body for marker in _OVERFLOW_MARKERS):
                raise ContextOverflow(f"endpoint rejected request as too long: {body[:300]}")
            raise BackendRefusal(f"HTTP {resp.status_code}: {body[:300]}")
        try:
            data = resp.json()
            choice = data["choices"][0]
            msg = choice["message"]
        except (ValueError, KeyError, IndexError) as exc:
            raise TransportError(f"malformed completion payload: {exc}") from exc
        if msg.get("refusal"):
            raise BackendRefusal(str(msg["refusal"]))
        finish = choice.get("finish_reason") or "stop"
        if finish == "content_filter":
            raise BackendRefusal("completion stopped by content filter")
        if finish == "length" and not msg.get("content") and not msg.get("tool_calls"):
            raise ContextOverflow("completion truncated before producing output")
        message = ChatMessage.from_wire({**msg, "role": "assistant"})
        u = data.get("usage") or {}
        return CompletionResponse(
            message, finish, Usage(int(u.get("prompt_tokens", 0)), int(u.get("completion_tokens", 0)))
        )

    def close(self) -> None:
        self._client.close()
