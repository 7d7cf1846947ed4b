"""Chat-completion message types and their wire (JSON) form."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

ROLES = ("system", "user", "assistant", "tool")


@dataclass(frozen=True)
class ToolCall:
    id: str
    tool_name: str
    arguments: str = "{}"

    def args(self) -> dict[str, Any]:
        """Decoded arguments; malformed JSON yields an empty dict."""
        try:
            value = json.loads(self.arguments or "{}")
        except json.JSONDecodeError:
            return {}
        return value if isinstance(value, dict) else {}

    def to_wire(self) -> dict[str, Any]:
        return {"id": self.id, "type": "function", "function": {"name": self.tool_name, "arguments": self.arguments}}

    @classmethod
    def from_wire(cls, d: dict[str, Any]) -> "ToolCall":
        fn = d.get("function", d)
        args = fn.get("arguments", "{}")
        if not isinstance(args, str):
            args = json.dumps(args, sort_keys=True)
        return cls(d.get("id", ""), fn.get("name", ""), args)


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str = ""
    tool_calls: tuple[ToolCall, ...] = ()
    tool_call_id: str | None = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown chat role {self.role!r}")
        if self.role == "tool" and not self.tool_call_id:
            raise ValueError("tool messages need a tool_call_id")
        if self.tool_calls and self.role != "assistant":
            raise ValueError("only assistant messages may carry tool calls")

    def to_wire(self) -> dict[str, Any]:
        d: dict[str, Any] = {"role": self.role, "content": self.content}
        if self.tool_calls:
            d["tool_calls"] = [tc.to_wire() for tc in self.tool_calls]
        if self.tool_call_id is not None:
            d["tool_call_id"] = self.tool_call_id
        return d

    @classmethod
    def from_wire(cls, d: dict[str, Any]) -> "ChatMessage":
        return cls(
            d["role"],
            d.get("content") or "",
            tuple(ToolCall.from_wire(tc) for tc in d.get("tool_calls") or ()),
            d.get("tool_call_id"),
        )


def system(content: str) -> ChatMessage:
    return ChatMessage("system", content)


def user(content: str) -> ChatMessage:
    return ChatMessage("user", content)


def assistant(content: str = "", tool_calls=()) -> ChatMessage:
    return ChatMessage("assistant", content, tuple(tool_calls))


def tool_result(call_id: str, content: str) -> ChatMessage:
    return ChatMessage("tool", content, (), call_id)


@dataclass(frozen=True)
class ToolSpec:
    name: str
    description: str
    parameters: dict[str, Any] = field(default_factory=dict)

    def to_wire(self) -> dict[str, Any]:
        return {
            "type": "function",
            "function": {"name": self.name, "description": self.description, "parameters": self.parameters},
        }

    @classmethod
    def from_wire(cls, d: dict[str, Any]) -> "ToolSpec":
        fn = d.get("function", d)
        return cls(fn["name"], fn.get("description", ""), fn.get("parameters", {}))


@dataclass(frozen=True)
class CompletionRequest:
    messages: tuple[ChatMessage, ...]
    tools: tuple[ToolSpec, ...] = ()
    temperature: float = 0.0
    max_tokens: int = 4096

    def with_messages(self, messages) -> "CompletionRequest":
        return CompletionRequest(tuple(messages), self.tools, self.temperature, self.max_tokens)

    @property
    def tool_names(self) -> set[str]:
        return {t.name for t in self.tools}

    def latest_input(self) -> str:
        """Content of the most recent user or tool message (what mock matchers look at)."""
        for msg in reversed(self.messages):
            if msg.role in ("user", "tool"):
                return msg.content
        return ""

    def to_wire(self, model: str | None = None) -> dict[str, Any]:
        d: dict[str, Any] = {}
        if model is not None:
            d["model"] = model
        d["messages"] = [m.to_wire() for m in self.messages]
        if self.tools:
            d["tools"] = [t.to_wire() for t in self.tools]
        d["temperature"] = self.temperature
        d["max_tokens"] = self.max_tokens
        return d

    @classmethod
    def from_wire(cls, d: dict[str, Any]) -> "CompletionRequest":
        return cls(
            tuple(ChatMessage.from_wire(m) for m in d["messages"]),
            tuple(ToolSpec.from_wire(t) for t in d.get("tools") or ()),
            float(d.get("temperature", 0.0)),
            int(d.get("max_tokens", 4096)),
        )


@dataclass(frozen=True)
class Usage:
    prompt_tokens: int = 0
    completion_tokens: int = 0

    def to_wire(self) -> dict[str, int]:
        return {"prompt_tokens": self.prompt_tokens, "completion_tokens": self.completion_tokens}


@dataclass(frozen=True)
class CompletionResponse:
    message: ChatMessage
    finish_reason: str = "stop"
    usage: Usage = Usage()

    def to_wire(self) -> dict[str, Any]:
        return {"message": self.message.to_wire(), "finish_reason": self.finish_reason, "usage": self.usage.to_wire()}

    @classmethod
    def from_wire(cls, d: dict[str, Any]) -> "CompletionResponse":
        u = d.get("usage") or {}
        return cls(
            ChatMessage.from_wire(d["message"]),
            d.get("finish_reason") or "stop",
            Usage(int(u.get("prompt_tokens", 0)), int(u.get("completion_tokens", 0))),
        )
