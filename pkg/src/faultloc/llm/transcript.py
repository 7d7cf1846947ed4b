"""Replayable record of one agent run."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Any

from .types import CompletionRequest, CompletionResponse, ToolCall

TRANSCRIPT_VERSION = 1


@dataclass
class AgentTranscript:
    agent: str
    fault_id: str = ""
    events: list[dict[str, Any]] = field(default_factory=list)
    started_at: float = field(default_factory=time.time)
    finished_at: float | None = None

    def record_completion(self, request: CompletionRequest, response: CompletionResponse) -> None:
        self.events.append({"type": "completion", "request": request.to_wire(), "response": response.to_wire()})

    def record_tool(self, call: ToolCall, result: str, is_error: bool) -> None:
        self.events.append({"type": "tool", "call": call.to_wire(), "result": result, "is_error": is_error})

    def record_note(self, kind: str, **data: Any) -> None:
        """Free-form structured marker (group boundaries, reviewer iterations...)."""
        self.events.append({"type": "note", "kind": kind, **data})

    def completions(self) -> list[tuple[CompletionRequest, CompletionResponse]]:
        return [
            (CompletionRequest.from_wire(e["request"]), CompletionResponse.from_wire(e["response"]))
            for e in self.events
            if e["type"] == "completion"
        ]

    def notes(self, kind: str) -> list[dict[str, Any]]:
        return [e for e in self.events if e["type"] == "note" and e["kind"] == kind]

    @property
    def backend_calls(self) -> int:
        return sum(1 for e in self.events if e["type"] == "completion")

    @property
    def tool_executions(self) -> int:
        return sum(1 for e in self.events if e["type"] == "tool")

    @property
    def tool_call_records(self) -> int:
        """ToolCall objects requested by the model across all responses."""
        return sum(len(e["response"]["message"].get("tool_calls", [])) for e in self.events if e["type"] == "completion")

    @property
    def prompt_tokens(self) -> int:
        return sum(e["response"]["usage"]["prompt_tokens"] for e in self.events if e["type"] == "completion")

    @property
    def completion_tokens(self) -> int:
        return sum(e["response"]["usage"]["completion_tokens"] for e in self.events if e["type"] == "completion")

    def finish(self) -> None:
        self.finished_at = time.time()

    def to_dict(self, include_timing: bool = True) -> dict[str, Any]:
        d: dict[str, Any] = {
            "transcript_version": TRANSCRIPT_VERSION,
            "agent": self.agent,
            "fault_id": self.fault_id,
        }
        if include_timing:
            d["started_at"] = self.started_at
            d["finished_at"] = self.finished_at
        d["stats"] = {
            "backend_calls": self.backend_calls,
            "tool_calls": self.tool_executions,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
        }
        d["events"] = self.events
        return d

    def dumps(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "AgentTranscript":
        version = d.get("transcript_version")
        if version != TRANSCRIPT_VERSION:
            raise ValueError(f"unsupported transcript_version {version!r}")
        return cls(d["agent"], d.get("fault_id", ""), list(d["events"]), d.get("started_at", 0.0), d.get("finished_at"))

    @classmethod
    def loads(cls, text: str) -> "AgentTranscript":
        return cls.from_dict(json.loads(text))
