"""Bounded assistant/tool exchange loop."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Callable

from ..errors import FaultLocError, ToolLoopExhausted, UnknownToolRequested
from .backends import Backend, complete
from .transcript import AgentTranscript
from .types import ChatMessage, CompletionRequest, ToolCall, ToolSpec, tool_result, user

log = logging.getLogger(__name__)

DEFAULT_MAX_TOOL_CALLS = 25
FORCE_ANSWER = (
    "You have used all available tool calls. Do not call any more tools. "
    "Produce your final answer now in the requested format."
)


@dataclass
class Tool:
    spec: ToolSpec
    handler: Callable[[dict[str, Any]], str]


class ToolRegistry:
    def __init__(self, tools: list[Tool] | None = None):
        self._tools: dict[str, Tool] = {}
        for t in tools or ():
            self.register(t)

    def register(self, tool: Tool) -> None:
        self._tools[tool.spec.name] = tool

    def __contains__(self, name: str) -> bool:
        return name in self._tools

    def __len__(self) -> int:
        return len(self._tools)

    @property
    def specs(self) -> tuple[ToolSpec, ...]:
        return tuple(t.spec for t in self._tools.values())

    def execute(self, call: ToolCall) -> str:
        tool = self._tools.get(call.tool_name)
        if tool is None:
            raise UnknownToolRequested(
                f"unknown tool {call.tool_name!r}; available: {', '.join(sorted(self._tools))}"
            )
        return tool.handler(call.args())


@dataclass(frozen=True)
class ToolExecution:
    call: ToolCall
    result: str
    is_error: bool


@dataclass
class ToolLoopResult:
    final: ChatMessage
    trace: list[ToolExecution]
    messages: list[ChatMessage]  # full history, for continuing the conversation


def run_tool_loop(
    backend: Backend,
    request: CompletionRequest,
    registry: ToolRegistry,
    max_tool_calls: int = DEFAULT_MAX_TOOL_CALLS,
    transcript: AgentTranscript | None = None,
) -> ToolLoopResult:
    """Run the model until it answers without tool calls.

    Tool errors, including unknown tool names, are returned to the model as
    tool messages.
    When ``max_tool_calls`` executions have happened, one forced-answer prompt is
    sent; tool calls in that reply raise :class:`ToolLoopExhausted`.
    """
    missing = request.tool_names - set(s.name for s in registry.specs)
    if missing:
        raise ValueError(f"declared tools without handlers: {sorted(missing)}")
    messages = list(request.messages)
    trace: list[ToolExecution] = []
    while True:
        response = complete(backend, request.with_messages(messages), transcript)
        reply = response.message
        if not reply.tool_calls:
            messages.append(reply)
            return ToolLoopResult(reply, trace, messages)
        budget = max_tool_calls - len(trace)
        calls = reply.tool_calls[:budget]
        messages.append(ChatMessage("assistant", reply.content, calls))
        for call in calls:
            try:
                result, is_error = registry.execute(call), False
            except FaultLocError as exc:
                result, is_error = f"ERROR {type(exc).__name__}: {exc}", True
            trace.append(ToolExecution(call, result, is_error))
            if transcript is not None:
                transcript.record_tool(call, result, is_error)
            messages.append(tool_result(call.id, result))
        if len(trace) >= max_tool_calls:
            break

    messages.append(user(FORCE_ANSWER))
    response = complete(backend, request.with_messages(messages), transcript)
    reply = response.message
    if reply.tool_calls:
        raise ToolLoopExhausted(f"model kept calling tools after {max_tool_calls} tool executions")
    messages.append(reply)
    return ToolLoopResult(reply, trace, messages)
