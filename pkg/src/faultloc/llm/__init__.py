from .backends import DEFAULT_MODEL, Backend, MockBackend, MockStep, RemoteBackend, RemoteConfig, complete
from .ranking import (
    REPAIR_PROMPT,
    RankedEntry,
    RankedList,
    UnknownMethodInRanking,
    parse_structured_ranking,
)
from .toolloop import Tool, ToolExecution, ToolLoopResult, ToolRegistry, run_tool_loop
from .transcript import TRANSCRIPT_VERSION, AgentTranscript
from .types import ChatMessage, CompletionRequest, CompletionResponse, ToolCall, ToolSpec, Usage

__all__ = [
    "AgentTranscript", "Backend", "ChatMessage", "CompletionRequest", "CompletionResponse",
    "DEFAULT_MODEL", "MockBackend", "MockStep", "REPAIR_PROMPT", "RankedEntry", "RankedList",
    "RemoteBackend", "RemoteConfig", "TRANSCRIPT_VERSION", "Tool", "ToolCall", "ToolExecution",
    "ToolLoopResult", "ToolRegistry", "ToolSpec", "UnknownMethodInRanking", "Usage", "complete",
    "parse_structured_ranking", "run_tool_loop",
]
