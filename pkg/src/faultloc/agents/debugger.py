"""Debugger agent: call-graph navigation, per-method reasoning (R) and initial ranking (R*)."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

from ..codegraph import CodeGraph, get_call_graph, get_method_body
from ..errors import MalformedMethodId, MethodNotFound, PreconditionError, UnparsableRanking
from ..llm.backends import Backend, complete
from ..llm.ranking import REPAIR_PROMPT, RankedList, iter_json_values, parse_structured_ranking
from ..llm.toolloop import Tool, ToolExecution, ToolRegistry, run_tool_loop
from ..llm.transcript import AgentTranscript
from ..llm.types import ChatMessage, CompletionRequest, ToolSpec, user
from ..preprocess import FailureContext
from ..spectra import MethodId
from .config import FULL, PipelineConfig
from .context import FailureReason
from .templates import render

log = logging.getLogger(__name__)

GET_METHOD_BODY = "get_MethodBody"
GET_CALL_GRAPH = "get_CallGraph"
NO_REASONING = "Retrieved during analysis; the model gave no separate reasoning."

_ID_PARAM = {
    "type": "object",
    "properties": {"method_id": {"type": "string", "description": "Canonical id, pkg$Class#method(ParamTypes)"}},
    "required": ["method_id"],
}


@dataclass(frozen=True)
class ReasonedMethod:
    method: MethodId
    reasoning: str
    visited_via: str  # "prioritized" | "navigation"

    def __post_init__(self):
        if not self.reasoning:
            raise ValueError(f"empty reasoning for {self.method}")


def _method_arg(args: dict) -> MethodId:
    raw = args.get("method_id") or args.get("method") or args.get("id")
    if not isinstance(raw, str):
        raise MethodNotFound("missing 'method_id' argument")
    try:
        return MethodId.parse(raw)
    except MalformedMethodId as exc:
        raise MethodNotFound(f"not a method id in this code base: {raw!r}") from exc


def navigation_tools(graph: CodeGraph) -> ToolRegistry:
    """get_MethodBody / get_CallGraph bound to ``graph``. Errors surface as MethodNotFound."""

    def body(args: dict) -> str:
        return get_method_body(graph, _method_arg(args)).render()

    def neighbors(args: dict) -> str:
        return get_call_graph(graph, _method_arg(args)).render()

    return ToolRegistry([
        Tool(ToolSpec(GET_METHOD_BODY, "Return the source code of a method in the code base.", _ID_PARAM), body),
        Tool(ToolSpec(GET_CALL_GRAPH, "Return the callers and callees of a method in the call graph.", _ID_PARAM), neighbors),
    ])


def retrieved_methods(trace: Iterable[ToolExecution]) -> list[MethodId]:
    """Methods whose body was successfully returned, in retrieval order."""
    out: list[MethodId] = []
    for ex in trace:
        if ex.call.tool_name != GET_METHOD_BODY or ex.is_error:
            continue
        mid = MethodId.parse(ex.call.args().get("method_id") or ex.call.args().get("method") or ex.call.args().get("id"))
        if mid not in out:
            out.append(mid)
    return out


def reasoning_by_method(text: str) -> dict[MethodId, str]:
    """Per-method reasoning from 'analyzed_methods' and ranking entries of a reply."""
    out: dict[MethodId, str] = {}
    for value in iter_json_values(text):
        if not isinstance(value, dict):
            continue
        for key in ("analyzed_methods", "ranking"):
            for item in value.get(key) or ():
                if not isinstance(item, dict):
                    continue
                name = item.get("method") or item.get("method_id") or item.get("id")
                reason = item.get("reasoning") or item.get("reason")
                if not (isinstance(name, str) and isinstance(reason, str) and reason.strip()):
                    continue
                try:
                    out.setdefault(MethodId.parse(name), reason.strip())
                except MalformedMethodId:
                    continue
        if out:
            break
    return out


def rank_with_repair(
    backend: Backend,
    messages: list[ChatMessage],
    reply: ChatMessage,
    allowed: Iterable[MethodId],
    stage: str,
    config: PipelineConfig,
    transcript: AgentTranscript | None,
) -> tuple[RankedList, ChatMessage]:
    """Parse a ranking; on failure send one repair prompt, then give up."""
    allowed = list(allowed)
    try:
        return parse_structured_ranking(reply.content, allowed, stage), reply
    except UnparsableRanking:
        log.info("ranking unparsable at stage %s; sending repair prompt", stage)
    messages.append(user(REPAIR_PROMPT))
    request = CompletionRequest(tuple(messages), (), config.temperature, config.max_tokens)
    reply = complete(backend, request, transcript).message
    messages.append(reply)
    return parse_structured_ranking(reply.content, allowed, stage), reply


def _candidates_text(prioritized: Sequence[MethodId], graph: CodeGraph | None, inline_bodies: bool) -> str:
    parts = []
    for i, m in enumerate(prioritized, 1):
        line = f"{i}. {m}"
        if inline_bodies and graph is not None and m in graph and graph.node(m).body:
            line += f"\n```\n{graph.node(m).body.rstrip()}\n```"
        parts.append(line)
    return "\n".join(parts)


def debug_and_rank(
    backend: Backend,
    prioritized: Sequence[MethodId],
    reason: FailureReason,
    ctx: FailureContext,
    graph: CodeGraph,
    config: PipelineConfig = FULL,
    transcript: AgentTranscript | None = None,
) -> tuple[list[ReasonedMethod], RankedList]:
    """Return (R, R*). With navigation, R is every method whose body the model retrieved;
    without it, the prioritized methods are inlined and form R."""
    if not prioritized:
        raise PreconditionError("debugger needs at least one prioritized method")
    navigate = config.enable_navigation
    template = config.template("debugger" if navigate else "debugger_nonav")
    prompt = render(
        template,
        failure_reason=reason.render(),
        stack_trace=ctx.trace_text,
        test_code=ctx.test_text,
        methods=_candidates_text(prioritized, graph, inline_bodies=not navigate),
    )
    registry = navigation_tools(graph) if navigate else ToolRegistry()
    request = CompletionRequest((user(prompt),), registry.specs, config.temperature, config.max_tokens)
    result = run_tool_loop(backend, request, registry, config.max_tool_calls, transcript)
    messages = result.messages

    analysed = retrieved_methods(result.trace) if navigate else list(prioritized)
    r_star, final = rank_with_repair(backend, messages, result.final, analysed, "debugger", config, transcript)

    reasons = reasoning_by_method(result.final.content)
    if final is not result.final:
        for m, r in reasoning_by_method(final.content).items():
            reasons.setdefault(m, r)
    prioritized_set = set(prioritized)
    r_set = [
        ReasonedMethod(m, reasons.get(m, NO_REASONING), "prioritized" if m in prioritized_set else "navigation")
        for m in analysed
    ]
    # ranking reasoning falls back to the analysed-method reasoning
    entries = [(e.method, e.reasoning or reasons.get(e.method, NO_REASONING), e.fix) for e in r_star.entries]
    return r_set, RankedList.from_methods(entries, "debugger")
