"""Reviewer agent: reflexion-style critique loop, then a fix-generating final re-rank."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from ..codegraph import CodeGraph
from ..errors import PreconditionError, UnparsableRanking
from ..llm.backends import Backend, complete
from ..llm.ranking import RankedList, parse_structured_ranking
from ..llm.toolloop import ToolRegistry, run_tool_loop
from ..llm.transcript import AgentTranscript
from ..llm.types import ChatMessage, CompletionRequest, user
from ..preprocess import FailureContext
from .config import FULL, PipelineConfig
from .debugger import navigation_tools, rank_with_repair, retrieved_methods
from .templates import render

log = logging.getLogger(__name__)

TOOL_NOTE = (
    "If you need more evidence, use get_MethodBody and get_CallGraph to inspect "
    "method bodies and caller/callee relations before revising."
)


@dataclass
class ReviewTrace:
    """Rankings produced along the way (one per critique round) and the stop reason."""

    rankings: list[RankedList] = field(default_factory=list)
    stopped: str = ""


def review_and_rerank(
    backend: Backend,
    r_star: RankedList,
    ctx: FailureContext,
    graph: CodeGraph,
    config: PipelineConfig = FULL,
    transcript: AgentTranscript | None = None,
    trace: ReviewTrace | None = None,
) -> RankedList:
    if not r_star.entries:
        raise PreconditionError("reviewer needs a non-empty initial ranking")
    if not config.enable_reflexion:
        return r_star.relabel("final")
    trace = trace if trace is not None else ReviewTrace()
    navigate = config.enable_navigation
    registry = navigation_tools(graph) if navigate else ToolRegistry()

    # the final ranking may only use R* plus methods the reviewer retrieves itself
    allowed = list(r_star.methods)
    messages: list[ChatMessage] = [user(render(
        config.template("reviewer_critique"),
        failure_reason=ctx.failure_reason or "",
        stack_trace=ctx.trace_text,
        test_code=ctx.test_text,
        ranking=r_star.render(),
        tool_note=TOOL_NOTE if navigate else "",
    ))]
    current = r_star
    for iteration in range(1, config.reflexion_max_iters + 1):
        if transcript is not None:
            transcript.record_note("reviewer_iteration", iteration=iteration)
        if iteration > 1:
            messages.append(user(render(config.template("reviewer_iterate"), iteration=iteration, ranking=current.render())))
        request = CompletionRequest(tuple(messages), registry.specs, config.temperature, config.max_tokens)
        result = run_tool_loop(backend, request, registry, config.max_tool_calls, transcript)
        messages = result.messages
        for m in retrieved_methods(result.trace):
            if m not in allowed:
                allowed.append(m)
        revised, _ = rank_with_repair(backend, messages, result.final, allowed, f"reviewer_iter_{iteration}", config, transcript)
        if not revised.entries:
            log.warning("reviewer round %d produced an empty ranking; keeping the previous one", iteration)
            revised = current.relabel(f"reviewer_iter_{iteration}")
        trace.rankings.append(revised)
        stable = revised.methods == current.methods
        current = revised
        if stable:
            trace.stopped = f"stable after {iteration} iteration(s)"
            break
    else:
        trace.stopped = f"iteration limit {config.reflexion_max_iters} reached"
    return finalize(backend, messages, current, allowed, config, transcript)


def finalize(
    backend: Backend,
    messages: list[ChatMessage],
    current: RankedList,
    allowed: list,
    config: PipelineConfig,
    transcript: AgentTranscript | None,
) -> RankedList:
    """Chain-of-thought pass: a probable fix per method, then the final ordering."""
    if transcript is not None:
        transcript.record_note("reviewer_finalize")
    messages.append(user(render(config.template("reviewer_finalize"))))
    request = CompletionRequest(tuple(messages), (), config.temperature, config.max_tokens)
    reply = complete(backend, request, transcript).message
    messages.append(reply)
    final, reply = rank_with_repair(backend, messages, reply, allowed, "final", config, transcript)
    if not final.entries:
        raise UnparsableRanking("final ranking is empty")
    if not final.has_all_fixes():
        missing = ", ".join(str(e.method) for e in final.entries if not e.fix)
        messages.append(user(render(config.template("finalize_repair"), missing=missing)))
        request = CompletionRequest(tuple(messages), (), config.temperature, config.max_tokens)
        reply = complete(backend, request, transcript).message
        messages.append(reply)
        final = parse_structured_ranking(reply.content, allowed, "final")
        if not final.entries or not final.has_all_fixes():
            raise UnparsableRanking("final ranking still lacks a fix for some entries after repair")
    previous = {e.method: e.reasoning for e in current.entries}
    entries = [(e.method, e.reasoning or previous.get(e.method, ""), e.fix) for e in final.entries]
    return RankedList.from_methods(entries, "final")
