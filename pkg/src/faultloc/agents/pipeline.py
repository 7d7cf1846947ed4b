"""End-to-end localization of one fault."""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from typing import Any

from ..bundle import FaultBundle
from ..codegraph import CodeGraph
from ..division import DivisionPlan, count_tokens, divide, single_group
from ..errors import FaultLocError, PipelineError, PreconditionError
from ..llm.backends import Backend
from ..llm.ranking import RankedList
from ..llm.transcript import AgentTranscript
from ..preprocess import FailureContext, build_failure_context
from ..spectra import rank_by
from .config import FULL, PipelineConfig
from .context import (
    FailureReason,
    PrioritizedSet,
    extract_failure_reason,
    prioritize_group,
    prioritize_prompt,
    render_entry,
)
from .debugger import ReasonedMethod, debug_and_rank
from .reviewer import ReviewTrace, review_and_rerank

log = logging.getLogger(__name__)


@dataclass
class LocalizationResult:
    fault_id: str
    ranking: RankedList
    config: PipelineConfig
    transcripts: dict[str, AgentTranscript]
    timings: dict[str, float] = field(default_factory=dict)
    plan: DivisionPlan | None = None
    prioritized: PrioritizedSet | None = None
    reasoned: list[ReasonedMethod] = field(default_factory=list)
    initial_ranking: RankedList | None = None
    review: ReviewTrace | None = None
    context: FailureContext | None = None
    failure_reason: FailureReason | None = None

    @property
    def stats(self) -> dict[str, int]:
        ts = self.transcripts.values()
        return {
            "backend_calls": sum(t.backend_calls for t in ts),
            "tool_calls": sum(t.tool_executions for t in ts),
            "prompt_tokens": sum(t.prompt_tokens for t in ts),
            "completion_tokens": sum(t.completion_tokens for t in ts),
        }

    def to_ranking_dict(self) -> dict[str, Any]:
        return {
            "fault_id": self.fault_id,
            "stage": self.ranking.stage,
            "ranking": self.ranking.to_json_entries(),
            "config": self.config.to_dict(),
            "stats": self.stats,
        }

    def ranking_json(self) -> str:
        return json.dumps(self.to_ranking_dict(), indent=2, ensure_ascii=False) + "\n"


def localize(
    bundle: FaultBundle,
    config: PipelineConfig = FULL,
    backend: Backend | None = None,
    graph: CodeGraph | None = None,
) -> LocalizationResult:
    """spectra -> preprocess -> (divide) -> context agent -> debugger -> (reviewer)."""
    if backend is None:
        raise PreconditionError("a backend is required")
    try:
        return _localize(bundle, config, backend, graph or bundle.graph)
    except FaultLocError as exc:
        raise PipelineError(bundle.fault_id, exc) from exc


def _localize(bundle: FaultBundle, config: PipelineConfig, backend: Backend, graph: CodeGraph) -> LocalizationResult:
    fid = bundle.fault_id
    timings: dict[str, float] = {}
    clock = time.perf_counter()

    def lap(name: str) -> None:
        nonlocal clock
        now = time.perf_counter()
        timings[name] = now - clock
        clock = now

    matrix = bundle.matrix
    ordered = rank_by(matrix, config.order_strategy, bundle.external_scores)
    absent = [m for m in ordered if m not in graph]
    if absent:
        log.warning("%s: %d covered method(s) absent from the call graph, e.g. %s", fid, len(absent), absent[0])
    ctx = build_failure_context(
        bundle.failing_test, bundle.raw_trace, bundle.test_body, bundle.project_prefixes, graph, bundle.test_start_line
    )
    lap("preprocess")

    context_t = AgentTranscript("context", fid)
    reason = extract_failure_reason(backend, ctx, config, context_t)

    entries = {
        m: render_entry(m, matrix.entry(m), graph, config.include_bodies) for m in ordered
    }
    pairs = [(m, entries[m]) for m in ordered]
    if config.enable_division:
        overhead = count_tokens(prioritize_prompt(reason, ctx, "", config, 999, 999), config.token_counter)
        plan = divide(pairs, config.budget, overhead)
    else:
        plan = single_group(pairs, config.token_counter)
    per_group = []
    for i, group in enumerate(plan.groups, 1):
        context_t.record_note("group", index=i, count=plan.k, methods=[str(m) for m in group])
        per_group.append(prioritize_group(backend, group, reason, ctx, config, entries, i, plan.k, context_t))
    prioritized = PrioritizedSet.build(per_group)
    context_t.record_note("prioritized", methods=[str(m) for m in prioritized.union])
    context_t.finish()
    lap("context")
    if not prioritized.union:
        raise PreconditionError("context agent judged every group irrelevant; nothing to debug")

    debugger_t = AgentTranscript("debugger", fid)
    reasoned, r_star = debug_and_rank(backend, list(prioritized.union), reason, ctx, graph, config, debugger_t)
    debugger_t.finish()
    lap("debugger")

    reviewer_t = AgentTranscript("reviewer", fid)
    review = ReviewTrace()
    if not r_star.entries:
        log.warning("%s: debugger ranking is empty; skipping review", fid)
        final = r_star.relabel("final")
    else:
        final = review_and_rerank(backend, r_star, ctx, graph, config, reviewer_t, review)
    reviewer_t.finish()
    lap("reviewer")

    return LocalizationResult(
        fid, final, config,
        {"context": context_t, "debugger": debugger_t, "reviewer": reviewer_t},
        timings, plan, prioritized, reasoned, r_star, review, ctx, reason,
    )
