"""Context extraction, debugger and reviewer agents plus the end-to-end pipeline."""
from ..llm.ranking import RankedEntry, RankedList
from .config import ABLATIONS, FULL, ORDERINGS, PipelineConfig
from .context import (
    FailureReason,
    PrioritizedSet,
    extract_failure_reason,
    parse_failure_reason,
    prioritize_group,
    render_entry,
    union_prioritized,
)
from .debugger import GET_CALL_GRAPH, GET_METHOD_BODY, ReasonedMethod, debug_and_rank, navigation_tools
from .pipeline import LocalizationResult, localize
from .reviewer import ReviewTrace, review_and_rerank

__all__ = [
    "ABLATIONS", "FULL", "GET_CALL_GRAPH", "GET_METHOD_BODY", "ORDERINGS", "FailureReason",
    "LocalizationResult", "PipelineConfig", "PrioritizedSet", "RankedEntry", "RankedList",
    "ReasonedMethod", "ReviewTrace", "debug_and_rank", "extract_failure_reason", "localize",
    "navigation_tools", "parse_failure_reason", "prioritize_group", "render_entry",
    "review_and_rerank", "union_prioritized",
]
