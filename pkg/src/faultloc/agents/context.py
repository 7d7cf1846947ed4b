"""Context extraction agent: failure-reason summary and per-group prioritization."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from ..codegraph import CodeGraph
from ..errors import MissingSection, PreconditionError, UnparsableReply
from ..llm.backends import Backend, complete
from ..llm.ranking import _ranking_items, iter_json_values, normalize_items, resolve_methods
from ..llm.transcript import AgentTranscript
from ..llm.types import ChatMessage, CompletionRequest, user
from ..preprocess import FailureContext
from ..spectra import CoverageEntry, MethodId
from .config import FULL, PipelineConfig
from .templates import render

SECTIONS = ("test_purpose", "expected_output", "failure_reason")
_SECTION_TITLES = {
    "test_purpose": "Test Purpose",
    "expected_output": "Expected Output",
    "failure_reason": "Failure Reason",
}
_HEADER_RE = re.compile(
    r"^\s*(?:#{1,6}\s*)?(?:\*\*|__)?\s*"
    r"(test purpose|expected output|expected behaviou?r|expected result|failure reason|reason for failure)"
    r"\s*(?:\*\*|__)?\s*:?\s*(?:\*\*|__)?\s*(.*)$",
    re.I,
)
_HEADER_KEY = {
    "test purpose": "test_purpose",
    "expected output": "expected_output",
    "expected behavior": "expected_output",
    "expected behaviour": "expected_output",
    "expected result": "expected_output",
    "failure reason": "failure_reason",
    "reason for failure": "failure_reason",
}


@dataclass(frozen=True)
class FailureReason:
    test_purpose: str
    expected_output: str
    failure_reason: str
    raw: str

    def render(self) -> str:
        return "\n\n".join(f"## {_SECTION_TITLES[k]}\n{getattr(self, k)}" for k in SECTIONS)


def parse_failure_reason(text: str) -> tuple[dict[str, str], list[str]]:
    """Split a reply into its sections. Returns (sections found, missing section keys)."""
    found: dict[str, list[str]] = {}
    current = None
    for line in text.splitlines():
        m = _HEADER_RE.match(line)
        if m:
            current = _HEADER_KEY[m.group(1).lower()]
            found.setdefault(current, [])
            if m.group(2).strip():
                found[current].append(m.group(2).strip())
            continue
        if current is not None:
            if re.match(r"^\s*#{1,6}\s", line):
                current = None
                continue
            found[current].append(line)
    sections = {k: "\n".join(v).strip() for k, v in found.items()}
    missing = [k for k in SECTIONS if not sections.get(k)]
    return sections, missing


def _request(messages, config: PipelineConfig) -> CompletionRequest:
    return CompletionRequest(tuple(messages), (), config.temperature, config.max_tokens)


def extract_failure_reason(
    backend: Backend,
    ctx: FailureContext,
    config: PipelineConfig = FULL,
    transcript: AgentTranscript | None = None,
) -> FailureReason:
    if not ctx.pruned_test_code.strip():
        raise PreconditionError(f"no test code for {ctx.test_id}; preprocess the test first")
    prompt = render(config.template("failure_reason"), test_code=ctx.test_text, stack_trace=ctx.trace_text)
    messages: list[ChatMessage] = [user(prompt)]
    reply = complete(backend, _request(messages, config), transcript).message
    sections, missing = parse_failure_reason(reply.content)
    raw = reply.content
    if missing:
        messages += [reply, user(render(config.template("failure_reason_repair"),
                                        missing=", ".join(_SECTION_TITLES[k] for k in missing)))]
        reply = complete(backend, _request(messages, config), transcript).message
        sections, missing = parse_failure_reason(reply.content)
        raw = reply.content
        if missing:
            raise MissingSection(
                f"failure reason for {ctx.test_id} lacks {', '.join(_SECTION_TITLES[k] for k in missing)} after repair"
            )
    reason = FailureReason(sections["test_purpose"], sections["expected_output"], sections["failure_reason"], raw)
    ctx.failure_reason = reason.render()
    return reason


def render_entry(
    method: MethodId,
    entry: CoverageEntry | None = None,
    graph: CodeGraph | None = None,
    include_body: bool = True,
) -> str:
    """Text for one covered method in a prioritization prompt (ends with a newline)."""
    head = f"- {method}"
    if entry is not None and entry.statements:
        head += f"  [covered lines: {','.join(str(n) for n in sorted(entry.statements))}]"
    if include_body and graph is not None and method in graph and graph.node(method).body:
        return f"{head}\n```\n{graph.node(method).body.rstrip()}\n```\n"
    return head + "\n"


def prioritize_prompt(
    reason: FailureReason, ctx: FailureContext, methods_text: str, config: PipelineConfig,
    group_index: int = 1, group_count: int = 1,
) -> str:
    return render(
        config.template("prioritize"),
        failure_reason=reason.render(),
        stack_trace=ctx.trace_text,
        methods=methods_text,
        group_index=group_index,
        group_count=group_count,
    )


def _parse_selection(text: str) -> list[str]:
    for value in iter_json_values(text):
        items = _ranking_items(value)
        if items is not None:
            return [name for name, _, _, _ in normalize_items(items)]
    raise UnparsableReply("no JSON method list in prioritization reply")


def prioritize_group(
    backend: Backend,
    group: Sequence[MethodId],
    reason: FailureReason,
    ctx: FailureContext,
    config: PipelineConfig = FULL,
    entries: Mapping[MethodId, str] | None = None,
    group_index: int = 1,
    group_count: int = 1,
    transcript: AgentTranscript | None = None,
) -> list[MethodId]:
    """Ordered subset of ``group`` the model relates to the failure (reply order wins)."""
    if not group:
        raise PreconditionError("cannot prioritize an empty group")
    methods_text = "".join((entries or {}).get(m) or f"- {m}\n" for m in group)
    messages: list[ChatMessage] = [user(prioritize_prompt(reason, ctx, methods_text, config, group_index, group_count))]
    reply = complete(backend, _request(messages, config), transcript).message
    try:
        names = _parse_selection(reply.content)
    except UnparsableReply:
        messages += [reply, user(render(config.template("prioritize_repair")))]
        reply = complete(backend, _request(messages, config), transcript).message
        names = _parse_selection(reply.content)
    picked: list[MethodId] = []
    for mid in resolve_methods(names, group, context=f"group {group_index}"):
        if mid is not None and mid not in picked:
            picked.append(mid)
    return picked


def union_prioritized(per_group: Sequence[Sequence[MethodId]]) -> list[MethodId]:
    """Concatenate C'_1..C'_K in group order, keeping first occurrences."""
    out: list[MethodId] = []
    seen: set[MethodId] = set()
    for group in per_group:
        for m in group:
            if m not in seen:
                seen.add(m)
                out.append(m)
    return out


@dataclass(frozen=True)
class PrioritizedSet:
    per_group: tuple[tuple[MethodId, ...], ...]
    union: tuple[MethodId, ...]

    @classmethod
    def build(cls, per_group: Sequence[Sequence[MethodId]]) -> "PrioritizedSet":
        return cls(tuple(tuple(g) for g in per_group), tuple(union_prioritized(per_group)))
