"""A rule-based stand-in for a chat model, for offline experiments.

It reads the pipeline's own prompts and answers them with simple, deterministic
heuristics: a method looks faulty when its source (seen in a prompt or through
get_MethodBody) contains one of ``markers``, and suspicious when its name
appears in the stack trace. Prioritization only reads the first
``attention_span`` methods of a list, which mimics a model losing focus on long
inputs. The debugger blames stack-trace frames before source evidence; the
reviewer weighs source evidence first. With navigation the debugger also
retrieves up to ``follow_neighbors`` callers or callees of its top candidate,
preferring those named in the trace. None of this says anything about real model quality; it exists so the
ablation and ordering experiments can run end to end without an endpoint.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass

from ..spectra import MethodId, find_method_ids
from .ranking import REPAIR_PROMPT, extract_ranking_document, normalize_items
from .toolloop import FORCE_ANSWER
from .types import ChatMessage, CompletionRequest, ToolCall


def _section(text: str, heading: str) -> str:
    """Body of a '# heading' section (up to the next top-level heading)."""
    m = re.search(rf"^# {re.escape(heading)}[^\n]*\n(.*?)(?=^# |\Z)", text, re.S | re.M)
    return m.group(1) if m else ""


def _blocks_by_method(text: str) -> dict[MethodId, str]:
    """Map each listed method to the text that follows it until the next listed method."""
    out: dict[MethodId, str] = {}
    ids = list(re.finditer(r"[\w.]*\$[\w$]+#[\w$<>]+\([^()\s]*\)", text))
    for i, m in enumerate(ids):
        end = ids[i + 1].start() if i + 1 < len(ids) else len(text)
        try:
            mid = MethodId.parse(m.group(0))
        except Exception:
            continue
        out.setdefault(mid, text[m.end():end])
    return out


@dataclass
class SimulatedModel:
    markers: tuple[str, ...] = ("FAULT",)
    attention_span: int = 6
    pick: int = 3
    follow_neighbors: int = 2

    def __call__(self, request: CompletionRequest) -> ChatMessage:
        first = next((m.content for m in request.messages if m.role == "user"), "")
        last_user = next((m.content for m in reversed(request.messages) if m.role == "user"), "")
        latest = request.messages[-1]

        if "three markdown sections" in first:
            return self._failure_reason(first)
        if "# Covered Methods" in first:
            return self._prioritize(first)
        if "You are the debugger agent" in first:
            if latest.role == "user" and latest.content == REPAIR_PROMPT:
                return self._reply_json({"ranking": self._last_ranking(request)})
            return self._debug(request, first, forced=last_user == FORCE_ANSWER)
        if "You are the reviewer agent" in first:
            return self._review(request, first, last_user)
        return ChatMessage("assistant", "[]")

    # -- helpers -------------------------------------------------------------

    def _faulty(self, text: str) -> bool:
        return any(marker in text for marker in self.markers)

    @staticmethod
    def _in_trace(mid: MethodId, trace: str) -> bool:
        return f"{mid.class_fqn}.{mid.method_name}(" in trace

    def _score(self, mid: MethodId, body: str, trace: str, trace_first: bool = False) -> tuple:
        """Sort key, smaller is more suspicious."""
        evidence = self._faulty(body)
        at = trace.find(f"{mid.class_fqn}.{mid.method_name}(")
        frame = at if at >= 0 else len(trace)
        return (frame, not evidence) if trace_first else (not evidence, frame)

    @staticmethod
    def _reply_json(doc) -> ChatMessage:
        return ChatMessage("assistant", json.dumps(doc, indent=1))

    def _failure_reason(self, prompt: str) -> ChatMessage:
        trace = _section(prompt, "Stack Trace").strip("`\n ")
        header = trace.splitlines()[0] if trace else "an unexpected failure"
        frames = [ln.strip()[3:] for ln in trace.splitlines() if ln.strip().startswith("at ")]
        where = frames[0] if frames else "the code under test"
        text = (
            "## Test Purpose\nThe test exercises the behaviour named in its assertions.\n\n"
            "## Expected Output\nThe assertions in the test pass without an exception.\n\n"
            f"## Failure Reason\nThe run ends with {header}, raised at {where}."
        )
        return ChatMessage("assistant", text)

    def _prioritize(self, prompt: str) -> ChatMessage:
        trace = _section(prompt, "Stack Trace")
        listed = _blocks_by_method(_section(prompt, "Covered Methods"))
        read = list(listed.items())[: self.attention_span]
        scored = sorted(enumerate(read), key=lambda t: (self._score(t[1][0], t[1][1], trace), t[0]))
        picked = [str(mid) for _, (mid, _) in scored[: self.pick]]
        return self._reply_json({"methods": picked})

    def _history(self, request: CompletionRequest):
        requested: list[tuple[str, MethodId]] = []
        bodies: dict[MethodId, str] = {}
        graphs: dict[MethodId, str] = {}
        by_id = {}
        for m in request.messages:
            for tc in m.tool_calls:
                try:
                    mid = MethodId.parse(tc.args().get("method_id", ""))
                except Exception:
                    continue
                requested.append((tc.tool_name, mid))
                by_id[tc.id] = (tc.tool_name, mid)
            if m.role == "tool" and m.tool_call_id in by_id and not m.content.startswith("ERROR"):
                name, mid = by_id[m.tool_call_id]
                (bodies if name == "get_MethodBody" else graphs)[mid] = m.content
        return requested, bodies, graphs

    def _call(self, request: CompletionRequest, tool: str, mid: MethodId) -> ChatMessage:
        n = sum(len(m.tool_calls) for m in request.messages)
        return ChatMessage("assistant", "", (ToolCall(f"sim_{n}", tool, json.dumps({"method_id": str(mid)})),))

    def _rank(self, items: list[tuple[MethodId, str]], trace: str, with_fix: bool = False,
              trace_first: bool = False) -> list[dict]:
        order = sorted(enumerate(items), key=lambda t: (self._score(t[1][0], t[1][1], trace, trace_first), t[0]))
        out = []
        for rank, (_, (mid, body)) in enumerate(order, 1):
            why = "source shows a suspicious construct" if self._faulty(body) else "no direct evidence of the fault"
            entry = {"method": str(mid), "rank": rank, "reasoning": why}
            if with_fix:
                entry["fix"] = f"Re-check the logic of {mid.method_name} against the expected output."
            out.append(entry)
        return out

    def _debug(self, request: CompletionRequest, prompt: str, forced: bool) -> ChatMessage:
        trace = _section(prompt, "Stack Trace")
        candidates = _blocks_by_method(_section(prompt, "Candidate Methods"))
        if not request.tools:
            items = list(candidates.items())
        else:
            requested, bodies, graphs = self._history(request)
            asked_body = {mid for name, mid in requested if name == "get_MethodBody"}
            asked_graph = {mid for name, mid in requested if name == "get_CallGraph"}
            if not forced:
                for mid in candidates:
                    if mid not in asked_body:
                        return self._call(request, "get_MethodBody", mid)
                head = next(iter(candidates), None)
                if head is not None and head not in asked_graph:
                    return self._call(request, "get_CallGraph", head)
                if head in graphs:
                    neighbors = [m for m in find_method_ids(graphs[head]) if m != head]
                    neighbors.sort(key=lambda m: not self._in_trace(m, trace))
                    for mid in neighbors[: self.follow_neighbors]:
                        if mid not in asked_body:
                            return self._call(request, "get_MethodBody", mid)
            items = list(bodies.items())
        ranking = self._rank(items, trace, trace_first=True)
        return self._reply_json({
            "analyzed_methods": [{"method": r["method"], "reasoning": r["reasoning"]} for r in ranking],
            "failure_reasoning": "See per-method reasoning.",
            "ranking": ranking,
        })

    def _last_ranking(self, request: CompletionRequest) -> list[dict]:
        for m in reversed(request.messages):
            if m.role == "assistant" and m.content:
                try:
                    items, _ = extract_ranking_document(m.content)
                    return [{"method": n, "rank": i, "reasoning": r or "kept"} for i, (n, _, r, _) in
                            enumerate(normalize_items(items), 1)]
                except Exception:
                    continue
        return []

    def _review(self, request: CompletionRequest, prompt: str, last_user: str) -> ChatMessage:
        trace = _section(prompt, "Stack Trace")
        if last_user.startswith("Now finalize") or last_user.startswith("Some ranking entries lack a fix"):
            current = self._last_ranking(request)
            requested, bodies, _ = self._history(request)
            items = [(MethodId.parse(e["method"]), bodies.get(MethodId.parse(e["method"]), e["reasoning"])) for e in current]
            return self._reply_json({"ranking": self._rank(items, trace, with_fix=True)})
        if last_user == REPAIR_PROMPT:
            return self._reply_json({"ranking": self._last_ranking(request)})
        # critique round: current ranking comes from the latest user message
        block = re.search(r"```json\n(.*?)```", last_user if "Reflection round" in last_user else prompt, re.S)
        current = json.loads(block.group(1)) if block else []
        requested, bodies, _ = self._history(request)
        if request.tools and last_user != FORCE_ANSWER:
            asked = {mid for name, mid in requested if name == "get_MethodBody"}
            for e in current[:3]:
                mid = MethodId.parse(e["method"])
                if mid not in asked:
                    return self._call(request, "get_MethodBody", mid)
        items = []
        for e in current:
            mid = MethodId.parse(e["method"])
            items.append((mid, bodies.get(mid, "") + e.get("reasoning", "")))
        ranking = self._rank(items, trace)
        return ChatMessage(
            "assistant",
            "Critique: re-checked the top candidates against their source.\n"
            + json.dumps({"critique": "re-ordered by evidence", "ranking": ranking}, indent=1),
        )
