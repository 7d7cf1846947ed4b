"""Stack-trace and test-code pruning for the context-extraction stage."""
from __future__ import annotations

import logging
import re
import warnings
from collections import deque
from dataclasses import dataclass, field, replace

from .codegraph import CodeGraph
from .errors import FailingLineOutOfRange, PreconditionError, TestNotInGraph, UnparsableTrace
from .spectra import MethodId

log = logging.getLogger(__name__)

HELPER_DEPTH = 3

_FRAME_RE = re.compile(r"^\s*at\s+(?:[\w.$-]+/)?([\w$.<>]+)\.([\w$<>]+)\(([^)]*)\)\s*$")
_TEST_CLASS_RE = re.compile(r"(^Test|Tests?$|TestCase$)")


@dataclass(frozen=True)
class StackFrame:
    class_fqn: str
    method_name: str
    file: str | None = None
    line: int | None = None

    def __post_init__(self):
        if not self.class_fqn:
            raise ValueError("StackFrame.class_fqn must be non-empty")

    def render(self) -> str:
        if self.file is None:
            loc = "Unknown Source"
        elif self.line is None:
            loc = self.file
        else:
            loc = f"{self.file}:{self.line}"
        return f"\tat {self.class_fqn}.{self.method_name}({loc})"


@dataclass
class FailureContext:
    test_id: MethodId
    pruned_trace: list[StackFrame]
    exception_header: str
    pruned_test_code: str
    helper_bodies: list[tuple[MethodId, str]] = field(default_factory=list)
    failure_reason: str | None = None

    @property
    def trace_text(self) -> str:
        return render_trace(self.exception_header, self.pruned_trace)

    @property
    def test_text(self) -> str:
        parts = [self.pruned_test_code]
        for mid, body in self.helper_bodies:
            parts.append(f"// helper {mid}\n{body}")
        return "\n\n".join(parts)


def _parse_frame(line: str) -> StackFrame | None:
    m = _FRAME_RE.match(line)
    if not m:
        return None
    cls, meth, loc = m.groups()
    file = None
    lineno = None
    if loc and loc not in ("Unknown Source",):
        name, _, num = loc.rpartition(":")
        if name and num.isdigit():
            file, lineno = name, int(num)
        else:
            file = loc
    return StackFrame(cls, meth, file, lineno)


def preprocess_trace(raw_trace: str, project_prefixes: list[str]) -> tuple[str, list[StackFrame]]:
    """Split a JVM trace into its header and the frames that belong to the project.

    The header is every line before the first ``at`` frame, kept verbatim.
    ``Caused by:`` lines and ``... N more`` elisions are dropped; their frames are
    filtered like the rest.
    """
    if not raw_trace or not raw_trace.strip():
        raise UnparsableTrace("empty stack trace")
    lines = raw_trace.replace("\r\n", "\n").split("\n")
    header: list[str] = []
    frames: list[StackFrame] = []
    seen_frame = False
    for line in lines:
        frame = _parse_frame(line)
        if frame is not None:
            seen_frame = True
            frames.append(frame)
        elif not seen_frame:
            header.append(line)
    if not seen_frame:
        raise UnparsableTrace("no 'at ' frames found in stack trace")
    while header and not header[-1].strip():
        header.pop()
    kept = [f for f in frames if any(f.class_fqn.startswith(p) for p in project_prefixes)]
    return "\n".join(header), kept


def render_trace(header: str, frames: list[StackFrame]) -> str:
    return "\n".join([header, *(f.render() for f in frames)])


def failing_line_for(test_id: MethodId, frames: list[StackFrame], span: tuple[int, int] | None = None) -> int | None:
    """Line of the test method in the pruned trace.

    Prefers the frame naming the test method itself; otherwise the innermost
    frame of the test class that falls inside ``span``.
    """
    fqn = test_id.class_fqn
    in_class = [f for f in frames if f.class_fqn == fqn and f.line is not None]
    for f in in_class:
        if f.method_name == test_id.method_name:
            return f.line
    if span is not None:
        for f in in_class:
            if span[0] <= f.line <= span[1]:
                return f.line
    return None


def _strip_code(line: str, in_block: bool) -> tuple[str, bool]:
    """Drop string/char literals and comments so braces can be counted."""
    out = []
    i, n = 0, len(line)
    while i < n:
        if in_block:
            end = line.find("*/", i)
            if end < 0:
                return "".join(out), True
            i = end + 2
            in_block = False
            continue
        c = line[i]
        if line.startswith("//", i):
            break
        if line.startswith("/*", i):
            in_block = True
            i += 2
            continue
        if c in "\"'":
            j = i + 1
            while j < n and line[j] != c:
                j += 2 if line[j] == "\\" else 1
            i = j + 1
            continue
        out.append(c)
        i += 1
    return "".join(out), in_block


def _closers(lines: list[str]) -> list[str]:
    stack: list[str] = []
    in_block = False
    for line in lines:
        code, in_block = _strip_code(line, in_block)
        indent = line[: len(line) - len(line.lstrip())]
        for c in code:
            if c == "{":
                stack.append(indent)
            elif c == "}" and stack:
                stack.pop()
    return [f"{indent}}}" for indent in reversed(stack)]


def _is_test_class(method: MethodId, test_id: MethodId) -> bool:
    if method.package == test_id.package and method.class_name == test_id.class_name:
        return True
    return bool(_TEST_CLASS_RE.search(method.simple_class_name))


def helper_methods(test_id: MethodId, graph: CodeGraph, depth: int = HELPER_DEPTH) -> list[MethodId]:
    """Test-class callees of ``test_id`` reachable within ``depth`` calls, BFS order."""
    seen = {test_id}
    found: list[MethodId] = []
    frontier = deque([(test_id, 0)])
    while frontier:
        current, d = frontier.popleft()
        if d >= depth:
            continue
        for callee in graph.callees_of(current):
            if callee in seen or not _is_test_class(callee, test_id):
                continue
            seen.add(callee)
            found.append(callee)
            frontier.append((callee, d + 1))
    return found


def preprocess_test(
    test_body: str,
    failing_line: int,
    test_id: MethodId,
    graph: CodeGraph | None,
    start_line: int | None = None,
) -> tuple[str, list[tuple[MethodId, str]]]:
    """Cut the test after ``failing_line`` and collect helper test-method bodies.

    ``failing_line`` is a source line number; ``start_line`` is the source line
    of the first line of ``test_body`` (taken from the graph node when omitted,
    else 1). The failing line itself is kept. Unclosed braces in the kept prefix
    get closers appended at their opening line's indentation.
    """
    lines = test_body.replace("\r\n", "\n").rstrip("\n").split("\n")
    in_graph = graph is not None and test_id in graph
    if start_line is None:
        node_start = graph.node(test_id).start_line if in_graph else None
        start_line = node_start if node_start is not None else 1
    last_line = start_line + len(lines) - 1
    if not start_line <= failing_line <= last_line:
        raise FailingLineOutOfRange(
            f"failing line {failing_line} outside test span {start_line}-{last_line} of {test_id}"
        )
    kept = lines[: failing_line - start_line + 1]
    pruned = "\n".join(kept + _closers(kept))

    helpers: list[tuple[MethodId, str]] = []
    if in_graph:
        helpers = [(m, graph.node(m).body) for m in helper_methods(test_id, graph)]
    elif graph is not None:
        warnings.warn(f"{test_id} not in call graph; helper extraction skipped", TestNotInGraph, stacklevel=2)
    return pruned, helpers


def build_failure_context(
    test_id: MethodId,
    raw_trace: str,
    test_body: str,
    project_prefixes: list[str],
    graph: CodeGraph | None = None,
    start_line: int | None = None,
) -> FailureContext:
    """Run both pruning chains for one failing test."""
    if not test_body or not test_body.strip():
        raise PreconditionError(f"empty test code for {test_id}")
    header, frames = preprocess_trace(raw_trace, project_prefixes)
    if start_line is None and graph is not None and test_id in graph:
        start_line = graph.node(test_id).start_line
    n_lines = len(test_body.replace("\r\n", "\n").rstrip("\n").split("\n"))
    span = (start_line or 1, (start_line or 1) + n_lines - 1)
    line = failing_line_for(test_id, frames, span)
    if line is None or not span[0] <= line <= span[1]:
        log.warning("no failing line for %s inside its span; keeping the whole test", test_id)
        line = span[1]
    pruned, helpers = preprocess_test(test_body, line, test_id, graph, start_line=span[0])
    return FailureContext(test_id, frames, header, pruned, helpers)


def with_reason(ctx: FailureContext, reason: str) -> FailureContext:
    return replace(ctx, failure_reason=reason)
