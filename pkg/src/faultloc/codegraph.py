"""Call-graph store backing the get_MethodBody / get_CallGraph tools.

Graphs are produced offline by external tooling and ingested as JSON::

    {"methods": [{"id": "<canonical id>", "file": "...", "start_line": n,
                  "end_line": n, "body": "..."}],
     "edges": [[caller_idx, callee_idx], ...]}

Lookups are exact on the canonical MethodId; nothing is fuzzy-matched, so a
tool answer can only ever name a method that is actually in the graph.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .errors import DanglingEdge, DuplicateMethod, MalformedGraph, MalformedMethodId, MethodNotFound
from .spectra import MethodId


@dataclass(frozen=True)
class MethodNode:
    id: MethodId
    file: str = ""
    start_line: int | None = None
    end_line: int | None = None
    body: str = ""


@dataclass(frozen=True)
class NeighborReport:
    method: MethodId
    callers: tuple[MethodId, ...]
    callees: tuple[MethodId, ...]

    def render(self) -> str:
        lines = [f"Call graph of {self.method}", "callers:"]
        lines += [f"  - {m}" for m in self.callers] or ["  (none)"]
        lines.append("callees:")
        lines += [f"  - {m}" for m in self.callees] or ["  (none)"]
        return "\n".join(lines)


@dataclass(frozen=True)
class MethodBody:
    method: MethodId
    file: str
    start_line: int | None
    end_line: int | None
    body: str

    def render(self) -> str:
        span = ""
        if self.start_line is not None:
            span = f":{self.start_line}-{self.end_line}"
        return f"// {self.method} ({self.file}{span})\n{self.body}"


@dataclass
class CodeGraph:
    methods: list[MethodNode] = field(default_factory=list)
    edges: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        self._index: dict[MethodId, int] = {}
        for i, node in enumerate(self.methods):
            if node.id in self._index:
                raise DuplicateMethod(f"method listed twice: {node.id}")
            self._index[node.id] = i
            if node.start_line is not None and node.end_line is not None:
                if node.start_line > node.end_line:
                    raise MalformedGraph(f"{node.id}: start_line {node.start_line} > end_line {node.end_line}")
                if node.body:
                    n_lines = len(node.body.rstrip("\n").split("\n"))
                    if n_lines != node.end_line - node.start_line + 1:
                        raise MalformedGraph(
                            f"{node.id}: body has {n_lines} lines but span is "
                            f"{node.start_line}-{node.end_line}"
                        )
        n = len(self.methods)
        self._callers: list[set[int]] = [set() for _ in range(n)]
        self._callees: list[set[int]] = [set() for _ in range(n)]
        for a, b in self.edges:
            if not (0 <= a < n and 0 <= b < n):
                raise DanglingEdge(f"edge [{a}, {b}] references a method index outside 0..{n - 1}")
            self._callees[a].add(b)
            self._callers[b].add(a)

    def __contains__(self, method: MethodId) -> bool:
        return method in self._index

    def __len__(self) -> int:
        return len(self.methods)

    @property
    def ids(self) -> list[MethodId]:
        return [m.id for m in self.methods]

    def node(self, method: MethodId) -> MethodNode:
        try:
            return self.methods[self._index[method]]
        except KeyError:
            raise MethodNotFound(f"method not in call graph: {method}") from None

    def callers_of(self, method: MethodId) -> list[MethodId]:
        i = self._lookup(method)
        return sorted(self.methods[j].id for j in self._callers[i])

    def callees_of(self, method: MethodId) -> list[MethodId]:
        i = self._lookup(method)
        return sorted(self.methods[j].id for j in self._callees[i])

    def _lookup(self, method: MethodId) -> int:
        try:
            return self._index[method]
        except KeyError:
            raise MethodNotFound(f"method not in call graph: {method}") from None


def load_graph(graph_text: str) -> CodeGraph:
    try:
        doc = json.loads(graph_text)
    except json.JSONDecodeError as exc:
        raise MalformedGraph(f"graph file is not JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedGraph("graph document must be a JSON object")
    raw_methods = doc.get("methods", [])
    raw_edges = doc.get("edges", [])
    if not isinstance(raw_methods, list) or not isinstance(raw_edges, list):
        raise MalformedGraph("'methods' and 'edges' must be arrays")

    nodes = []
    for i, m in enumerate(raw_methods):
        if not isinstance(m, dict) or "id" not in m:
            raise MalformedGraph(f"methods[{i}] lacks an 'id'")
        try:
            mid = MethodId.parse(m["id"])
        except (MalformedMethodId, AttributeError) as exc:
            raise MalformedGraph(f"methods[{i}]: {exc}") from exc
        body = m.get("body") or ""
        body = body.replace("\r\n", "\n").replace("\r", "\n")
        start, end = m.get("start_line"), m.get("end_line")
        for name, v in (("start_line", start), ("end_line", end)):
            if v is not None and (not isinstance(v, int) or isinstance(v, bool)):
                raise MalformedGraph(f"methods[{i}].{name} must be an integer")
        nodes.append(MethodNode(mid, str(m.get("file") or ""), start, end, body))

    edges = set()
    for e in raw_edges:
        if (
            not isinstance(e, (list, tuple))
            or len(e) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in e)
        ):
            raise MalformedGraph(f"edge must be a [caller, callee] index pair: {e!r}")
        edges.add((e[0], e[1]))
    return CodeGraph(nodes, frozenset(edges))


def graph_to_dict(graph: CodeGraph) -> dict[str, Any]:
    methods = []
    for node in graph.methods:
        d: dict[str, Any] = {"id": str(node.id), "file": node.file}
        if node.start_line is not None:
            d["start_line"] = node.start_line
        if node.end_line is not None:
            d["end_line"] = node.end_line
        d["body"] = node.body
        methods.append(d)
    return {"methods": methods, "edges": [list(e) for e in sorted(graph.edges)]}


def serialize_graph(graph: CodeGraph) -> str:
    return json.dumps(graph_to_dict(graph), indent=2) + "\n"


def get_method_body(graph: CodeGraph, id: MethodId) -> MethodBody:
    node = graph.node(id)
    return MethodBody(node.id, node.file, node.start_line, node.end_line, node.body)


def get_call_graph(graph: CodeGraph, id: MethodId) -> NeighborReport:
    return NeighborReport(id, tuple(graph.callers_of(id)), tuple(graph.callees_of(id)))
