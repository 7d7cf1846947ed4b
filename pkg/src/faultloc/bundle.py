"""On-disk fault bundles: coverage, call graph, trace and test source for one fault.

Layout (every key of ``bundle.json`` is optional except ``project_prefixes``)::

    bundle.json    {"fault_id": "Lang-5", "project_prefixes": ["org.apache.commons.lang3"],
                    "spectra": "spectra.csv", "matrix": "matrix.txt", "tests": "tests.csv",
                    "graph": "callgraph.json", "failing_test": "<test name or id>",
                    "stack_trace": "trace.txt",
                    "test_source": {"file": "FooTest.java", "start_line": 10, "end_line": 24}
                                   | {"body": "...", "start_line": 10},
                    "external_scores": "scores.json", "mock_script": "mock_script.json"}
"""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .codegraph import CodeGraph, load_graph
from .errors import InputError
from .spectra import CoverageMatrix, MethodId, parse_external_scores, parse_spectra

DEFAULT_FILES = {
    "spectra": "spectra.csv",
    "matrix": "matrix.txt",
    "tests": "tests.csv",
    "graph": "callgraph.json",
}


class BundleError(InputError):
    pass


@dataclass
class FaultBundle:
    fault_id: str
    root: Path
    paths: dict[str, Path]
    project_prefixes: list[str]
    matrix: CoverageMatrix
    graph: CodeGraph
    failing_test: MethodId
    raw_trace: str
    test_body: str
    test_start_line: int | None = None
    external_scores: dict[MethodId, float] | None = None
    mock_script: Path | None = None
    meta: dict[str, Any] = field(default_factory=dict)


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise BundleError(f"missing bundle file: {path}") from None
    except OSError as exc:
        raise BundleError(f"cannot read {path}: {exc}") from exc


def load_bundle(root: str | os.PathLike) -> FaultBundle:
    root = Path(root)
    if not root.is_dir():
        raise BundleError(f"bundle directory not found: {root}")
    meta_path = root / "bundle.json"
    meta: dict[str, Any] = {}
    if meta_path.exists():
        try:
            meta = json.loads(_read(meta_path))
        except json.JSONDecodeError as exc:
            raise BundleError(f"{meta_path}: invalid JSON: {exc}") from exc
    fault_id = meta.get("fault_id") or root.name
    prefixes = meta.get("project_prefixes")
    if not prefixes:
        raise BundleError(f"{meta_path}: 'project_prefixes' is required")

    paths = {k: root / meta.get(k, v) for k, v in DEFAULT_FILES.items()}
    try:
        matrix = parse_spectra(_read(paths["spectra"]), _read(paths["matrix"]), _read(paths["tests"]))
    except InputError as exc:
        if isinstance(exc, BundleError):
            raise
        raise BundleError(f"{paths['matrix'].parent}: coverage files: {exc}") from exc
    try:
        graph = load_graph(_read(paths["graph"]))
    except InputError as exc:
        if isinstance(exc, BundleError):
            raise
        raise BundleError(f"{paths['graph']}: {exc}") from exc

    failing_record = None
    if meta.get("failing_test"):
        name = meta["failing_test"]
        failing_test = MethodId.parse(name) if name.endswith(")") and "$" in name else MethodId.from_test_name(name)
        failing_record = next(
            (t for t in matrix.failing_tests if MethodId.from_test_name(t.name) == failing_test or t.name == name), None
        )
    else:
        failing_record = matrix.failing_tests[0]
        failing_test = MethodId.from_test_name(failing_record.name)

    if meta.get("stack_trace"):
        paths["stack_trace"] = root / meta["stack_trace"]
        raw_trace = _read(paths["stack_trace"])
    elif failing_record is not None and failing_record.stack_trace:
        raw_trace = failing_record.stack_trace
    else:
        raise BundleError(f"{root}: no stack trace for failing test {failing_test}")

    src = meta.get("test_source") or {}
    start_line = src.get("start_line")
    if "body" in src:
        test_body = src["body"]
    elif "file" in src:
        paths["test_source"] = root / src["file"]
        lines = _read(paths["test_source"]).splitlines()
        start = src.get("start_line", 1)
        end = src.get("end_line", len(lines))
        if not 1 <= start <= end <= len(lines):
            raise BundleError(f"{paths['test_source']}: span {start}-{end} outside file of {len(lines)} lines")
        test_body = "\n".join(lines[start - 1:end])
        start_line = start
    elif failing_test in graph and graph.node(failing_test).body:
        node = graph.node(failing_test)
        test_body, start_line = node.body, node.start_line
    else:
        raise BundleError(f"{root}: no source for failing test {failing_test} (add test_source or a graph body)")

    external = None
    if meta.get("external_scores"):
        paths["external_scores"] = root / meta["external_scores"]
        external = read_external_scores(paths["external_scores"])
    mock_script = root / meta["mock_script"] if meta.get("mock_script") else None
    if mock_script is None and (root / "mock_script.json").exists():
        mock_script = root / "mock_script.json"

    return FaultBundle(
        fault_id, root, paths, list(prefixes), matrix, graph, failing_test, raw_trace,
        test_body, start_line, external, mock_script, meta,
    )


def read_external_scores(path: Path) -> dict[MethodId, float]:
    try:
        return parse_external_scores(json.loads(_read(Path(path))))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise BundleError(f"{path}: bad external scores: {exc}") from exc


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write via a temp file in the same directory plus rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
