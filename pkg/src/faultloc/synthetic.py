"""Seeded generator of Java-shaped fault bundles for offline experiments.

Each fault has one faulty method whose body carries a marker comment (see
:class:`~faultloc.llm.simulated.SimulatedModel`), a failing test covering it, a
set of passing tests that also touch it a random number of times (so its Ochiai
rank varies), a stack trace through it or one of its callees, and a call graph.
"""
from __future__ import annotations

import csv
import io
import json
import os
import random
from dataclasses import dataclass
from pathlib import Path

from .agents.config import FULL, PipelineConfig
from .agents.pipeline import localize
from .bundle import load_bundle, write_atomic
from .evalbench import GroundTruth, serialize_truth
from .llm.backends import MockBackend
from .llm.simulated import SimulatedModel
from .spectra import MethodId

FAULT_MARKER = "// FAULT: boundary handled off by one"

_CLASSES = ("Parser", "Lexer", "Buffer", "Registry", "Formatter", "Cache", "Resolver", "Encoder")
_VERBS = ("read", "parse", "emit", "lookup", "merge", "scan", "flush", "resolve", "format", "split")
_NOUNS = ("Token", "Entry", "Range", "Header", "Chunk", "Value", "Key", "Node")
_TYPES = ("int", "String", "long", "boolean")


@dataclass(frozen=True)
class SynthParams:
    methods: tuple[int, int] = (18, 36)
    body_lines: tuple[int, int] = (12, 36)
    passing_tests: tuple[int, int] = (8, 16)
    failing_coverage: float = 0.55
    passing_coverage: float = 0.3
    faulty_passing_hits: tuple[int, int] = (0, 6)
    callees: tuple[int, int] = (0, 3)


@dataclass
class SynthFault:
    fault_id: str
    package: str
    faulty: MethodId
    files: dict[str, str]

    def write(self, root: str | os.PathLike) -> Path:
        out = Path(root) / self.fault_id
        for name, text in self.files.items():
            write_atomic(out / name, text)
        return out


def _body(rng: random.Random, signature: str, n_lines: int, faulty: bool, calls: list[str]) -> str:
    lines = [f"    public {signature} {{"]
    stmts = []
    for i in range(max(1, n_lines - 2 - len(calls))):
        kind = rng.randrange(4)
        if kind == 0:
            stmts.append(f"        int v{i} = offset + {rng.randrange(2, 99)} * width;")
        elif kind == 1:
            stmts.append(f"        if (v{max(0, i - 1)} > limit) {{ limit = v{max(0, i - 1)}; }}")
        elif kind == 2:
            stmts.append(f"        buffer.append(\"{rng.choice(_NOUNS).lower()}\").append(width);")
        else:
            stmts.append(f"        count += state.size() - {rng.randrange(1, 9)};")
    for c in calls:
        stmts.insert(rng.randrange(len(stmts) + 1), f"        {c};")
    if faulty:
        stmts.insert(rng.randrange(len(stmts) + 1), f"        int end = limit - 1; {FAULT_MARKER}")
    lines += stmts
    lines.append("    }")
    return "\n".join(lines)


def make_fault(index: int, seed: int = 0, params: SynthParams = SynthParams()) -> SynthFault:
    rng = random.Random(f"{seed}:{index}")
    pkg = f"org.synth.p{index}"
    fault_id = f"Synth-{index}"

    n = rng.randint(*params.methods)
    ids: list[MethodId] = []
    seen: set[str] = set()
    while len(ids) < n:
        cls = rng.choice(_CLASSES)
        name = rng.choice(_VERBS) + rng.choice(_NOUNS)
        params_sig = ",".join(rng.choice(_TYPES) for _ in range(rng.randrange(3)))
        mid = MethodId(pkg, cls, name, params_sig)
        if str(mid) in seen:
            continue
        seen.add(str(mid))
        ids.append(mid)
    faulty = rng.randrange(n)

    callees = {i: rng.sample([j for j in range(n) if j != i], rng.randint(*params.callees)) for i in range(n)}
    thrower = faulty if rng.random() < 0.5 or not callees[faulty] else callees[faulty][0]

    # coverage: failing test touches the faulty method, its thrower and a random share of the rest
    fail_cov = {i for i in range(n) if rng.random() < params.failing_coverage} | {faulty, thrower}
    n_pass = rng.randint(*params.passing_tests)
    pass_cov = [{i for i in range(n) if rng.random() < params.passing_coverage} - {faulty} for _ in range(n_pass)]
    for t in rng.sample(range(n_pass), min(n_pass, rng.randint(*params.faulty_passing_hits))):
        pass_cov[t].add(faulty)

    # sources laid out per class file
    nodes = []
    line_of: dict[int, int] = {}
    next_line: dict[str, int] = {}
    for i, mid in enumerate(ids):
        calls = [f"{ids[j].method_name}({', '.join('0' for _ in ids[j].param_signature.split(',') if _)})" for j in callees[i]]
        sig_params = ", ".join(f"{t} a{k}" for k, t in enumerate(p for p in mid.param_signature.split(",") if p))
        body = _body(rng, f"int {mid.method_name}({sig_params})", rng.randint(*params.body_lines), i == faulty, calls)
        cls = mid.simple_class_name
        start = next_line.get(cls, 20)
        end = start + body.count("\n")
        next_line[cls] = end + 3
        nodes.append({"id": str(mid), "file": f"src/main/java/org/synth/p{index}/{cls}.java",
                      "start_line": start, "end_line": end, "body": body})
        line_of[i] = start + 1 + rng.randrange(max(1, body.count("\n") - 1))

    fail_name = f"testFault{index}"
    entry = faulty if rng.random() < 0.6 else rng.choice(sorted(fail_cov))
    test_lines = [
        "    @Test",
        f"    public void {fail_name}() {{",
        "        final Fixture f = Fixture.load(\"case-%d\");" % index,
        "        assertNotNull(f);",
        f"        assertEquals(f.expected(), subject.{ids[entry].method_name}(f.input()));",
        "        assertTrue(f.isClean());",
        "        f.close();",
        "    }",
    ]
    test_start = 40
    test_body = "\n".join(test_lines)
    test_mid = MethodId(pkg, "SynthTest", fail_name, "")
    nodes.append({"id": str(test_mid), "file": f"src/test/java/org/synth/p{index}/SynthTest.java",
                  "start_line": test_start, "end_line": test_start + len(test_lines) - 1, "body": test_body})
    test_idx = len(nodes) - 1
    edges = sorted({(i, j) for i in range(n) for j in callees[i]} | {(test_idx, entry), (test_idx, faulty)})

    # trace: thrower, faulty (if distinct), the test, then runner frames
    def frame(mid: MethodId, line: int) -> str:
        return f"\tat {mid.class_fqn}.{mid.method_name}({mid.simple_class_name}.java:{line})"

    exc = rng.choice(["java.lang.IllegalStateException: unexpected end of input",
                      "java.lang.ArrayIndexOutOfBoundsException: 7",
                      "junit.framework.AssertionFailedError: expected:<3> but was:<2>"])
    trace = [exc, frame(ids[thrower], line_of[thrower])]
    if thrower != faulty:
        trace.append(frame(ids[faulty], line_of[faulty]))
    trace.append(frame(test_mid, test_start + 4))
    trace += [
        "\tat sun.reflect.NativeMethodAccessorImpl.invoke0(Native Method)",
        "\tat java.lang.reflect.Method.invoke(Method.java:498)",
        "\tat junit.framework.TestCase.runTest(TestCase.java:176)",
        "\tat junit.framework.TestCase.runBare(TestCase.java:141)",
    ]
    trace_text = "\n".join(trace)

    # statement-level spectra: one to three lines per method
    columns: list[tuple[int, int]] = []
    for i, node in enumerate(nodes[:n]):
        for k in range(rng.randint(1, 3)):
            columns.append((i, node["start_line"] + 1 + k))
    tests = [(f"{pkg}.SynthTest#testCase{t}", "PASS", pass_cov[t]) for t in range(n_pass)]
    tests.insert(rng.randrange(len(tests) + 1), (f"{pkg}.SynthTest#{fail_name}", "FAIL", fail_cov))
    matrix_rows = []
    for _, outcome, cov in tests:
        bits = ["1" if i in cov else "0" for i, _ in columns]
        matrix_rows.append(" ".join(bits) + (" -" if outcome == "FAIL" else " +"))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "outcome", "runtime", "stacktrace"])
    for name, outcome, _ in tests:
        w.writerow([name, outcome, rng.randint(1, 40), trace_text if outcome == "FAIL" else ""])

    # a noisy stand-in for another technique's scores, for order=external
    external = {str(ids[i]): round(rng.random() + (0.6 if i == faulty and rng.random() < 0.7 else 0.0), 4)
                for i in sorted(fail_cov)}

    files = {
        "bundle.json": json.dumps({"fault_id": fault_id, "project_prefixes": [pkg],
                                   "external_scores": "external_scores.json"}, indent=2) + "\n",
        "external_scores.json": json.dumps(external, indent=2, sort_keys=True) + "\n",
        "spectra.csv": "name\n" + "".join(f"{ids[i]}:{ln}\n" for i, ln in columns),
        "matrix.txt": "\n".join(matrix_rows) + "\n",
        "tests.csv": buf.getvalue(),
        "callgraph.json": json.dumps({"methods": nodes, "edges": [list(e) for e in edges]}, indent=2) + "\n",
    }
    return SynthFault(fault_id, pkg, ids[faulty], files)


def record_mock_script(bundle_dir: str | os.PathLike, config: PipelineConfig = FULL,
                       model: SimulatedModel | None = None) -> dict:
    """Run the pipeline against ``model`` and freeze its replies as a sequential mock script."""
    bundle = load_bundle(bundle_dir)
    result = localize(bundle, config, MockBackend(responder=model or SimulatedModel()))
    steps = []
    for name in ("context", "debugger", "reviewer"):
        for request, response in result.transcripts[name].completions():
            latest = request.messages[-1]
            step: dict = {"reply": {"content": response.message.content}}
            if response.message.tool_calls:
                step["reply"]["tool_calls"] = [
                    {"id": tc.id, "name": tc.tool_name, "arguments": tc.args()} for tc in response.message.tool_calls
                ]
            if latest.role == "user":
                step["match"] = latest.content.splitlines()[0][:80]
            steps.append(step)
    return {"mode": "sequential", "steps": steps}


def write_corpus(root: str | os.PathLike, count: int = 6, seed: int = 0, params: SynthParams = SynthParams(),
                 record: bool = True) -> list[SynthFault]:
    """``count`` bundles under ``root`` plus ``truth.json``; with ``record``, each gets a mock_script.json."""
    root = Path(root)
    faults = [make_fault(i, seed, params) for i in range(1, count + 1)]
    for f in faults:
        out = f.write(root)
        if record:
            script = record_mock_script(out)
            write_atomic(out / "mock_script.json", json.dumps(script, indent=2) + "\n")
    write_atomic(root / "truth.json", serialize_truth(GroundTruth(f.fault_id, frozenset({f.faulty})) for f in faults))
    return faults
