"""Coverage spectra ingestion and Ochiai suspiciousness.

Input is the GZoltar-style triple of files:

* spectra: one program element per line, ``pkg$Class#method(params)`` with an
  optional ``:lineno`` suffix, optional ``name`` header line;
* matrix: one row per test, ``0``/``1`` per element then ``+`` (pass) or ``-`` (fail);
* tests: ``name,outcome[,runtime[,stacktrace]]`` CSV, one record per test.

Statement-level rows are folded into one :class:`CoverageEntry` per method.
"""
from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import (
    DimensionMismatch,
    EmptyExternalScores,
    MalformedLine,
    MalformedMethodId,
    NoFailingTest,
)

PASS = "pass"
FAIL = "fail"

_OUTCOMES = {"pass": PASS, "passed": PASS, "fail": FAIL, "failed": FAIL, "failure": FAIL, "error": FAIL}


@dataclass(frozen=True, order=False)
class MethodId:
    package: str
    class_name: str
    method_name: str
    param_signature: str = ""

    def __post_init__(self):
        if not self.class_name or not self.method_name:
            raise MalformedMethodId(f"class and method name required: {self!r}")
        if " " in self.param_signature:
            object.__setattr__(self, "param_signature", self.param_signature.replace(" ", ""))

    @classmethod
    def parse(cls, text: str) -> "MethodId":
        text = text.strip()
        hash_at = text.find("#")
        if hash_at < 0 or not text.endswith(")"):
            raise MalformedMethodId(f"not a canonical method id: {text!r}")
        owner, member = text[:hash_at], text[hash_at + 1:]
        dollar = owner.find("$")
        if dollar < 0:
            raise MalformedMethodId(f"missing '$' between package and class: {text!r}")
        paren = member.find("(")
        if paren <= 0:
            raise MalformedMethodId(f"missing method name or parameter list: {text!r}")
        return cls(owner[:dollar], owner[dollar + 1:], member[:paren], member[paren + 1:-1])

    @classmethod
    def from_test_name(cls, name: str) -> "MethodId":
        """``org.pkg.FooTest#testBar`` (or ``::``/``.`` separated) to a no-arg MethodId."""
        name = name.strip()
        if "$" in name.split("#")[0] and name.endswith(")"):
            return cls.parse(name)
        for sep in ("#", "::"):
            if sep in name:
                fqn, method = name.split(sep, 1)
                break
        else:
            fqn, _, method = name.rpartition(".")
        method = method.split("(")[0]
        package, _, class_name = fqn.rpartition(".")
        return cls(package, class_name, method, "")

    @property
    def class_fqn(self) -> str:
        """JVM binary class name, e.g. ``org.pkg.Outer$Inner``."""
        return f"{self.package}.{self.class_name}" if self.package else self.class_name

    @property
    def simple_class_name(self) -> str:
        return self.class_name.split("$")[-1]

    def __str__(self) -> str:
        return f"{self.package}${self.class_name}#{self.method_name}({self.param_signature})"

    def __lt__(self, other: "MethodId") -> bool:
        return str(self) < str(other)

    def __le__(self, other: "MethodId") -> bool:
        return str(self) <= str(other)

    def __gt__(self, other: "MethodId") -> bool:
        return str(self) > str(other)

    def __ge__(self, other: "MethodId") -> bool:
        return str(self) >= str(other)


@dataclass(frozen=True)
class TestRecord:
    __test__ = False

    name: str
    outcome: str
    runtime: str | None = None
    stack_trace: str | None = None

    @property
    def failed(self) -> bool:
        return self.outcome == FAIL


@dataclass(frozen=True)
class CoverageEntry:
    method: MethodId
    statements: frozenset[int]
    covered_by: tuple[bool, ...]


@dataclass(frozen=True)
class CoverageMatrix:
    tests: tuple[TestRecord, ...]
    entries: tuple[CoverageEntry, ...]

    def __post_init__(self):
        if not any(t.failed for t in self.tests):
            raise NoFailingTest("coverage has no failing test; nothing to localize")
        n = len(self.tests)
        for e in self.entries:
            if len(e.covered_by) != n:
                raise DimensionMismatch(f"{e.method}: {len(e.covered_by)} bits for {n} tests")

    @property
    def methods(self) -> list[MethodId]:
        return [e.method for e in self.entries]

    @property
    def failing_tests(self) -> list[TestRecord]:
        return [t for t in self.tests if t.failed]

    def entry(self, method: MethodId) -> CoverageEntry:
        for e in self.entries:
            if e.method == method:
                return e
        raise KeyError(str(method))


@dataclass(frozen=True)
class SuspiciousnessScore:
    method: MethodId
    score: float
    e_f: int
    e_p: int
    n_f: int
    n_p: int


def _split_element(line: str) -> tuple[MethodId, int | None]:
    text = line.strip()
    close = text.rfind(")")
    lineno = None
    if close >= 0 and close < len(text) - 1:
        suffix = text[close + 1:]
        if not suffix.startswith(":") or not suffix[1:].isdigit():
            raise MalformedLine(f"bad spectra element: {line!r}")
        lineno = int(suffix[1:])
        text = text[: close + 1]
    try:
        return MethodId.parse(text), lineno
    except MalformedMethodId as exc:
        raise MalformedLine(str(exc)) from exc


def _parse_tests(tests_text: str) -> list[TestRecord]:
    rows = [r for r in csv.reader(io.StringIO(tests_text)) if r and any(c.strip() for c in r)]
    if rows and rows[0][0].strip().lower() == "name" and len(rows[0]) > 1 and rows[0][1].strip().lower() == "outcome":
        rows = rows[1:]
    records = []
    for row in rows:
        if len(row) < 2:
            raise MalformedLine(f"tests row needs name and outcome: {row!r}")
        outcome = _OUTCOMES.get(row[1].strip().lower())
        if outcome is None:
            raise MalformedLine(f"unknown test outcome {row[1]!r} for {row[0]!r}")
        runtime = row[2] if len(row) > 2 and row[2] != "" else None
        trace = ",".join(row[3:]) if len(row) > 3 else None
        if trace is not None:
            if "\n" not in trace and "\\n" in trace:
                trace = trace.replace("\\n", "\n").replace("\\t", "\t")
            trace = trace or None
        records.append(TestRecord(row[0].strip(), outcome, runtime, trace))
    return records


def parse_spectra(spectra_text: str, matrix_text: str, tests_text: str) -> CoverageMatrix:
    """Build a method-level :class:`CoverageMatrix` from the three GZoltar files."""
    lines = [ln for ln in spectra_text.splitlines() if ln.strip()]
    if lines and lines[0].strip() == "name":
        lines = lines[1:]
    elements = [_split_element(ln) for ln in lines]

    rows = []
    for lineno, raw in enumerate(matrix_text.splitlines(), 1):
        tokens = raw.split()
        if not tokens:
            continue
        bad = [t for t in tokens if t not in ("0", "1", "+", "-")]
        if bad or tokens[-1] not in ("+", "-") or any(t in ("+", "-") for t in tokens[:-1]):
            raise MalformedLine(f"matrix line {lineno}: {raw!r}")
        rows.append(tokens)

    tests = _parse_tests(tests_text)
    if len(tests) != len(rows):
        raise DimensionMismatch(f"{len(tests)} tests but {len(rows)} matrix rows")
    for i, tokens in enumerate(rows):
        if len(tokens) - 1 != len(elements):
            raise DimensionMismatch(
                f"matrix row {i + 1} has {len(tokens) - 1} columns for {len(elements)} spectra elements"
            )
        verdict = FAIL if tokens[-1] == "-" else PASS
        if verdict != tests[i].outcome:
            raise MalformedLine(f"test {tests[i].name!r}: matrix verdict {tokens[-1]!r} disagrees with tests file")

    order: list[MethodId] = []
    statements: dict[MethodId, set[int]] = {}
    cover: dict[MethodId, list[bool]] = {}
    for col, (method, lineno) in enumerate(elements):
        if method not in cover:
            order.append(method)
            statements[method] = set()
            cover[method] = [False] * len(rows)
        if lineno is not None:
            statements[method].add(lineno)
        bits = cover[method]
        for t, tokens in enumerate(rows):
            if tokens[col] == "1":
                bits[t] = True

    entries = tuple(
        CoverageEntry(m, frozenset(statements[m]), tuple(cover[m])) for m in order if any(cover[m])
    )
    return CoverageMatrix(tuple(tests), entries)


def serialize_spectra(matrix: CoverageMatrix) -> tuple[str, str, str]:
    """Inverse of :func:`parse_spectra` (statement-level, one line per statement)."""
    columns: list[tuple[str, tuple[bool, ...]]] = []
    for e in matrix.entries:
        if e.statements:
            columns.extend((f"{e.method}:{ln}", e.covered_by) for ln in sorted(e.statements))
        else:
            columns.append((str(e.method), e.covered_by))
    spectra = "name\n" + "".join(f"{c}\n" for c, _ in columns)
    matrix_rows = []
    for t, test in enumerate(matrix.tests):
        bits = " ".join("1" if bits[t] else "0" for _, bits in columns)
        verdict = "-" if test.failed else "+"
        matrix_rows.append(f"{bits} {verdict}".lstrip() + "\n")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "outcome", "runtime", "stacktrace"])
    for test in matrix.tests:
        w.writerow([test.name, test.outcome.upper(), test.runtime or "", test.stack_trace or ""])
    return spectra, "".join(matrix_rows), buf.getvalue()


def _mask(bits: Sequence[bool]) -> int:
    m = 0
    for i, b in enumerate(bits):
        if b:
            m |= 1 << i
    return m


def ochiai_formula(e_f: int, n_f: int, e_p: int) -> float:
    denom = (e_f + n_f) * (e_f + e_p)
    if e_f == 0 or denom == 0:
        return 0.0
    return e_f / math.sqrt(denom)


def ochiai(matrix: CoverageMatrix) -> list[SuspiciousnessScore]:
    """Ochiai score for every entry, sorted by score desc then MethodId."""
    fail_mask = _mask([t.failed for t in matrix.tests])
    pass_mask = _mask([not t.failed for t in matrix.tests])
    total_f = bin(fail_mask).count("1")
    total_p = bin(pass_mask).count("1")
    scores = []
    for e in matrix.entries:
        cov = _mask(e.covered_by)
        e_f = bin(cov & fail_mask).count("1")
        e_p = bin(cov & pass_mask).count("1")
        n_f, n_p = total_f - e_f, total_p - e_p
        scores.append(SuspiciousnessScore(e.method, ochiai_formula(e_f, n_f, e_p), e_f, e_p, n_f, n_p))
    scores.sort(key=lambda s: (-s.score, str(s.method)))
    return scores


ORDER_STRATEGIES = ("execution", "ochiai", "external")


def rank_by(
    matrix: CoverageMatrix,
    strategy: str,
    external_scores: Mapping[MethodId, float] | None = None,
) -> list[MethodId]:
    if strategy == "execution":
        return matrix.methods
    if strategy == "ochiai":
        return [s.method for s in ochiai(matrix)]
    if strategy == "external":
        methods = matrix.methods
        scored = [m for m in methods if external_scores and m in external_scores]
        if not scored:
            raise EmptyExternalScores("external scores cover none of the covered methods")
        scored.sort(key=lambda m: (-external_scores[m], str(m)))
        seen = set(scored)
        return scored + [m for m in methods if m not in seen]
    raise ValueError(f"unknown order strategy {strategy!r}; expected one of {ORDER_STRATEGIES}")


def parse_external_scores(data: Mapping[str, float] | Iterable) -> dict[MethodId, float]:
    """Accept ``{"id": score}`` or ``[{"method": id, "score": x}]``."""
    if isinstance(data, Mapping):
        items = data.items()
    else:
        items = ((d["method"], d["score"]) for d in data)
    return {MethodId.parse(k): float(v) for k, v in items}


_CANONICAL_RE = re.compile(r"[\w.]*\$[\w$]+#[\w$<>]+\([^()\s]*\)")


def find_method_ids(text: str) -> list[MethodId]:
    """All canonical method ids mentioned in free text, in order of appearance."""
    found = []
    for m in _CANONICAL_RE.finditer(text):
        try:
            found.append(MethodId.parse(m.group(0)))
        except MalformedMethodId:
            continue
    return found
