"""Top-N evaluation and batch experiments over a corpus of fault bundles."""
from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

from .agents.config import PipelineConfig
from .agents.pipeline import localize
from .bundle import FaultBundle, load_bundle, write_atomic
from .errors import FaultLocError, InputError
from .llm.backends import Backend, MockBackend
from .llm.ranking import RankedList, ranked_list_from_json
from .spectra import MethodId

log = logging.getLogger(__name__)

TOP_N = (1, 3, 5, 10)


@dataclass(frozen=True)
class GroundTruth:
    fault_id: str
    faulty_methods: frozenset[MethodId]

    def __post_init__(self):
        if not self.faulty_methods:
            raise ValueError(f"{self.fault_id}: ground truth needs at least one faulty method")


def parse_truth(text: str) -> list[GroundTruth]:
    try:
        doc = json.loads(text)
        return [GroundTruth(d["fault_id"], frozenset(MethodId.parse(m) for m in d["faulty_methods"])) for d in doc]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad ground-truth document: {exc}") from exc


def serialize_truth(truth: Iterable[GroundTruth]) -> str:
    doc = [{"fault_id": t.fault_id, "faulty_methods": sorted(str(m) for m in t.faulty_methods)} for t in truth]
    return json.dumps(doc, indent=2) + "\n"


def load_truth(path: str | os.PathLike) -> list[GroundTruth]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read ground truth {path}: {exc}") from exc
    return parse_truth(text)


def parse_ranking_file(text: str) -> tuple[str, RankedList, dict[str, Any]]:
    try:
        doc = json.loads(text)
        return doc["fault_id"], ranked_list_from_json(doc["ranking"], doc.get("stage", "final")), doc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad ranking file: {exc}") from exc


def load_rankings(directory: str | os.PathLike) -> dict[str, RankedList]:
    """Every ranking file (``*.json`` with a 'ranking' key) under ``directory``."""
    out: dict[str, RankedList] = {}
    root = Path(directory)
    if not root.is_dir():
        raise InputError(f"rankings directory not found: {root}")
    for path in sorted(root.rglob("*.json")):
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            continue
        if not isinstance(doc, dict) or "ranking" not in doc or "fault_id" not in doc:
            continue
        fid, ranking, _ = parse_ranking_file(path.read_text(encoding="utf-8"))
        out[fid] = ranking
    return out


@dataclass(frozen=True)
class TopNReport:
    per_fault: dict[str, int | None]
    top_n_counts: dict[int, int]

    @property
    def fault_count(self) -> int:
        return len(self.per_fault)

    def to_dict(self) -> dict[str, Any]:
        return {
            "faults": self.fault_count,
            "top_n": {f"top_{n}": c for n, c in self.top_n_counts.items()},
            "per_fault": self.per_fault,
        }


def top_n(
    rankings: Mapping[str, RankedList], truth: Sequence[GroundTruth], ns: Sequence[int] = TOP_N
) -> TopNReport:
    per_fault: dict[str, int | None] = {}
    for t in truth:
        ranking = rankings.get(t.fault_id)
        if ranking is None:
            log.warning("no ranking for %s; counted as a miss", t.fault_id)
            per_fault[t.fault_id] = None
            continue
        ranks = [r for r in (ranking.rank_of(m) for m in t.faulty_methods) if r is not None]
        per_fault[t.fault_id] = min(ranks) if ranks else None
    counts = {n: sum(1 for r in per_fault.values() if r is not None and r <= n) for n in ns}
    return TopNReport(per_fault, counts)


def delta_percent(other: int, ours: int) -> float | None:
    """(other - ours) / ours * 100; negative when a variant finds fewer faults."""
    if ours == 0:
        return None
    return (other - ours) / ours * 100.0


@dataclass
class ExperimentRow:
    name: str
    config: PipelineConfig
    report: TopNReport
    deltas: dict[int, float | None]
    errors: dict[str, str] = field(default_factory=dict)


@dataclass
class ExperimentTable:
    rows: list[ExperimentRow]

    def to_dict(self) -> dict[str, Any]:
        return {
            "baseline": self.rows[0].name if self.rows else None,
            "rows": [
                {
                    "name": r.name,
                    "config": r.config.to_dict(),
                    **r.report.to_dict(),
                    "delta_percent": {f"top_{n}": (None if d is None else round(d, 2)) for n, d in r.deltas.items()},
                    "errors": r.errors,
                }
                for r in self.rows
            ],
        }

    def render(self) -> str:
        return render_table(self.rows)


def _cell(count: int, delta: float | None, is_baseline: bool) -> str:
    if is_baseline:
        return str(count)
    if delta is None:
        return f"{count} (n/a)"
    return f"{count} ({delta:.2f}%)"


def render_table(rows: Sequence[ExperimentRow], ns: Sequence[int] = TOP_N) -> str:
    header = ["Configuration"] + [f"Top-{n}" for n in ns]
    body = [[r.name] + [_cell(r.report.top_n_counts[n], r.deltas.get(n), i == 0) for n in ns] for i, r in enumerate(rows)]
    widths = [max(len(row[c]) for row in [header] + body) for c in range(len(header))]
    lines = []
    for row in [header] + body:
        lines.append("  ".join(cell.ljust(w) if c == 0 else cell.rjust(w) for c, (cell, w) in enumerate(zip(row, widths))))
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def render_report(report: TopNReport, name: str = "ranking", ns: Sequence[int] = TOP_N) -> str:
    row = ExperimentRow(name, PipelineConfig(), report, {})
    return render_table([row], ns)


BackendFactory = Callable[[FaultBundle, PipelineConfig], Backend]


def mock_backend_factory(bundle: FaultBundle, config: PipelineConfig) -> Backend:
    if bundle.mock_script is None:
        raise InputError(f"{bundle.fault_id}: bundle has no mock_script")
    return MockBackend.from_script_file(bundle.mock_script)


def discover_bundles(corpus_dir: str | os.PathLike) -> list[Path]:
    root = Path(corpus_dir)
    return sorted(p for p in root.iterdir() if p.is_dir() and (p / "bundle.json").exists())


def run_experiment(
    corpus_dir: str | os.PathLike,
    config_matrix: Mapping[str, PipelineConfig] | Sequence[PipelineConfig],
    backend: Backend | BackendFactory = mock_backend_factory,
    truth: Sequence[GroundTruth] | None = None,
    out_dir: str | os.PathLike | None = None,
    jobs: int = 1,
) -> ExperimentTable:
    """One Top-N report per config; the first config is the baseline for deltas.

    ``backend`` is either a shared backend or a factory called per (bundle, config).
    Per-fault errors are recorded on the row and the run continues.
    """
    if not isinstance(config_matrix, Mapping):
        config_matrix = {f"config{i}": c for i, c in enumerate(config_matrix)}
    root = Path(corpus_dir)
    if truth is None:
        truth = load_truth(root / "truth.json")
    bundles = [load_bundle(p) for p in discover_bundles(root)]
    factory: BackendFactory = backend if not hasattr(backend, "complete") else (lambda b, c: backend)  # type: ignore

    rows: list[ExperimentRow] = []
    for name, config in config_matrix.items():
        rankings: dict[str, RankedList] = {}
        errors: dict[str, str] = {}

        def run_one(b: FaultBundle):
            try:
                return b, localize(b, config, factory(b, config)), None
            except FaultLocError as exc:
                return b, None, exc

        with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
            results = list(pool.map(run_one, bundles))
        for b, result, exc in results:
            if exc is not None:
                log.warning("%s / %s failed: %s", name, b.fault_id, exc)
                errors[b.fault_id] = str(exc)
                continue
            rankings[b.fault_id] = result.ranking
            if out_dir is not None:
                safe = name.replace("/", "_").replace(" ", "_").replace("=", "_")
                write_atomic(Path(out_dir) / safe / f"{b.fault_id}.json", result.ranking_json())
        report = top_n(rankings, truth)
        rows.append(ExperimentRow(name, config, report, {}, errors))

    base = rows[0].report.top_n_counts if rows else {}
    for i, row in enumerate(rows):
        row.deltas = {n: (0.0 if i == 0 else delta_percent(c, base[n])) for n, c in row.report.top_n_counts.items()}
    return ExperimentTable(rows)
