from __future__ import annotations

import shutil
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
LANG5 = FIXTURES / "lang5"

_criteria: dict[int, list[str]] = {}


@pytest.fixture
def lang5_dir(tmp_path) -> Path:
    """A private copy of the Lang-5 bundle (tests may write into it)."""
    dst = tmp_path / "lang5"
    shutil.copytree(LANG5, dst)
    return dst


@pytest.fixture(scope="session")
def synth_corpus(tmp_path_factory) -> Path:
    from faultloc.synthetic import write_corpus

    root = tmp_path_factory.mktemp("corpus")
    write_corpus(root, count=6, seed=7)
    return root


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for key, marks in report.user_properties:
        if key == "criteria":
            for n in marks:
                _criteria.setdefault(n, []).append(report.outcome)


def pytest_collection_modifyitems(items):
    for item in items:
        marks = [m.args[0] for m in item.iter_markers("criterion")]
        if marks:
            item.user_properties.append(("criteria", marks))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        outcomes = _criteria[n]
        if "failed" in outcomes:
            verdict = "FAIL"
        elif all(o == "skipped" for o in outcomes):
            verdict = "SKIP"
        else:
            verdict = "PASS"
        terminalreporter.write_line(f"criterion {n}: {verdict} ({len(outcomes)} check(s))")
