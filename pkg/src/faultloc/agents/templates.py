"""Versioned prompt templates (``$name`` placeholders, string.Template syntax)."""
from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path
from string import Template

DEFAULT_TEMPLATES = {
    "failure_reason": "failure_reason_v1",
    "failure_reason_repair": "failure_reason_repair_v1",
    "prioritize": "prioritize_v1",
    "prioritize_repair": "prioritize_repair_v1",
    "debugger": "debugger_v1",
    "debugger_nonav": "debugger_nonav_v1",
    "reviewer_critique": "reviewer_critique_v1",
    "reviewer_iterate": "reviewer_iterate_v1",
    "reviewer_finalize": "reviewer_finalize_v1",
    "finalize_repair": "finalize_repair_v1",
}


@lru_cache(maxsize=None)
def load_template(template_id: str) -> Template:
    """Packaged template by id, or a filesystem path to a custom one."""
    path = Path(template_id)
    if path.suffix == ".txt" and path.exists():
        return Template(path.read_text(encoding="utf-8"))
    res = resources.files("faultloc.agents") / "prompts" / f"{template_id}.txt"
    if not res.is_file():
        raise KeyError(f"unknown prompt template {template_id!r}")
    return Template(res.read_text(encoding="utf-8"))


def render(template_id: str, **values) -> str:
    return load_template(template_id).substitute({k: str(v) for k, v in values.items()})
