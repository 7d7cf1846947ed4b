"""Ranked method lists and tolerant extraction of JSON rankings from model text."""
from __future__ import annotations

import json
import logging
import re
import warnings
from dataclasses import dataclass, replace
from typing import Any, Iterable

from ..errors import MalformedMethodId, UnparsableRanking
from ..spectra import MethodId

log = logging.getLogger(__name__)

REPAIR_PROMPT = (
    "Return only the JSON ranking, with no prose: a JSON array of objects "
    '{"method": "<method id exactly as given>", "rank": <1-based int>, "reasoning": "<why>"}'
)


class UnknownMethodInRanking(UserWarning):
    """A ranking named a method outside the analyzed set; the entry was dropped."""


@dataclass(frozen=True)
class RankedEntry:
    method: MethodId
    rank: int
    reasoning: str = ""
    fix: str | None = None


@dataclass(frozen=True)
class RankedList:
    entries: tuple[RankedEntry, ...]
    stage: str = "debugger"

    def __post_init__(self):
        for i, e in enumerate(self.entries, 1):
            if e.rank != i:
                raise ValueError(f"ordinal ranks must run 1..n; entry {i} has rank {e.rank}")
        if len({e.method for e in self.entries}) != len(self.entries):
            raise ValueError("a method appears twice in one ranking")

    @classmethod
    def from_methods(cls, items: Iterable[tuple[MethodId, str, str | None]], stage: str) -> "RankedList":
        return cls(tuple(RankedEntry(m, i, r, f) for i, (m, r, f) in enumerate(items, 1)), stage)

    @property
    def methods(self) -> list[MethodId]:
        return [e.method for e in self.entries]

    def rank_of(self, method: MethodId) -> int | None:
        for e in self.entries:
            if e.method == method:
                return e.rank
        return None

    def relabel(self, stage: str) -> "RankedList":
        return replace(self, stage=stage)

    def has_all_fixes(self) -> bool:
        return all(e.fix for e in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def to_json_entries(self) -> list[dict[str, Any]]:
        out = []
        for e in self.entries:
            d: dict[str, Any] = {"rank": e.rank, "method": str(e.method), "reasoning": e.reasoning}
            if e.fix is not None:
                d["fix"] = e.fix
            out.append(d)
        return out

    def render(self) -> str:
        return json.dumps(self.to_json_entries(), indent=2, ensure_ascii=False)


_FENCE_RE = re.compile(r"```(?:json|JSON)?\s*\n(.*?)```", re.S)
_METHOD_KEYS = ("method", "method_id", "id", "name", "signature")
_REASON_KEYS = ("reasoning", "reason", "explanation", "failure_reasoning")
_FIX_KEYS = ("fix", "possible_fix", "probable_fix", "patch")


def iter_json_values(text: str):
    """Yield every JSON array/object embedded in ``text``: fenced blocks first, then raw scan."""
    decoder = json.JSONDecoder()
    chunks = [m.group(1) for m in _FENCE_RE.finditer(text)] + [text]
    for chunk in chunks:
        i = 0
        while i < len(chunk):
            if chunk[i] in "[{":
                try:
                    value, end = decoder.raw_decode(chunk, i)
                except json.JSONDecodeError:
                    i += 1
                    continue
                yield value
                i = end
            else:
                i += 1


def _first(d: dict[str, Any], keys) -> Any:
    for k in keys:
        if k in d:
            return d[k]
    return None


def _ranking_items(value: Any) -> list | None:
    if isinstance(value, dict):
        for key in ("ranking", "fault_ranking", "final_ranking", "rankings", "methods"):
            if isinstance(value.get(key), list):
                return _ranking_items(value[key])
        return None
    if isinstance(value, list) and value:
        if all(isinstance(v, str) for v in value):
            return value
        if all(isinstance(v, dict) and _first(v, _METHOD_KEYS) is not None for v in value):
            return value
    if isinstance(value, list) and not value:
        return value
    return None


def extract_ranking_document(text: str) -> tuple[list, dict[str, Any]]:
    """Return (raw ranking items, enclosing object or {}) for the first ranking-shaped JSON."""
    for value in iter_json_values(text):
        items = _ranking_items(value)
        if items is not None:
            return items, value if isinstance(value, dict) else {}
    raise UnparsableRanking("no JSON ranking found in reply")


def normalize_items(items: list) -> list[tuple[str, int | None, str, str | None]]:
    out = []
    for item in items:
        if isinstance(item, str):
            out.append((item, None, "", None))
            continue
        rank = item.get("rank")
        rank = rank if isinstance(rank, int) and not isinstance(rank, bool) else None
        reason = _first(item, _REASON_KEYS)
        fix = _first(item, _FIX_KEYS)
        out.append((
            str(_first(item, _METHOD_KEYS)),
            rank,
            "" if reason is None else str(reason),
            None if fix in (None, "") else str(fix),
        ))
    if out and all(r is not None for _, r, _, _ in out):
        out.sort(key=lambda t: t[1])  # stable: equal ranks keep reply order
    return out


def resolve_methods(
    names: Iterable[str], allowed: Iterable[MethodId] | None, context: str = "ranking"
) -> list[MethodId | None]:
    """Map names to MethodIds; anything malformed or outside ``allowed`` becomes None (with a warning)."""
    allowed_set = set(allowed) if allowed is not None else None
    out: list[MethodId | None] = []
    for name in names:
        try:
            mid = MethodId.parse(name)
        except MalformedMethodId:
            mid = None
        if mid is None or (allowed_set is not None and mid not in allowed_set):
            msg = f"{context}: dropping {name!r}, not among the analyzed methods"
            log.warning(msg)
            warnings.warn(msg, UnknownMethodInRanking, stacklevel=3)
            out.append(None)
        else:
            out.append(mid)
    return out


def parse_structured_ranking(
    text: str, allowed: Iterable[MethodId] | None = None, stage: str = "debugger"
) -> RankedList:
    """Parse the first JSON ranking in ``text``; unknown methods dropped, ranks compacted."""
    items, _ = extract_ranking_document(text)
    normalized = normalize_items(items)
    resolved = resolve_methods([n for n, _, _, _ in normalized], allowed)
    seen: set[MethodId] = set()
    kept = []
    for mid, (_, _, reason, fix) in zip(resolved, normalized):
        if mid is None or mid in seen:
            continue
        seen.add(mid)
        kept.append((mid, reason, fix))
    return RankedList.from_methods(kept, stage)


def ranked_list_from_json(entries: list[dict[str, Any]], stage: str) -> RankedList:
    return RankedList(
        tuple(
            RankedEntry(MethodId.parse(d["method"]), int(d["rank"]), d.get("reasoning", ""), d.get("fix"))
            for d in entries
        ),
        stage,
    )
