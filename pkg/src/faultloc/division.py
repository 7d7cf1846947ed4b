"""Token-budgeted, order-preserving division of the sorted covered-method list."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import EntryExceedsBudget, UnknownCounter
from .spectra import MethodId

DEFAULT_COUNTER = "chars4"
DEFAULT_SAFETY_FACTOR = 0.9

_COUNTERS: dict[str, Callable[[str], int]] = {
    "chars4": lambda text: math.ceil(len(text) / 4),
    "whitespace": lambda text: len(text.split()),
}


def register_counter(name: str, fn: Callable[[str], int]) -> None:
    """Plug in an exact tokenizer (e.g. a vendor BPE) under ``name``."""
    _COUNTERS[name] = fn


def available_counters() -> list[str]:
    return sorted(_COUNTERS)


def count_tokens(text: str, counter_id: str = DEFAULT_COUNTER) -> int:
    try:
        fn = _COUNTERS[counter_id]
    except KeyError:
        raise UnknownCounter(f"no token counter registered as {counter_id!r}") from None
    return fn(text)


@dataclass(frozen=True)
class TokenBudget:
    limit: int
    counter_id: str = DEFAULT_COUNTER

    def __post_init__(self):
        if self.limit <= 0:
            raise ValueError(f"token limit must be positive, got {self.limit}")

    @classmethod
    def from_config(cls, token_limit: int, safety_factor: float = DEFAULT_SAFETY_FACTOR,
                    counter_id: str = DEFAULT_COUNTER) -> "TokenBudget":
        return cls(max(1, math.floor(token_limit * safety_factor)), counter_id)


@dataclass(frozen=True)
class DivisionPlan:
    groups: tuple[tuple[MethodId, ...], ...]
    per_group_tokens: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.groups)

    def flatten(self) -> list[MethodId]:
        return [m for g in self.groups for m in g]


def ideal_group_count(total_tokens: int, limit: int) -> int:
    """ceil(total / limit): the group count when every group can be filled exactly."""
    return max(1, math.ceil(total_tokens / limit))


def divide(
    sorted_methods: Sequence[tuple[MethodId, str]],
    budget: TokenBudget,
    fixed_overhead_tokens: int = 0,
) -> DivisionPlan:
    """Greedy left-to-right packing; a new group starts when the next entry would overflow."""
    room = budget.limit - fixed_overhead_tokens
    groups: list[list[MethodId]] = []
    tokens: list[int] = []
    current: list[MethodId] = []
    used = 0
    for method, text in sorted_methods:
        n = count_tokens(text, budget.counter_id)
        if n > room:
            raise EntryExceedsBudget(
                f"{method}: {n} tokens + {fixed_overhead_tokens} overhead exceeds limit {budget.limit}"
            )
        if current and used + n > room:
            groups.append(current)
            tokens.append(used)
            current, used = [], 0
        current.append(method)
        used += n
    if current:
        groups.append(current)
        tokens.append(used)
    return DivisionPlan(tuple(tuple(g) for g in groups), tuple(tokens))


def single_group(sorted_methods: Sequence[tuple[MethodId, str]], counter_id: str = DEFAULT_COUNTER) -> DivisionPlan:
    """The no-division plan: everything in one group, no budget check."""
    methods = tuple(m for m, _ in sorted_methods)
    total = sum(count_tokens(t, counter_id) for _, t in sorted_methods)
    return DivisionPlan((methods,) if methods else (), (total,) if methods else ())
