from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from typing import Any

from ..division import DEFAULT_COUNTER, DEFAULT_SAFETY_FACTOR, TokenBudget
from ..llm.toolloop import DEFAULT_MAX_TOOL_CALLS
from ..spectra import ORDER_STRATEGIES
from .templates import DEFAULT_TEMPLATES


@dataclass(frozen=True)
class PipelineConfig:
    enable_navigation: bool = True
    enable_division: bool = True
    enable_reflexion: bool = True
    order_strategy: str = "ochiai"
    reflexion_max_iters: int = 3
    max_tool_calls: int = DEFAULT_MAX_TOOL_CALLS
    max_tokens: int = 4096
    token_limit: int = 128_000
    budget_safety_factor: float = DEFAULT_SAFETY_FACTOR
    token_counter: str = DEFAULT_COUNTER
    include_bodies: bool = True
    temperature: float = 0.0
    prompts: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_TEMPLATES))

    def __post_init__(self):
        if self.order_strategy not in ORDER_STRATEGIES:
            raise ValueError(f"order_strategy must be one of {ORDER_STRATEGIES}, got {self.order_strategy!r}")
        if self.enable_reflexion and self.reflexion_max_iters < 1:
            raise ValueError("reflexion_max_iters must be >= 1 when reflexion is enabled")
        if self.temperature != 0.0:
            raise ValueError("pipeline runs use temperature 0")
        merged = dict(DEFAULT_TEMPLATES)
        merged.update(self.prompts)
        object.__setattr__(self, "prompts", merged)

    @property
    def budget(self) -> TokenBudget:
        return TokenBudget.from_config(self.token_limit, self.budget_safety_factor, self.token_counter)

    def template(self, role: str) -> str:
        return self.prompts[role]

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def replace(self, **changes: Any) -> "PipelineConfig":
        d = self.to_dict()
        d.update(changes)
        return PipelineConfig(**d)


FULL = PipelineConfig()
ABLATIONS = {
    "full": FULL,
    "w/o CodeNav": FULL.replace(enable_navigation=False),
    "w/o Division": FULL.replace(enable_division=False),
    "w/o Reflexion": FULL.replace(enable_reflexion=False),
}
ORDERINGS = {f"order={s}": FULL.replace(order_strategy=s) for s in ORDER_STRATEGIES}
