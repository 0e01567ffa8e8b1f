from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field

from .approximant import Grid


def _env_int(name: str, default: int) -> int:
    try:
        return int(os.environ.get(name, default))
    except ValueError:
        return default


@dataclass(frozen=True)
class RunConfig:
    grid: Grid = field(default_factory=lambda: Grid(2, 2))
    k: int = 2
    rounds: int = 2
    size_budget: int = field(default_factory=lambda: _env_int("KATETOV_SIZE_BUDGET", 4096))
    search_budget: int = field(default_factory=lambda: _env_int("KATETOV_SEARCH_BUDGET", 2_000_000))
    seed_path: str | None = None
    output: str | None = None
    verbosity: int = 0
    jobs: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if self.k < 0 or self.rounds < 0:
            raise ValueError("k and rounds must be non-negative")
        if self.size_budget <= 0 or self.search_budget <= 0:
            raise ValueError("budgets must be positive")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")

    def require_thirds(self):
        if self.grid.q % 3:
            raise ValueError(f"granularity {self.grid.q} must be divisible by 3 here")

    def to_json(self) -> dict:
        out = asdict(self)
        out["grid"] = str(self.grid)
        # output location and verbosity do not change results
        out.pop("output")
        out.pop("verbosity")
        out.pop("jobs")
        return out
