"""Search budgets: wall-clock and model-call limits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class SearchBudget:
    """Limits for one search run; at least one limit must be set.

    ``max_model_calls`` counts unique (uncached) model calls only; cached
    expansions are free.  ``max_iterations`` bounds algorithm iterations and
    exists mainly so MCTS cannot spin forever on a fully cached graph.
    ``stop_on_solve`` ends the run at the first solution instead of running
    the budget down looking for more routes.
    """

    wall_time_s: Optional[float] = 600.0
    max_model_calls: Optional[int] = None
    max_iterations: Optional[int] = None
    stop_on_solve: bool = False

    def __post_init__(self) -> None:
        if self.wall_time_s is None and self.max_model_calls is None and self.max_iterations is None:
            raise ValueError("at least one budget limit must be set")
        if self.wall_time_s is not None and self.wall_time_s < 0:
            raise ValueError("wall_time_s must be >= 0")
        if self.max_model_calls is not None and self.max_model_calls < 0:
            raise ValueError("max_model_calls must be >= 0")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
