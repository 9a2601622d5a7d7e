"""Timestamped search event log enabling metrics-over-time."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional


class EventKind(str, Enum):
    MODEL_CALL = "ModelCall"
    CACHE_HIT = "CacheHit"
    EXPANSION = "Expansion"
    SOLUTION_FOUND = "SolutionFound"


@dataclass(frozen=True)
class TraceEvent:
    kind: EventKind
    wall_time: float
    unique_calls_so_far: int
    data: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FirstSolution:
    wall_time: float
    unique_calls: int


@dataclass
class SearchTrace:
    """Event log of one search run.

    Events are appended in time order; ``first_solution`` mirrors the
    earliest SolutionFound event.  The exhaustion flags record why the run
    ended when it ended before finding everything.
    """

    events: list[TraceEvent] = field(default_factory=list)
    first_solution: Optional[FirstSolution] = None
    frontier_exhausted: bool = False
    budget_exhausted: bool = False
    iterations: int = 0

    def record(self, kind: EventKind, wall_time: float, unique_calls: int, **data) -> None:
        self.events.append(TraceEvent(kind, wall_time, unique_calls, data))
        if kind is EventKind.SOLUTION_FOUND and self.first_solution is None:
            self.first_solution = FirstSolution(wall_time, unique_calls)

    def to_jsonl_lines(self) -> list[str]:
        lines = [
            json.dumps(
                {
                    "kind": e.kind.value,
                    "wall_time": e.wall_time,
                    "unique_calls": e.unique_calls_so_far,
                    **e.data,
                }
            )
            for e in self.events
        ]
        return lines

    def write_jsonl(self, path: str | Path, run_info: Optional[dict] = None) -> None:
        lines = []
        if run_info is not None:
            lines.append(json.dumps({"kind": "RunInfo", **run_info}))
        lines.extend(self.to_jsonl_lines())
        Path(path).write_text("".join(line + "\n" for line in lines))
