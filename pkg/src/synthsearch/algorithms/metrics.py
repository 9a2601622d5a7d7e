"""Solution-time and route-diversity series derived from a finished run.

Every reaction in the graph is stamped with the unique-call count and wall
time at which it entered; a route becomes available once all its reactions
exist.  The reported diversity is the greedy packing over the routes
available at each checkpoint with a running maximum applied, which makes the
series monotone even though the greedy approximation itself is not.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..andor import AndOrGraph, extract_routes, packing_number_greedy
from .trace import SearchTrace


@dataclass(frozen=True)
class CheckpointRow:
    wall_time: float
    unique_calls: int
    solved: bool
    packing_running_max: int


def metrics_over_time(
    graph: AndOrGraph,
    trace: SearchTrace,
    interval_calls: int = 1,
    max_routes: int = 50,
) -> list[CheckpointRow]:
    """Checkpoint series over both time axes (wall clock and unique calls)."""
    routes = extract_routes(graph, max_routes=max_routes)
    checkpoints: list[tuple[float, int]] = []
    last_calls: Optional[int] = None
    for event in trace.events:
        calls = event.unique_calls_so_far
        if last_calls is None or calls >= last_calls + interval_calls:
            checkpoints.append((event.wall_time, calls))
            last_calls = calls
    if trace.events:
        final = trace.events[-1]
        if not checkpoints or checkpoints[-1][1] != final.unique_calls_so_far:
            checkpoints.append((final.wall_time, final.unique_calls_so_far))
    if not checkpoints:
        checkpoints.append((0.0, 0))

    rows: list[CheckpointRow] = []
    running_max = 0
    for wall, calls in checkpoints:
        available = [r for r in routes if r.available_calls <= calls]
        running_max = max(running_max, packing_number_greedy(available))
        solved = (
            trace.first_solution is not None
            and trace.first_solution.unique_calls <= calls
        )
        rows.append(CheckpointRow(wall, calls, solved, running_max))
    return rows


def final_packing(graph: AndOrGraph, trace: SearchTrace, max_routes: int = 50) -> int:
    """Running-max packing at the end of the run."""
    rows = metrics_over_time(graph, trace, max_routes=max_routes)
    return rows[-1].packing_running_max if rows else 0
