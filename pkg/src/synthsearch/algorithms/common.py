"""Plumbing shared by the search algorithms: budget clock, cached queries
with trace events, and first-solution detection."""

from __future__ import annotations

import time
from ..andor import AndOrGraph, OrNode
from ..singlestep.base import Prediction
from ..singlestep.cache import CachedModel
from .budget import SearchBudget
from .trace import EventKind, SearchTrace


class RunState:
    """Per-run clock, trace and budget bookkeeping."""

    def __init__(self, cache: CachedModel, budget: SearchBudget, trace: SearchTrace) -> None:
        self.cache = cache
        self.budget = budget
        self.trace = trace
        self._start = time.monotonic()

    def elapsed(self) -> float:
        return time.monotonic() - self._start

    def out_of_time(self) -> bool:
        return (
            self.budget.wall_time_s is not None
            and self.elapsed() >= self.budget.wall_time_s
        )

    def out_of_iterations(self) -> bool:
        return (
            self.budget.max_iterations is not None
            and self.trace.iterations >= self.budget.max_iterations
        )

    def can_query(self, molecule: str) -> bool:
        """Whether querying ``molecule`` now would respect the call budget."""
        if self.budget.max_model_calls is None or self.cache.is_cached(molecule):
            return True
        return self.cache.stats.unique_calls < self.budget.max_model_calls

    def query(self, molecule: str) -> list[Prediction]:
        predictions, from_cache = self.cache.query(molecule)
        kind = EventKind.CACHE_HIT if from_cache else EventKind.MODEL_CALL
        self.trace.record(
            kind,
            self.elapsed(),
            self.cache.stats.unique_calls,
            molecule=molecule,
            num_predictions=len(predictions),
        )
        return predictions

    def record_expansion(self, node: OrNode, num_children: int) -> None:
        self.trace.record(
            EventKind.EXPANSION,
            self.elapsed(),
            self.cache.stats.unique_calls,
            molecule=node.molecule,
            num_children=num_children,
        )

    def note_if_solved(self, graph: AndOrGraph) -> bool:
        """Record the first root solution; returns True if solved (ever)."""
        if graph.root_node.solved:
            if self.trace.first_solution is None:
                self.trace.record(
                    EventKind.SOLUTION_FOUND,
                    self.elapsed(),
                    self.cache.stats.unique_calls,
                    molecule=graph.root,
                )
            return True
        return False
