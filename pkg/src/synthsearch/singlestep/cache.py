"""Per-run model cache with call accounting and timing.

A cache instance is confined to one search or evaluation run; the cache key
is the normalized molecule id only, so ``num_results`` is fixed at
construction.  Cache hits consume no model-call budget and no wall time is
recorded for them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..smiles import Molecule
from .base import BackwardModel, Prediction
from .postprocess import postprocess


@dataclass
class CallStats:
    """Counters for model usage; total_queries == cache_hits + unique_calls."""

    total_queries: int = 0
    cache_hits: int = 0
    unique_calls: int = 0
    wall_time_per_call: list[float] = field(default_factory=list)


class CachedModel:
    """Wraps a :class:`BackwardModel` with post-processing and a query cache."""

    def __init__(
        self,
        model: BackwardModel,
        num_results: int,
        k_max: Optional[int] = None,
        canonicalizer: Optional[Callable[[str], str]] = None,
    ) -> None:
        self.model = model
        self.num_results = num_results
        self.k_max = num_results if k_max is None else k_max
        self.canonicalizer = canonicalizer
        self.stats = CallStats()
        self.dropped_invalid = 0
        self.dedup_removed = 0
        self._store: dict[str, list[Prediction]] = {}

    def is_cached(self, molecule: Molecule | str) -> bool:
        mol_id = molecule.id if isinstance(molecule, Molecule) else molecule
        return mol_id in self._store

    def query(self, molecule: Molecule | str) -> tuple[list[Prediction], bool]:
        """Return (post-processed predictions, from_cache)."""
        mol = molecule if isinstance(molecule, Molecule) else Molecule(id=molecule)
        self.stats.total_queries += 1
        cached = self._store.get(mol.id)
        if cached is not None:
            self.stats.cache_hits += 1
            return cached, True

        start = time.perf_counter()
        raw = self.model.query(mol, self.num_results)
        self.stats.wall_time_per_call.append(time.perf_counter() - start)
        self.stats.unique_calls += 1

        result = postprocess(raw, self.k_max, self.canonicalizer)
        self.dropped_invalid += result.dropped_invalid
        self.dedup_removed += result.dedup_removed
        self._store[mol.id] = result.predictions
        return result.predictions, False
