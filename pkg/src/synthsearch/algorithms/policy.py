"""Probability transforms applied to single-step model outputs.

A transform re-weights the probabilities guiding the search without ever
changing which reactions exist: clip into [clip_lo, clip_hi], then apply a
temperature to the clipped values, then (for priors) normalize.  Reaction
costs use the pre-normalization value, -ln(clip(p)^(1/t)); this makes the
temperature a pure rescaling of costs, so algorithms driven only by cost
comparisons are unaffected by it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class PolicyTransform:
    clip_lo: float = 1e-10
    clip_hi: float = 0.999
    temperature: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.clip_lo <= self.clip_hi <= 1.0:
            raise ValueError("need 0 < clip_lo <= clip_hi <= 1")
        if self.temperature <= 0.0:
            raise ValueError("temperature must be positive")

    def clip(self, p: float) -> float:
        return min(max(p, self.clip_lo), self.clip_hi)

    def weights(self, probs: Sequence[float]) -> list[float]:
        """Clipped, temperature-scaled values before normalization."""
        inv_t = 1.0 / self.temperature
        return [self.clip(p) ** inv_t for p in probs]

    def transform(self, probs: Sequence[float]) -> list[float]:
        """Normalized weights, in input order; used as search priors."""
        w = self.weights(probs)
        total = sum(w)
        return [x / total for x in w]

    def costs(self, probs: Sequence[float]) -> list[float]:
        """Non-negative reaction costs, -ln of the unnormalized weights."""
        return [-math.log(x) for x in self.weights(probs)]


def transform_policy(probs: Sequence[float], transform: PolicyTransform) -> list[float]:
    """Functional alias for :meth:`PolicyTransform.transform`."""
    return transform.transform(probs)
