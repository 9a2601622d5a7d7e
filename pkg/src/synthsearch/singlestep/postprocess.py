"""Standardized post-processing of raw model outputs.

Invalid (non-normalizable) outputs are dropped, survivors are normalized,
duplicate reactant sets are removed keeping the first occurrence, ranks are
reassigned from 1 and the list is truncated.  Model order is otherwise
preserved; the same treatment is applied whether the predictions feed an
accuracy metric or a search run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from ..smiles import MalformedSmiles, MoleculeSet, normalize
from .base import Prediction, RawPrediction


@dataclass
class PostprocessResult:
    predictions: list[Prediction]
    dropped_invalid: int
    dedup_removed: int


def postprocess(
    raw: Sequence[RawPrediction],
    k_max: int,
    canonicalizer: Optional[Callable[[str], str]] = None,
) -> PostprocessResult:
    """Filter, normalize, deduplicate and re-rank a raw prediction list.

    ``raw`` must already be in model-asserted rank order.  Predictions with
    an empty reactant list or a probability outside (0, 1] count as invalid.
    """
    kept: list[Prediction] = []
    seen: set[MoleculeSet] = set()
    dropped_invalid = 0
    dedup_removed = 0
    for rp in raw:
        raw_output = ".".join(rp.reactants)
        if not rp.reactants or not (0.0 < rp.probability <= 1.0):
            dropped_invalid += 1
            continue
        try:
            mols = normalize(raw_output, canonicalizer)
        except MalformedSmiles:
            dropped_invalid += 1
            continue
        reactants = MoleculeSet(tuple(mols.id.split(".")))
        if reactants in seen:
            dedup_removed += 1
            continue
        seen.add(reactants)
        kept.append(
            Prediction(
                reactants=reactants,
                probability=rp.probability,
                rank=len(kept) + 1,
                raw_output=raw_output,
            )
        )
    return PostprocessResult(kept[:k_max], dropped_invalid, dedup_removed)
