"""Single-step model evaluation: top-k accuracy, MRR, round-trip precision
and coverage, and per-call timing, all under the standardized
post-processing.

Inputs are normalized with atom maps stripped at ingestion, so the model
never sees mapping information; the raw-string constructor of
:class:`EvalSample` exists only so tests can demonstrate what the guard
prevents.
"""

from __future__ import annotations

import csv
import json
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .singlestep.base import BackwardModel, ForwardOracle, ModelUnavailable
from .singlestep.cache import CachedModel
from .smiles import Molecule, MoleculeSet, normalize

DEFAULT_KS = (1, 3, 5, 10, 50)


@dataclass(frozen=True)
class EvalSample:
    product: Molecule
    ground_truth_reactants: MoleculeSet

    @classmethod
    def from_raw(
        cls,
        product: str,
        reactants: str,
        canonicalizer: Optional[Callable[[str], str]] = None,
    ) -> "EvalSample":
        """The only supported ingestion path: normalizes and strips maps."""
        prod = normalize(product, canonicalizer)
        reacts = normalize(reactants, canonicalizer)
        return cls(prod, MoleculeSet(tuple(reacts.id.split("."))))


@dataclass(frozen=True)
class TimingSummary:
    mean: float
    median: float
    p95: float

    @classmethod
    def from_times(cls, times: Sequence[float]) -> "TimingSummary":
        if not times:
            return cls(0.0, 0.0, 0.0)
        return cls(
            float(statistics.fmean(times)),
            float(statistics.median(times)),
            float(np.percentile(list(times), 95)),
        )


@dataclass
class EvalReport:
    ks: tuple[int, ...]
    num_samples: int
    top_k_accuracy: dict[int, float]
    mrr: float
    timing: TimingSummary
    dropped_invalid: int
    dedup_removed: int
    model_name: str
    round_trip_precision: Optional[dict[int, float]] = None
    round_trip_coverage: Optional[dict[int, float]] = None
    incomplete: bool = False
    samples_evaluated: int = 0

    def to_json_dict(self) -> dict:
        return {
            "model": self.model_name,
            "num_samples": self.num_samples,
            "samples_evaluated": self.samples_evaluated,
            "incomplete": self.incomplete,
            "ks": list(self.ks),
            "top_k_accuracy": {str(k): v for k, v in self.top_k_accuracy.items()},
            "mrr": self.mrr,
            "round_trip_precision": (
                {str(k): v for k, v in self.round_trip_precision.items()}
                if self.round_trip_precision is not None
                else None
            ),
            "round_trip_coverage": (
                {str(k): v for k, v in self.round_trip_coverage.items()}
                if self.round_trip_coverage is not None
                else None
            ),
            "timing_s": {
                "mean": self.timing.mean,
                "median": self.timing.median,
                "p95": self.timing.p95,
            },
            "dropped_invalid": self.dropped_invalid,
            "dedup_removed": self.dedup_removed,
        }

    def write_json(self, path: str | Path, provenance: Optional[dict] = None) -> None:
        payload = self.to_json_dict()
        if provenance:
            payload["provenance"] = provenance
        Path(path).write_text(json.dumps(payload, indent=1))

    def write_csv(self, path: str | Path, provenance_comment: Optional[str] = None) -> None:
        with open(path, "w", newline="") as fh:
            if provenance_comment:
                fh.write(f"# {provenance_comment}\n")
            writer = csv.writer(fh)
            writer.writerow(["metric", "k", "value"])
            for k in self.ks:
                writer.writerow(["top_k_accuracy", k, self.top_k_accuracy[k]])
            writer.writerow(["mrr", "", self.mrr])
            if self.round_trip_precision is not None:
                for k in self.ks:
                    writer.writerow(["round_trip_precision", k, self.round_trip_precision[k]])
            if self.round_trip_coverage is not None:
                for k in self.ks:
                    writer.writerow(["round_trip_coverage", k, self.round_trip_coverage[k]])
            writer.writerow(["timing_mean_s", "", self.timing.mean])
            writer.writerow(["timing_median_s", "", self.timing.median])
            writer.writerow(["timing_p95_s", "", self.timing.p95])
            writer.writerow(["dropped_invalid", "", self.dropped_invalid])
            writer.writerow(["dedup_removed", "", self.dedup_removed])


def load_dataset(
    path: str | Path,
    canonicalizer: Optional[Callable[[str], str]] = None,
) -> list[EvalSample]:
    """Read a product<TAB>reactants TSV; every row normalized on load.

    Lines starting with '#' are provenance comments and skipped.
    """
    samples = []
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{path}:{line_no}: expected product<TAB>reactants")
        samples.append(EvalSample.from_raw(parts[0], parts[1], canonicalizer))
    return samples


def _rank_of_truth(predictions, truth: MoleculeSet) -> Optional[int]:
    for pred in predictions:
        if pred.reactants == truth:
            return pred.rank
    return None


def evaluate(
    model: BackwardModel,
    samples: Sequence[EvalSample],
    ks: Sequence[int] = DEFAULT_KS,
    n: int = 100,
    canonicalizer: Optional[Callable[[str], str]] = None,
) -> EvalReport:
    """Query ``n`` results per sample (batch size 1), post-process, then score.

    Top-k counts ground-truth ranks <= k; MRR adds 1/rank and 0 when the
    truth is absent from the post-processed list.  A model failure aborts
    early and flags the partial report as incomplete.
    """
    if not samples:
        raise ValueError("samples must be non-empty")
    ks = tuple(sorted(ks))
    cache = CachedModel(model, num_results=n, canonicalizer=canonicalizer)
    hits = {k: 0 for k in ks}
    mrr_total = 0.0
    evaluated = 0
    incomplete = False
    for sample in samples:
        try:
            predictions, _ = cache.query(sample.product)
        except ModelUnavailable:
            incomplete = True
            break
        rank = _rank_of_truth(predictions, sample.ground_truth_reactants)
        if rank is not None:
            mrr_total += 1.0 / rank
            for k in ks:
                if rank <= k:
                    hits[k] += 1
        evaluated += 1

    denom = max(evaluated, 1)
    return EvalReport(
        ks=ks,
        num_samples=len(samples),
        top_k_accuracy={k: hits[k] / denom for k in ks},
        mrr=mrr_total / denom,
        timing=TimingSummary.from_times(cache.stats.wall_time_per_call),
        dropped_invalid=cache.dropped_invalid,
        dedup_removed=cache.dedup_removed,
        model_name=model.name,
        incomplete=incomplete,
        samples_evaluated=evaluated,
    )


def round_trip(
    model: BackwardModel,
    oracle: ForwardOracle,
    samples: Sequence[EvalSample],
    ks: Sequence[int] = DEFAULT_KS,
    n: int = 100,
    canonicalizer: Optional[Callable[[str], str]] = None,
) -> tuple[dict[int, float], dict[int, float]]:
    """Round-trip (precision, coverage) at each k.

    precision_k averages, over samples, the feasible fraction among the
    first min(k, returned) predictions; a model that returns nothing scores
    0 on that sample.  coverage_k is the fraction of samples with at least
    one feasible prediction in the top k.
    """
    ks = tuple(sorted(ks))
    cache = CachedModel(model, num_results=n, canonicalizer=canonicalizer)
    precision_sums = {k: 0.0 for k in ks}
    coverage_hits = {k: 0 for k in ks}
    for sample in samples:
        predictions, _ = cache.query(sample.product)
        feasible = [oracle.feasible(p.reactants, sample.product) for p in predictions]
        for k in ks:
            top = feasible[: min(k, len(feasible))]
            if top:
                precision_sums[k] += sum(top) / len(top)
            if any(top):
                coverage_hits[k] += 1
    denom = max(len(samples), 1)
    precision = {k: precision_sums[k] / denom for k in ks}
    coverage = {k: coverage_hits[k] / denom for k in ks}
    return precision, coverage
