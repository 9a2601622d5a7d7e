"""Model interfaces and prediction types shared across the engine."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

from ..smiles import Molecule, MoleculeSet


class ModelUnavailable(RuntimeError):
    """The backing model process or endpoint cannot be reached."""


class ProtocolError(RuntimeError):
    """The backing model sent a response that violates the wire contract."""


class InvalidConfig(ValueError):
    """A generator or model configuration is out of range."""


@dataclass(frozen=True)
class RawPrediction:
    """One model output before any post-processing.

    ``reactants`` are raw (possibly invalid, possibly atom-mapped) SMILES
    strings exactly as emitted by the model.
    """

    reactants: tuple[str, ...]
    probability: float


@dataclass(frozen=True)
class Prediction:
    """A post-processed backward disconnection of a product.

    ``rank`` is 1-based after validity filtering and deduplication;
    ``raw_output`` keeps the pre-normalization reactant string.
    """

    reactants: MoleculeSet
    probability: float
    rank: int
    raw_output: str


class BackwardModel(ABC):
    """Minimal interface a single-step backward model must provide.

    Implementations must be deterministic for a fixed instance and input;
    caching correctness depends on it.
    """

    name: str = "model"

    @abstractmethod
    def query(self, product: Molecule, num_results: int) -> list[RawPrediction]:
        """Return up to ``num_results`` predictions, best first."""


class ForwardOracle(ABC):
    """Judge of whether a reactant set plausibly yields a product."""

    @abstractmethod
    def feasible(self, reactants: MoleculeSet, product: Molecule) -> bool:
        ...
