"""Single-step backward-model layer: interfaces, post-processing, caching,
file-backed and wire-protocol models, and the synthetic reaction universe."""

from .base import (
    BackwardModel,
    ForwardOracle,
    InvalidConfig,
    ModelUnavailable,
    Prediction,
    ProtocolError,
    RawPrediction,
)
from .cache import CachedModel, CallStats
from .file_model import FileBackedModel
from .postprocess import PostprocessResult, postprocess
from .universe import (
    GroundTruth,
    SyntheticUniverse,
    UniverseConfig,
    UniverseModel,
    UniverseOracle,
    UniverseReaction,
    generate_universe,
)
from .wire import WireModel

__all__ = [
    "BackwardModel",
    "CachedModel",
    "CallStats",
    "FileBackedModel",
    "ForwardOracle",
    "GroundTruth",
    "InvalidConfig",
    "ModelUnavailable",
    "PostprocessResult",
    "Prediction",
    "ProtocolError",
    "RawPrediction",
    "SyntheticUniverse",
    "UniverseConfig",
    "UniverseModel",
    "UniverseOracle",
    "UniverseReaction",
    "WireModel",
    "generate_universe",
    "postprocess",
]
