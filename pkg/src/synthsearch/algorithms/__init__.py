"""Multi-step search algorithms, policy transforms, budgets and tracing."""

from .breadth_first import breadth_first
from .budget import SearchBudget
from .mcts import MctsConfig, mcts
from .metrics import CheckpointRow, metrics_over_time
from .policy import PolicyTransform, transform_policy
from .retro_star import RetroStarConfig, retro_star
from .sweep import SweepResult, sweep
from .trace import EventKind, FirstSolution, SearchTrace, TraceEvent

__all__ = [
    "CheckpointRow",
    "EventKind",
    "FirstSolution",
    "MctsConfig",
    "PolicyTransform",
    "RetroStarConfig",
    "SearchBudget",
    "SearchTrace",
    "SweepResult",
    "TraceEvent",
    "breadth_first",
    "mcts",
    "metrics_over_time",
    "retro_star",
    "sweep",
    "transform_policy",
]
