"""Run configurations for every command, validated with pydantic.

The same models serve as CLI config-file schemas and as service request
bodies; unknown keys are rejected and the validated config is serialized
into every output file for provenance.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelSpec(StrictModel):
    kind: Literal["file", "wire", "universe"]
    path: Optional[str] = None  # file: TSV table; universe: universe JSON
    endpoint: Optional[str] = None  # wire: "stdio:<command>" or "tcp:<host>:<port>"
    true_only: bool = False  # universe: serve only non-distractor reactions
    timeout_s: float = 30.0

    @model_validator(mode="after")
    def _check_source(self) -> "ModelSpec":
        if self.kind in ("file", "universe") and not self.path:
            raise ValueError(f"model kind {self.kind!r} requires 'path'")
        if self.kind == "wire" and not self.endpoint:
            raise ValueError("model kind 'wire' requires 'endpoint'")
        return self


class PolicySpec(StrictModel):
    clip_lo: float = 1e-10
    clip_hi: float = 0.999
    temperature: float = 1.0


class BudgetSpec(StrictModel):
    wall_time_s: Optional[float] = 600.0
    max_model_calls: Optional[int] = None
    max_iterations: Optional[int] = None
    stop_on_solve: bool = False


class AlgorithmSpec(StrictModel):
    name: Literal["retro-star", "mcts", "breadth-first"] = "retro-star"
    policy: PolicySpec = Field(default_factory=PolicySpec)
    num_results: int = 50
    max_depth_andor: int = 10  # retro-star
    bound_constant: float = 100.0  # mcts
    node_value_constant: float = 0.5  # mcts
    max_depth_reactions: int = 20  # mcts
    depth_cap: int = 10  # breadth-first


class EvalConfig(StrictModel):
    model: ModelSpec
    dataset: str
    ks: list[int] = Field(default_factory=lambda: [1, 3, 5, 10, 50])
    n: int = 100
    round_trip: bool = False  # needs a universe model for the forward oracle
    seed: int = 0


class SearchConfig(StrictModel):
    model: ModelSpec
    algorithm: AlgorithmSpec = Field(default_factory=AlgorithmSpec)
    budget: BudgetSpec = Field(default_factory=BudgetSpec)
    inventory: Optional[str] = None  # defaults to universe blocks for universe models
    targets: Optional[str] = None  # defaults to universe targets for universe models
    seed: int = 0
    workers: int = 1
    max_routes: int = 50
    export_dot: bool = False
    export_graph: bool = False


class PrepConfig(StrictModel):
    input: str
    max_reactants: int = 4
    min_product_atoms: int = 5
    side_product_occurrence: int = 1000
    max_product_atoms: int = 100
    max_atom_ratio: float = 20.0
    ratio: tuple[int, int, int] = (90, 5, 5)
    seed: int = 0
    pinned: dict[str, str] = Field(default_factory=dict)


class GenUniverseConfig(StrictModel):
    num_blocks: int
    num_nonblocks: int
    max_reactants: int = 3
    distractor_rate: float = 0.25
    max_depth: int = 5
    seed: int = 0
    num_targets: Optional[int] = None


class SweepConfig(StrictModel):
    model: ModelSpec
    algorithm: AlgorithmSpec = Field(default_factory=AlgorithmSpec)
    grid: dict[str, list] = Field(default_factory=dict)
    trial_budget: BudgetSpec = Field(default_factory=BudgetSpec)
    inventory: Optional[str] = None
    targets: Optional[str] = None
    seed: int = 0


class ReportConfig(StrictModel):
    summaries: list[str]  # search summary CSV paths
    percentiles: list[float] = Field(default_factory=lambda: [5.0, 25.0, 50.0, 75.0, 95.0])


COMMAND_CONFIGS = {
    "eval-single": EvalConfig,
    "search": SearchConfig,
    "prep": PrepConfig,
    "gen-universe": GenUniverseConfig,
    "sweep": SweepConfig,
    "report": ReportConfig,
}


def load_config(path: str | Path, command: str) -> StrictModel:
    """Parse a JSON or YAML config file into the command's config model."""
    path = Path(path)
    text = path.read_text()
    if path.suffix in (".yaml", ".yml"):
        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a mapping")
    return COMMAND_CONFIGS[command].model_validate(data)
