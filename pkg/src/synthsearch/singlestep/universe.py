"""Synthetic reaction universe: a desk-scale, fully known search environment.

Molecules are generated bottom-up in topological layers, so the backward
reaction relation is acyclic by construction and exact ground truth
(solvability, minimum route size, a route-count bound) is computable by
dynamic programming.  Serves as both a backward model and a forward oracle
for tests and benchmarks where a neural model would otherwise be required.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from ..smiles import Molecule, MoleculeSet
from .base import BackwardModel, ForwardOracle, InvalidConfig, RawPrediction

# Molecule names are spelled with single-letter organic-subset atoms only,
# so every generated id is already in normal form.
_ALPHABET = "CNOS"

# Probability that a reactant is drawn from the immediately preceding layer
# rather than uniformly from all earlier molecules.  Deep enough that
# multi-step targets exist, shallow enough that minimum routes stay trees
# without repeated intermediates.
_RECENT_LAYER_BIAS = 0.15


def _mol_id(index: int) -> str:
    digits = []
    index += 1  # bijective base-4 so that no id is empty
    while index > 0:
        index, rem = divmod(index - 1, len(_ALPHABET))
        digits.append(_ALPHABET[rem])
    return "".join(reversed(digits))


@dataclass(frozen=True)
class UniverseReaction:
    reactants: MoleculeSet
    probability: float
    distractor: bool = False


@dataclass(frozen=True)
class GroundTruth:
    solvable: bool
    min_route_reactions: Optional[int]
    route_count_bound: int


@dataclass(frozen=True)
class UniverseConfig:
    num_blocks: int
    num_nonblocks: int
    max_reactants: int = 3
    distractor_rate: float = 0.25
    max_depth: int = 5
    seed: int = 0
    num_targets: Optional[int] = None

    def validate(self) -> None:
        if self.num_blocks < 1:
            raise InvalidConfig("num_blocks must be >= 1")
        if self.num_nonblocks < 0:
            raise InvalidConfig("num_nonblocks must be >= 0")
        if not 1 <= self.max_reactants <= 4:
            raise InvalidConfig("max_reactants must be in [1, 4]")
        if not 0.0 <= self.distractor_rate < 1.0:
            raise InvalidConfig("distractor_rate must be in [0, 1)")
        if self.max_depth < 1:
            raise InvalidConfig("max_depth must be >= 1")
        if self.num_targets is not None and self.num_targets < 1:
            raise InvalidConfig("num_targets must be >= 1 when set")


@dataclass
class SyntheticUniverse:
    building_blocks: frozenset[str]
    reactions: dict[str, list[UniverseReaction]]  # ranked by descending probability
    targets: list[str]
    ground_truth: dict[str, GroundTruth]
    seed: int
    config: Optional[UniverseConfig] = None
    dead_ends: frozenset[str] = field(default_factory=frozenset)

    def molecules(self) -> set[str]:
        mols = set(self.building_blocks) | set(self.dead_ends) | set(self.reactions)
        for rxns in self.reactions.values():
            for r in rxns:
                mols.update(r.reactants)
        return mols

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "config": asdict(self.config) if self.config else None,
            "building_blocks": sorted(self.building_blocks),
            "dead_ends": sorted(self.dead_ends),
            "targets": list(self.targets),
            "reactions": {
                product: [
                    {
                        "reactants": list(r.reactants),
                        "probability": r.probability,
                        "distractor": r.distractor,
                    }
                    for r in rxns
                ]
                for product, rxns in sorted(self.reactions.items())
            },
            "ground_truth": {
                mol: asdict(gt) for mol, gt in sorted(self.ground_truth.items())
            },
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SyntheticUniverse":
        return cls(
            building_blocks=frozenset(data["building_blocks"]),
            dead_ends=frozenset(data.get("dead_ends", [])),
            reactions={
                product: [
                    UniverseReaction(
                        MoleculeSet.from_ids(r["reactants"]),
                        r["probability"],
                        r.get("distractor", False),
                    )
                    for r in rxns
                ]
                for product, rxns in data["reactions"].items()
            },
            targets=list(data["targets"]),
            ground_truth={
                mol: GroundTruth(**gt) for mol, gt in data["ground_truth"].items()
            },
            seed=data["seed"],
            config=UniverseConfig(**data["config"]) if data.get("config") else None,
        )

    def digest(self) -> str:
        payload = json.dumps(self.to_json_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=1))

    @classmethod
    def load(cls, path: str | Path) -> "SyntheticUniverse":
        return cls.from_json_dict(json.loads(Path(path).read_text()))

    def export_inventory(self, path: str | Path, header: Optional[str] = None) -> None:
        lines = [f"# {header}\n"] if header else []
        lines += [f"{m}\n" for m in sorted(self.building_blocks)]
        Path(path).write_text("".join(lines))

    def export_targets(self, path: str | Path, header: Optional[str] = None) -> None:
        lines = [f"# {header}\n"] if header else []
        lines += [f"{t}\n" for t in self.targets]
        Path(path).write_text("".join(lines))

    def export_model_table(self, path: str | Path, true_only: bool = False,
                           header: Optional[str] = None) -> None:
        """Write the reaction table as a file-model / adapter TSV."""
        lines = [f"# {header}\n"] if header else []
        for product in sorted(self.reactions):
            for r in self.reactions[product]:
                if true_only and r.distractor:
                    continue
                lines.append(f"{product}\t{'.'.join(r.reactants)}\t{r.probability}\n")
        Path(path).write_text("".join(lines))

    def export_eval_dataset(self, path: str | Path, header: Optional[str] = None) -> int:
        """Write product<TAB>reactants rows from the top true reaction of each
        solvable target; returns the number of rows."""
        rows = [f"# {header}\n"] if header else []
        count = 0
        for target in self.targets:
            for r in self.reactions.get(target, []):
                if not r.distractor:
                    rows.append(f"{target}\t{'.'.join(r.reactants)}\n")
                    count += 1
                    break
        Path(path).write_text("".join(rows))
        return count


def generate_universe(config: UniverseConfig) -> SyntheticUniverse:
    """Build a random universe; deterministic for a given config and seed."""
    config.validate()
    rng = random.Random(config.seed)
    next_index = 0

    def fresh() -> str:
        nonlocal next_index
        mol = _mol_id(next_index)
        next_index += 1
        return mol

    blocks = [fresh() for _ in range(config.num_blocks)]
    layers: list[list[str]] = [blocks]
    reactions: dict[str, list[UniverseReaction]] = {}
    dead_ends: list[str] = []
    nonblocks: list[str] = []

    for j in range(config.num_nonblocks):
        layer = 1 + j * config.max_depth // max(config.num_nonblocks, 1)
        while len(layers) <= layer:
            layers.append([])
        mol = fresh()
        nonblocks.append(mol)
        eligible = [m for l in layers[:layer] for m in l]
        # Bias toward the previous layer so deep targets actually exist;
        # otherwise building blocks dominate and min routes collapse to 1-2.
        recent = layers[layer - 1] or eligible
        rxns: list[UniverseReaction] = []
        num_true = rng.choices((1, 2, 3), weights=(0.6, 0.3, 0.1))[0]
        for _ in range(num_true):
            width = rng.randint(1, config.max_reactants)
            reactants = [
                rng.choice(recent if rng.random() < _RECENT_LAYER_BIAS else eligible)
                for _ in range(width)
            ]
            rxns.append(
                UniverseReaction(
                    MoleculeSet.from_ids(reactants),
                    round(rng.uniform(0.05, 0.95), 6),
                )
            )
        while rng.random() < config.distractor_rate:
            dead = fresh()
            dead_ends.append(dead)
            width = rng.randint(1, config.max_reactants)
            reactants = [dead] + [rng.choice(eligible) for _ in range(width - 1)]
            rxns.append(
                UniverseReaction(
                    MoleculeSet.from_ids(reactants),
                    round(rng.uniform(0.05, 0.95), 6),
                    distractor=True,
                )
            )
        # Ranked list; ties keep insertion order for determinism.
        rxns.sort(key=lambda r: -r.probability)
        reactions[mol] = rxns
        layers[layer].append(mol)

    ground_truth, min_choice = _compute_ground_truth(blocks, nonblocks, dead_ends, reactions)

    # Benchmark targets are drawn from molecules whose minimum synthesis is a
    # simple tree (no intermediate used twice); for those the tree-DP minimum
    # and the distinct-reaction count of a minimal route coincide.
    solvable_targets = [
        m
        for m in nonblocks
        if ground_truth[m].solvable and _min_tree_is_simple(m, min_choice)
    ]
    if nonblocks:
        candidates = solvable_targets + dead_ends
    else:
        candidates = list(blocks)
    if config.num_targets is None or config.num_targets >= len(candidates):
        targets = list(candidates)
    else:
        # Stratified pick: roughly two solvable targets per dead end, and half
        # of the solvable picks taken from multi-step syntheses so benchmark
        # target sets are not dominated by one-step disconnections.  Extremely
        # deep targets (minimum tree > 7 reactions) are left to random draw;
        # their minimum trees start reusing intermediates, which makes the
        # tree-DP ground truth diverge from distinct-reaction route sizes.
        n_dead = min(len(dead_ends), config.num_targets // 3)
        n_solv = min(len(solvable_targets), config.num_targets - n_dead)
        multi_step = sorted(
            (
                m
                for m in solvable_targets
                if 2 <= (ground_truth[m].min_route_reactions or 0) <= 7
            ),
            key=lambda m: (-(ground_truth[m].min_route_reactions or 0), m),
        )
        deep = multi_step[: n_solv // 2]
        rest = [m for m in solvable_targets if m not in deep]
        targets = deep + rng.sample(rest, n_solv - len(deep)) + rng.sample(dead_ends, n_dead)

    return SyntheticUniverse(
        building_blocks=frozenset(blocks),
        reactions=reactions,
        targets=targets,
        ground_truth=ground_truth,
        seed=config.seed,
        config=config,
        dead_ends=frozenset(dead_ends),
    )


_COUNT_CAP = 10**9


def _compute_ground_truth(
    blocks: list[str],
    nonblocks: list[str],
    dead_ends: list[str],
    reactions: dict[str, list[UniverseReaction]],
) -> tuple[dict[str, GroundTruth], dict[str, UniverseReaction]]:
    """Exhaustive DP over the acyclic relation, in generation order.

    min_route_reactions counts a route as a tree (shared sub-syntheses are
    counted per use); route_count_bound is an upper bound capped at 1e9.
    Also returns the argmin reaction per molecule for tree reconstruction.
    """
    gt: dict[str, GroundTruth] = {}
    min_choice: dict[str, UniverseReaction] = {}
    for b in blocks:
        gt[b] = GroundTruth(True, 0, 1)
    for d in dead_ends:
        gt[d] = GroundTruth(False, None, 0)
    for mol in nonblocks:
        best: Optional[int] = None
        count = 0
        for r in reactions[mol]:
            parts = [gt[q] for q in r.reactants]
            if not all(p.solvable for p in parts):
                continue
            size = 1 + sum(p.min_route_reactions for p in parts)  # type: ignore[misc]
            if best is None or size < best:
                best = size
                min_choice[mol] = r
            prod = 1
            for p in parts:
                prod = min(prod * p.route_count_bound, _COUNT_CAP)
            count = min(count + prod, _COUNT_CAP)
        gt[mol] = GroundTruth(best is not None, best, count)
    return gt, min_choice


def _min_tree_is_simple(target: str, min_choice: dict[str, UniverseReaction]) -> bool:
    """True when the DP argmin tree uses no intermediate more than once."""
    seen: set[str] = set()
    stack = [target]
    while stack:
        mol = stack.pop()
        r = min_choice.get(mol)
        if r is None:  # building block
            continue
        if mol in seen:
            return False
        seen.add(mol)
        stack.extend(r.reactants)
    return True


class UniverseModel(BackwardModel):
    """Backward model reading straight from a universe's reaction table."""

    def __init__(self, universe: SyntheticUniverse, true_only: bool = False) -> None:
        self.universe = universe
        self.true_only = true_only
        self.name = "universe-true" if true_only else "universe"

    def query(self, product: Molecule, num_results: int) -> list[RawPrediction]:
        rxns = self.universe.reactions.get(product.id, [])
        if self.true_only:
            rxns = [r for r in rxns if not r.distractor]
        return [RawPrediction(r.reactants.members, r.probability) for r in rxns[:num_results]]


class UniverseOracle(ForwardOracle):
    """Forward feasibility = membership among the universe's true reactions."""

    def __init__(self, universe: SyntheticUniverse) -> None:
        self._feasible: set[tuple[str, tuple[str, ...]]] = {
            (product, r.reactants.members)
            for product, rxns in universe.reactions.items()
            for r in rxns
            if not r.distractor
        }

    def feasible(self, reactants: MoleculeSet, product: Molecule) -> bool:
        return (product.id, reactants.members) in self._feasible
