"""Shared fixtures and mock models."""

from __future__ import annotations

import pytest

from synthsearch.inventory import Inventory
from synthsearch.singlestep import (
    BackwardModel,
    RawPrediction,
    SyntheticUniverse,
    UniverseReaction,
)
from synthsearch.smiles import Molecule, MoleculeSet


class LookupModel(BackwardModel):
    """Dict-backed model: product id -> list of (reactants tuple, probability)."""

    def __init__(self, table: dict[str, list[tuple[tuple[str, ...], float]]], name: str = "lookup"):
        self.table = table
        self.name = name
        self.calls = 0

    def query(self, product: Molecule, num_results: int) -> list[RawPrediction]:
        self.calls += 1
        return [RawPrediction(r, p) for r, p in self.table.get(product.id, [])][:num_results]


def make_universe(reactions: dict[str, list[tuple[list[str], float]]], blocks: list[str],
                  targets: list[str] | None = None) -> SyntheticUniverse:
    """Hand-built universe from a {product: [(reactants, prob)]} table."""
    return SyntheticUniverse(
        building_blocks=frozenset(blocks),
        reactions={
            product: sorted(
                (UniverseReaction(MoleculeSet.from_ids(r), p) for r, p in rxns),
                key=lambda x: -x.probability,
            )
            for product, rxns in reactions.items()
        },
        targets=targets or list(reactions),
        ground_truth={},
        seed=0,
    )


@pytest.fixture
def diamond():
    """M -> A+B and M -> A+C with purchasable B, C; A -> B+C.

    Molecule names: M=CCC, A=CN, B=CC, C=CO.
    """
    universe = make_universe(
        {
            "CCC": [(["CN", "CC"], 0.6), (["CN", "CO"], 0.4)],
            "CN": [(["CC", "CO"], 0.9)],
        },
        blocks=["CC", "CO"],
        targets=["CCC"],
    )
    inventory = Inventory.from_smiles(["CC", "CO"])
    return universe, inventory
