"""Reaction-dataset cleaning, filtering and splitting.

A streaming, order-deterministic rule engine: rules run in a fixed order and
a reaction is attributed to the first rule that removes it, so the input
count always equals survivors plus the per-rule removal counts.  Thresholds
are configurable to fixture scale; the defaults are the production
constants.  Re-running the pipeline on its own survivor output removes
nothing.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

from .smiles import (
    MalformedReaction,
    MalformedSmiles,
    count_atoms,
    map_diagnostics,
    normalize,
    parse_reaction,
    strip_atom_maps,
)


class InvalidRatio(ValueError):
    pass


FOLD_NAMES = ("train", "valid", "test")

# Removal attribution, in pipeline order.  "external_filter" hosts an
# optional user-supplied predicate (e.g. a chemistry-toolkit template
# extraction check) run as the last rule before splitting.
RULES = (
    "malformed",
    "duplicate",
    "reactant_count",
    "no_main_product",
    "product_size",
    "atom_ratio",
    "product_is_reactant",
    "double_mapped",
    "unmapped",
    "no_reactants",
    "external_filter",
)


@dataclass
class RawReaction:
    reactants: list[str]
    agents: list[str]
    products: list[str]
    line_no: int

    def reaction_smiles(self) -> str:
        return ">".join(
            ".".join(part) for part in (self.reactants, self.agents, self.products)
        )

    def normalized_key(self) -> str:
        return ">".join(
            normalize(".".join(part)).id if part else ""
            for part in (self.reactants, self.agents, self.products)
        )


@dataclass(frozen=True)
class PrepThresholds:
    max_reactants: int = 4
    min_product_atoms: int = 5
    side_product_occurrence: int = 1000
    max_product_atoms: int = 100
    max_atom_ratio: float = 20.0


@dataclass
class PrepReport:
    input_count: int = 0
    removed: dict = field(default_factory=lambda: {rule: 0 for rule in RULES})
    survivors: int = 0
    fold_sizes: dict = field(default_factory=lambda: {name: 0 for name in FOLD_NAMES})

    def to_json_dict(self) -> dict:
        return {
            "input_count": self.input_count,
            "removed": dict(self.removed),
            "survivors": self.survivors,
            "fold_sizes": dict(self.fold_sizes),
        }

    def write_json(self, path: str | Path, provenance: Optional[dict] = None) -> None:
        payload = self.to_json_dict()
        if provenance:
            payload["provenance"] = provenance
        Path(path).write_text(json.dumps(payload, indent=1))


def parse_lines(lines: Iterable[str], report: PrepReport) -> list[RawReaction]:
    reactions = []
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        report.input_count += 1
        try:
            reactants, agents, products = parse_reaction(line)
            if not products or not reactants:
                raise MalformedReaction("missing reactants or products")
            for part in (*reactants, *agents, *products):
                normalize(part)  # tokenizability check
        except (MalformedReaction, MalformedSmiles):
            report.removed["malformed"] += 1
            continue
        reactions.append(RawReaction(list(reactants), list(agents), list(products), line_no))
    return reactions


def dedupe(reactions: Sequence[RawReaction], report: PrepReport) -> list[RawReaction]:
    """Drop duplicates by normalized full reaction string, keeping the first."""
    seen: set[str] = set()
    kept = []
    for rxn in reactions:
        key = rxn.normalized_key()
        if key in seen:
            report.removed["duplicate"] += 1
        else:
            seen.add(key)
            kept.append(rxn)
    return kept


def filter_structural(
    reactions: Sequence[RawReaction],
    report: PrepReport,
    thresholds: PrepThresholds = PrepThresholds(),
    rules: Sequence[str] = ("reactant_count", "product_size", "atom_ratio", "product_is_reactant"),
) -> list[RawReaction]:
    """Apply the size/shape rules in order.

    The product rules assume a resolved single main product; the full
    pipeline therefore runs ``reactant_count`` before main-product
    resolution and the remaining rules after it.
    """
    kept = []
    for rxn in reactions:
        verdict = None
        for rule in rules:
            if rule == "reactant_count":
                if len(rxn.reactants) > thresholds.max_reactants:
                    verdict = rule
            elif rule == "product_size":
                if any(count_atoms(p) > thresholds.max_product_atoms for p in rxn.products):
                    verdict = rule
            elif rule == "atom_ratio":
                reactant_atoms = sum(count_atoms(r) for r in rxn.reactants)
                product_atoms = sum(count_atoms(p) for p in rxn.products)
                if product_atoms and reactant_atoms / product_atoms > thresholds.max_atom_ratio:
                    verdict = rule
            elif rule == "product_is_reactant":
                products = {normalize(p).id for p in rxn.products}
                if any(normalize(r).id in products for r in rxn.reactants):
                    verdict = rule
            else:
                raise ValueError(f"unknown structural rule {rule!r}")
            if verdict:
                break
        if verdict:
            report.removed[verdict] += 1
        else:
            kept.append(rxn)
    return kept


def resolve_main_product(
    reactions: Sequence[RawReaction],
    report: PrepReport,
    thresholds: PrepThresholds = PrepThresholds(),
) -> list[RawReaction]:
    """Drop side products and keep reactions with exactly one main product.

    First pass counts product occurrences across the whole (deduplicated)
    dataset, counting products of multi-product reactions separately; a
    product is a side product when it has fewer than the minimum atoms or
    occurs at least the occurrence threshold many times.
    """
    occurrence: dict[str, int] = {}
    for rxn in reactions:
        for p in rxn.products:
            key = normalize(p).id
            occurrence[key] = occurrence.get(key, 0) + 1

    kept = []
    for rxn in reactions:
        main = [
            p
            for p in rxn.products
            if count_atoms(p) >= thresholds.min_product_atoms
            and occurrence[normalize(p).id] < thresholds.side_product_occurrence
        ]
        if len(main) == 1:
            kept.append(replace(rxn, products=main))
        else:
            report.removed["no_main_product"] += 1
    return kept


def refine_mappings(reactions: Sequence[RawReaction], report: PrepReport) -> list[RawReaction]:
    """Atom-map hygiene, applied after main-product resolution.

    Strips map numbers that appear on only one side, removes reactions with
    double-mapped atoms on either side or with no maps at all, then deletes
    reactants that share no map with the product (removing the reaction if
    none remain).
    """
    kept = []
    for rxn in reactions:
        diag = map_diagnostics(rxn.reaction_smiles())
        one_side = set(diag.one_side_only_maps)
        if one_side:
            rxn = replace(
                rxn,
                reactants=[strip_atom_maps(r, one_side) for r in rxn.reactants],
                products=[strip_atom_maps(p, one_side) for p in rxn.products],
            )
            diag = map_diagnostics(rxn.reaction_smiles())
        if diag.double_mapped:
            report.removed["double_mapped"] += 1
            continue
        if diag.unmapped:
            report.removed["unmapped"] += 1
            continue
        contributing = [
            r for r, keeps in zip(rxn.reactants, diag.contributing_reactants) if keeps
        ]
        if not contributing:
            report.removed["no_reactants"] += 1
            continue
        kept.append(replace(rxn, reactants=contributing))
    return kept


def split_folds(
    reactions: Sequence[RawReaction],
    ratio: tuple[int, int, int] = (90, 5, 5),
    seed: int = 0,
    pinned: Optional[dict[str, str]] = None,
) -> dict[str, list[RawReaction]]:
    """Split into train/valid/test with same-product groups kept together.

    Pinned products land in their requested fold; the remaining product
    groups are shuffled with the seed and dealt out to match the ratio over
    group counts to within one group.
    """
    if len(ratio) != 3 or any(r < 0 for r in ratio) or sum(ratio) == 0:
        raise InvalidRatio(f"bad ratio {ratio!r}")
    # Pins are matched against normalized product ids, same as the grouping.
    pinned = {normalize(k).id: v for k, v in (pinned or {}).items()}
    for fold in pinned.values():
        if fold not in FOLD_NAMES:
            raise InvalidRatio(f"pinned fold {fold!r} is not one of {FOLD_NAMES}")

    groups: dict[str, list[RawReaction]] = {}
    for rxn in reactions:
        key = normalize(rxn.products[0]).id
        groups.setdefault(key, []).append(rxn)

    total = sum(ratio)
    n_groups = len(groups)
    # Largest-remainder apportionment over group counts.
    quotas = [n_groups * r / total for r in ratio]
    counts = [int(q) for q in quotas]
    remainders = sorted(range(3), key=lambda i: quotas[i] - counts[i], reverse=True)
    for i in remainders[: n_groups - sum(counts)]:
        counts[i] += 1
    targets = dict(zip(FOLD_NAMES, counts))

    folds: dict[str, list[RawReaction]] = {name: [] for name in FOLD_NAMES}
    assigned: dict[str, str] = {}
    for product in groups:
        raw_pin = pinned.get(product)
        if raw_pin is not None:
            assigned[product] = raw_pin
            targets[raw_pin] = max(targets[raw_pin] - 1, 0)

    free = [p for p in groups if p not in assigned]
    random.Random(seed).shuffle(free)
    order = iter(free)
    for fold in FOLD_NAMES:
        for _ in range(targets[fold]):
            product = next(order, None)
            if product is None:
                break
            assigned[product] = fold
    for product in order:
        assigned[product] = "train"  # rounding leftovers

    for product, members in groups.items():
        folds[assigned[product]].extend(members)
    for fold in folds.values():
        fold.sort(key=lambda r: r.line_no)
    return folds


@dataclass
class PrepResult:
    folds: dict[str, list[RawReaction]]
    survivors: list[RawReaction]
    report: PrepReport


def run_pipeline(
    lines: Iterable[str],
    thresholds: PrepThresholds = PrepThresholds(),
    ratio: tuple[int, int, int] = (90, 5, 5),
    seed: int = 0,
    pinned: Optional[dict[str, str]] = None,
    external_filter: Optional[Callable[[RawReaction], bool]] = None,
) -> PrepResult:
    """Full pipeline in fixed rule order, ending with the grouped split.

    ``external_filter`` is a keep-predicate run as the final rule; it is the
    hook for toolkit-backed checks this package does not implement itself.
    """
    report = PrepReport()
    reactions = parse_lines(lines, report)
    reactions = dedupe(reactions, report)
    reactions = filter_structural(reactions, report, thresholds, rules=("reactant_count",))
    reactions = resolve_main_product(reactions, report, thresholds)
    reactions = filter_structural(
        reactions, report, thresholds, rules=("product_size", "atom_ratio", "product_is_reactant")
    )
    reactions = refine_mappings(reactions, report)
    if external_filter is not None:
        kept = []
        for rxn in reactions:
            if external_filter(rxn):
                kept.append(rxn)
            else:
                report.removed["external_filter"] += 1
        reactions = kept
    report.survivors = len(reactions)
    folds = split_folds(reactions, ratio, seed, pinned)
    for name in FOLD_NAMES:
        report.fold_sizes[name] = len(folds[name])
    return PrepResult(folds=folds, survivors=reactions, report=report)


def write_fold_files(
    result: PrepResult, out_dir: str | Path, header: Optional[str] = None
) -> dict[str, Path]:
    """Emit fold TSVs (product<TAB>reactants) plus the survivor reaction file."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    prefix = [f"# {header}\n"] if header else []
    paths = {}
    for name in FOLD_NAMES:
        path = out_dir / f"{name}.tsv"
        rows = prefix + [
            f"{rxn.products[0]}\t{'.'.join(rxn.reactants)}\n" for rxn in result.folds[name]
        ]
        path.write_text("".join(rows))
        paths[name] = path
    survivors = out_dir / "survivors.smi"
    survivors.write_text(
        "".join(prefix + [f"{rxn.reaction_smiles()}\n" for rxn in result.survivors])
    )
    paths["survivors"] = survivors
    return paths
