"""Best-first AND/OR search with negative-log-probability costs and a
constant-zero frontier value (the no-learned-heuristic variant).

Each iteration scores every unexpanded, non-purchasable frontier molecule m
with the cost of the cheapest partial solution tree containing m, where
frontier leaves contribute 0, then expands the argmin (ties: lowest depth,
then discovery order).  Values are least fixpoints, so merged subgraphs and
even cycles introduced by merging are handled.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from ..andor import AndOrGraph
from ..inventory import Inventory
from ..singlestep.base import BackwardModel
from ..singlestep.cache import CachedModel
from ..smiles import Molecule
from .budget import SearchBudget
from .common import RunState
from .policy import PolicyTransform
from .trace import SearchTrace

_INF = math.inf


@dataclass(frozen=True)
class RetroStarConfig:
    max_depth_andor: int = 10  # AND/OR node depth, so 10 means 5 reactions deep
    transform: PolicyTransform = field(default_factory=PolicyTransform)
    num_results: int = 50

    def __post_init__(self) -> None:
        if self.max_depth_andor % 2 != 0 or self.max_depth_andor < 0:
            raise ValueError("max_depth_andor must be even and >= 0")


def _subtree_costs(graph: AndOrGraph) -> dict[str, float]:
    """Least-fixpoint cheapest-solve cost per molecule (tree semantics).

    Purchasable molecules cost 0, expandable frontier leaves are valued 0,
    depth-capped or dead-end molecules are unsolvable (inf).
    """
    rn: dict[str, float] = {}
    for mol, node in graph.or_nodes.items():
        if node.purchasable:
            rn[mol] = 0.0
        elif not node.expanded:
            rn[mol] = 0.0 if graph.expandable(node) else _INF
        else:
            rn[mol] = _INF

    queue = deque(mol for mol, node in graph.or_nodes.items() if node.expanded)
    queued = set(queue)
    while queue:
        mol = queue.popleft()
        queued.discard(mol)
        node = graph.or_nodes[mol]
        best = _INF
        for and_node in node.children:
            total = and_node.cost
            for child in and_node.children:
                total += rn[child.molecule]
                if total == _INF:
                    break
            best = min(best, total)
        if best < rn[mol] - 1e-12:
            rn[mol] = best
            for and_parent in node.parents:
                parent_mol = and_parent.parent.molecule
                if graph.or_nodes[parent_mol].expanded and parent_mol not in queued:
                    queue.append(parent_mol)
                    queued.add(parent_mol)

    for mol, node in graph.or_nodes.items():
        node.retro_value = rn[mol]
    return rn


def _tree_values(graph: AndOrGraph, rn: dict[str, float]) -> dict[str, float]:
    """Cost of the cheapest partial solution tree containing each molecule."""
    rt: dict[str, float] = {mol: _INF for mol in graph.or_nodes}
    rt[graph.root] = rn[graph.root]
    queue = deque([graph.root])
    queued = {graph.root}
    while queue:
        mol = queue.popleft()
        queued.discard(mol)
        base = rt[mol]
        if base == _INF or rn[mol] == _INF:
            continue
        for and_node in graph.or_nodes[mol].children:
            value = and_node.cost
            for child in and_node.children:
                value += rn[child.molecule]
                if value == _INF:
                    break
            if value == _INF:
                continue
            through = base - rn[mol] + value
            for child in and_node.children:
                if through < rt[child.molecule] - 1e-12:
                    rt[child.molecule] = through
                    if child.molecule not in queued:
                        queue.append(child.molecule)
                        queued.add(child.molecule)
    return rt


def retro_star(
    target: Molecule,
    model: BackwardModel,
    inventory: Inventory,
    budget: SearchBudget,
    config: Optional[RetroStarConfig] = None,
    cache: Optional[CachedModel] = None,
) -> tuple[AndOrGraph, SearchTrace]:
    """Run the best-first search; budget exhaustion is a normal outcome."""
    config = config or RetroStarConfig()
    cache = cache or CachedModel(model, num_results=config.num_results)
    trace = SearchTrace()
    graph = AndOrGraph(target.id, inventory, max_depth=config.max_depth_andor)
    state = RunState(cache, budget, trace)

    solved = state.note_if_solved(graph)
    while True:
        if solved and budget.stop_on_solve:
            break
        if state.out_of_time() or state.out_of_iterations():
            trace.budget_exhausted = True
            break
        rn = _subtree_costs(graph)
        rt = _tree_values(graph, rn)
        frontier = [
            node
            for node in graph.or_nodes.values()
            if not node.expanded
            and not node.purchasable
            and graph.expandable(node)
            and rt[node.molecule] < _INF
        ]
        if not frontier:
            trace.frontier_exhausted = True
            break
        chosen = min(frontier, key=lambda n: (rt[n.molecule], n.depth, n.seq))
        if not state.can_query(chosen.molecule):
            trace.budget_exhausted = True
            break
        trace.iterations += 1
        predictions = state.query(chosen.molecule)
        costs = config.transform.costs([p.probability for p in predictions])
        graph.expand(
            chosen,
            predictions,
            costs,
            calls=cache.stats.unique_calls,
            wall=state.elapsed(),
        )
        state.record_expansion(chosen, len(predictions))
        solved = state.note_if_solved(graph)
    return graph, trace
