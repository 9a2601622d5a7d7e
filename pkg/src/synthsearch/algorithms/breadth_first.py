"""Breadth-first baseline: expands frontier molecules in FIFO order.

Guaranteed to solve any target solvable within the depth cap given enough
budget, which makes it a reference point for the guided algorithms.
"""

from __future__ import annotations

from collections import deque
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


def breadth_first(
    target: Molecule,
    model: BackwardModel,
    inventory: Inventory,
    budget: SearchBudget,
    depth_cap: int = 10,
    num_results: int = 50,
    transform: Optional[PolicyTransform] = None,
    cache: Optional[CachedModel] = None,
) -> tuple[AndOrGraph, SearchTrace]:
    transform = transform or PolicyTransform()
    cache = cache or CachedModel(model, num_results=num_results)
    trace = SearchTrace()
    graph = AndOrGraph(target.id, inventory, max_depth=depth_cap)
    state = RunState(cache, budget, trace)

    solved = state.note_if_solved(graph)
    queue = deque([graph.root_node])
    queued = {graph.root}
    while True:
        if solved and budget.stop_on_solve:
            break
        if state.out_of_time() or state.out_of_iterations():
            trace.budget_exhausted = True
            break
        while queue and (queue[0].expanded or queue[0].purchasable or not graph.expandable(queue[0])):
            queue.popleft()
        if not queue:
            trace.frontier_exhausted = True
            break
        node = queue.popleft()
        if not state.can_query(node.molecule):
            trace.budget_exhausted = True
            break
        trace.iterations += 1
        predictions = state.query(node.molecule)
        costs = transform.costs([p.probability for p in predictions])
        new_nodes = graph.expand(
            node, predictions, costs, calls=cache.stats.unique_calls, wall=state.elapsed()
        )
        state.record_expansion(node, len(predictions))
        for and_node in new_nodes:
            for child in and_node.children:
                if child.molecule not in queued and not child.purchasable:
                    queue.append(child)
                    queued.add(child.molecule)
        solved = state.note_if_solved(graph)
    return graph, trace
