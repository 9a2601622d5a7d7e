"""Monte Carlo tree search over frontier states with prior-weighted
exploration bonuses.

A state is the multiset of molecules still to be synthesized.  Selection
descends by argmax of Q(c) + c_b * P(c) * sqrt(N(parent)) / (1 + N(c)) with
unvisited Q equal to the node value constant; expansion applies the model to
the lexicographically first open molecule of the chosen state; leaf values
are 1 for a fully purchasable state, 0 at the depth cap or a dead end, and
the node value constant otherwise; backpropagation averages values along the
visited path.  Visited reactions also populate a shared AND/OR graph so
route extraction and diversity metrics are algorithm-agnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from ..andor import AndOrGraph
from ..inventory import Inventory
from ..singlestep.base import BackwardModel, Prediction
from ..singlestep.cache import CachedModel
from ..smiles import Molecule
from .budget import SearchBudget
from .common import RunState
from .policy import PolicyTransform
from .trace import SearchTrace


@dataclass(frozen=True)
class MctsConfig:
    bound_constant: float = 100.0
    node_value_constant: float = 0.5
    max_depth_reactions: int = 20
    transform: PolicyTransform = field(default_factory=PolicyTransform)
    num_results: int = 50

    def __post_init__(self) -> None:
        if self.bound_constant <= 0:
            raise ValueError("bound_constant must be positive")
        if not 0.0 < self.node_value_constant < 1.0:
            raise ValueError("node_value_constant must be in (0, 1)")
        if self.max_depth_reactions < 0:
            raise ValueError("max_depth_reactions must be >= 0")


class _TreeNode:
    __slots__ = ("state", "depth", "visits", "value_sum", "edges", "terminal_value")

    def __init__(self, state: tuple[str, ...], depth: int, terminal_value: Optional[float]) -> None:
        self.state = state  # sorted multiset of open molecules
        self.depth = depth  # reactions applied from the root
        self.visits = 0
        self.value_sum = 0.0
        self.edges: Optional[list[tuple[float, Prediction, _TreeNode]]] = None
        self.terminal_value = terminal_value


def _select_child(node: _TreeNode, c_b: float, v0: float) -> "_TreeNode":
    sqrt_n = math.sqrt(node.visits)
    best_score = -math.inf
    best_child: Optional[_TreeNode] = None
    for prior, _reaction, child in node.edges:  # type: ignore[union-attr]
        q = child.value_sum / child.visits if child.visits > 0 else v0
        score = q + c_b * prior * sqrt_n / (1 + child.visits)
        if score > best_score:
            best_score = score
            best_child = child
    assert best_child is not None
    return best_child


def mcts(
    target: Molecule,
    model: BackwardModel,
    inventory: Inventory,
    budget: SearchBudget,
    config: Optional[MctsConfig] = None,
    cache: Optional[CachedModel] = None,
) -> tuple[AndOrGraph, SearchTrace]:
    config = config or MctsConfig()
    cache = cache or CachedModel(model, num_results=config.num_results)
    trace = SearchTrace()
    graph = AndOrGraph(
        target.id,
        inventory,
        max_depth=2 * config.max_depth_reactions,
        max_route_reactions=config.max_depth_reactions,
    )
    state = RunState(cache, budget, trace)
    v0 = config.node_value_constant

    root_state = () if inventory.contains(target.id) else (target.id,)
    root = _TreeNode(root_state, depth=0, terminal_value=1.0 if not root_state else None)
    solved = state.note_if_solved(graph)

    while True:
        if solved and budget.stop_on_solve:
            break
        if state.out_of_time() or state.out_of_iterations():
            trace.budget_exhausted = True
            break
        if root.terminal_value is not None and root.visits > 0:
            break  # nothing left to learn from a terminal root

        node = root
        path = [root]
        while node.terminal_value is None and node.edges is not None:
            node = _select_child(node, config.bound_constant, v0)
            path.append(node)

        if node.terminal_value is not None:
            value = node.terminal_value
        else:
            molecule = node.state[0]
            if not state.can_query(molecule):
                trace.budget_exhausted = True
                break
            predictions = state.query(molecule)
            graph_node = graph.or_nodes.get(molecule)
            if graph_node is not None and not graph_node.expanded and graph.expandable(graph_node):
                costs = config.transform.costs([p.probability for p in predictions])
                graph.expand(
                    graph_node,
                    predictions,
                    costs,
                    calls=cache.stats.unique_calls,
                    wall=state.elapsed(),
                )
                state.record_expansion(graph_node, len(predictions))
            if not predictions:
                node.terminal_value = 0.0
                value = 0.0
            else:
                priors = config.transform.transform([p.probability for p in predictions])
                rest = node.state[1:]
                edges = []
                for prior, pred in zip(priors, predictions):
                    opens = tuple(
                        sorted(rest + tuple(m for m in pred.reactants if not inventory.contains(m)))
                    )
                    depth = node.depth + 1
                    if not opens:
                        terminal: Optional[float] = 1.0
                    elif depth >= config.max_depth_reactions:
                        terminal = 0.0  # depth exhaustion is failure
                    else:
                        terminal = None
                    edges.append((prior, pred, _TreeNode(opens, depth, terminal)))
                node.edges = edges
                value = v0

        for visited in path:
            visited.visits += 1
            visited.value_sum += value
        trace.iterations += 1
        solved = state.note_if_solved(graph)
    return graph, trace
