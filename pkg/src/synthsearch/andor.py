"""AND/OR search graph shared by all algorithms, plus route extraction and
the non-overlapping-routes diversity metric.

OR nodes are molecules (any one child reaction suffices), AND nodes are
reactions (all child molecules required).  Molecules merge into a single OR
node by normalized id, so the graph is a DAG in the common case but may
contain cycles after merging; solved flags and costs are computed as least
fixpoints and route extraction never selects a reaction that makes a
molecule an ancestor of itself.

Depth is counted over both node kinds: the root is at depth 0, an AND node
sits one below its parent molecule and its child molecules one below it, so
a route of r reactions ends at depth 2r.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .inventory import Inventory
from .singlestep.base import Prediction
from .smiles import MoleculeSet


class AlreadyExpanded(RuntimeError):
    pass


class DepthLimitExceeded(RuntimeError):
    pass


class TooManyRoutes(ValueError):
    pass


_DEFAULT_CLIP = (1e-10, 0.999)


@dataclass(eq=False)
class OrNode:
    molecule: str
    purchasable: bool
    depth: int
    seq: int
    expanded: bool = False
    solved: bool = False
    retro_value: float = 0.0
    children: list["AndNode"] = field(default_factory=list)
    parents: list["AndNode"] = field(default_factory=list)

    def __repr__(self) -> str:  # keeps debug output short
        return f"OrNode({self.molecule!r}, solved={self.solved})"


@dataclass(eq=False)
class AndNode:
    reaction: Prediction
    parent: OrNode
    children: list[OrNode]
    cost: float
    depth: int
    seq: int
    solved: bool = False
    created_calls: int = 0
    created_wall: float = 0.0

    @property
    def key(self) -> tuple[str, MoleculeSet]:
        """Chemical identity of the reaction: (product, reactant set)."""
        return (self.parent.molecule, self.reaction.reactants)

    def __repr__(self) -> str:
        return f"AndNode({self.parent.molecule!r} <- {self.reaction.reactants})"


class AndOrGraph:
    """One search run's graph, owned by a single algorithm instance."""

    def __init__(
        self,
        root: str,
        inventory: Inventory,
        max_depth: Optional[int] = None,
        max_route_reactions: Optional[int] = None,
    ) -> None:
        self.inventory = inventory
        self.max_depth = max_depth
        self.max_route_reactions = max_route_reactions
        self.or_nodes: dict[str, OrNode] = {}
        self.and_nodes: list[AndNode] = []
        self._seq = 0
        self.root = root
        self.root_node = self._get_or_create(root, depth=0)

    # -- construction ---------------------------------------------------

    def _get_or_create(self, molecule: str, depth: int) -> OrNode:
        node = self.or_nodes.get(molecule)
        if node is None:
            purchasable = self.inventory.contains(molecule)
            node = OrNode(
                molecule=molecule,
                purchasable=purchasable,
                depth=depth,
                seq=self._seq,
                solved=purchasable,
            )
            self._seq += 1
            self.or_nodes[molecule] = node
        elif depth < node.depth:
            node.depth = depth
            self._relax_depths(node)
        return node

    def _relax_depths(self, start: OrNode) -> None:
        # Merging can shorten the best path to an existing subgraph.
        stack = [start]
        while stack:
            node = stack.pop()
            for and_node in node.children:
                if node.depth + 1 < and_node.depth:
                    and_node.depth = node.depth + 1
                    for child in and_node.children:
                        if and_node.depth + 1 < child.depth:
                            child.depth = and_node.depth + 1
                            stack.append(child)

    def expandable(self, node: OrNode) -> bool:
        """Whether expanding ``node`` would respect the depth cap."""
        if self.max_depth is None:
            return True
        return node.depth + 2 <= self.max_depth

    def expand(
        self,
        node: OrNode,
        predictions: Sequence[Prediction],
        costs: Optional[Sequence[float]] = None,
        calls: int = 0,
        wall: float = 0.0,
    ) -> list[AndNode]:
        """Attach one AND node per prediction; child molecules merge by id.

        ``costs`` defaults to -ln(p) with p clipped to the default range.
        ``calls``/``wall`` stamp when each reaction entered the graph, which
        route-availability metrics read back later.
        """
        if node.expanded:
            raise AlreadyExpanded(node.molecule)
        if not self.expandable(node):
            raise DepthLimitExceeded(
                f"{node.molecule} at depth {node.depth} (cap {self.max_depth})"
            )
        node.expanded = True
        new_nodes: list[AndNode] = []
        for i, pred in enumerate(predictions):
            if costs is not None:
                cost = costs[i]
            else:
                lo, hi = _DEFAULT_CLIP
                cost = -math.log(min(max(pred.probability, lo), hi))
            and_node = AndNode(
                reaction=pred,
                parent=node,
                children=[],
                cost=cost,
                depth=node.depth + 1,
                seq=self._seq,
                created_calls=calls,
                created_wall=wall,
            )
            self._seq += 1
            for mol in pred.reactants:
                child = self._get_or_create(mol, depth=and_node.depth + 1)
                and_node.children.append(child)
                child.parents.append(and_node)
            and_node.solved = all(c.solved for c in and_node.children)
            node.children.append(and_node)
            self.and_nodes.append(and_node)
            new_nodes.append(and_node)
        self._propagate_solved(node)
        return new_nodes

    def _propagate_solved(self, start: OrNode) -> None:
        worklist: list[OrNode] = [start]
        while worklist:
            node = worklist.pop()
            solved = node.purchasable or any(c.solved for c in node.children)
            if solved and not node.solved:
                node.solved = True
            elif not (solved or node.solved):
                continue
            for and_node in node.parents:
                if not and_node.solved and all(c.solved for c in and_node.children):
                    and_node.solved = True
                    worklist.append(and_node.parent)

    def recompute_solved(self) -> dict[str, bool]:
        """Solved flags computed from scratch (fixpoint); does not mutate."""
        solved = {m: n.purchasable for m, n in self.or_nodes.items()}
        changed = True
        while changed:
            changed = False
            for m, node in self.or_nodes.items():
                if solved[m]:
                    continue
                for and_node in node.children:
                    if all(solved[c.molecule] for c in and_node.children):
                        solved[m] = True
                        changed = True
                        break
        return solved

    # -- export ----------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "root": self.root,
            "max_depth": self.max_depth,
            "or_nodes": [
                {
                    "molecule": n.molecule,
                    "purchasable": n.purchasable,
                    "expanded": n.expanded,
                    "solved": n.solved,
                    "depth": n.depth,
                    "retro_value": None if math.isinf(n.retro_value) else n.retro_value,
                }
                for n in self.or_nodes.values()
            ],
            "and_nodes": [
                {
                    "product": a.parent.molecule,
                    "reactants": list(a.reaction.reactants),
                    "probability": a.reaction.probability,
                    "cost": a.cost,
                    "solved": a.solved,
                    "depth": a.depth,
                    "created_calls": a.created_calls,
                    "created_wall": a.created_wall,
                }
                for a in self.and_nodes
            ],
        }

    def to_dot(self) -> str:
        lines = ["digraph andor {", "  rankdir=TB;"]
        ids = {n.molecule: f"m{n.seq}" for n in self.or_nodes.values()}
        for n in self.or_nodes.values():
            shape = "box" if not n.purchasable else "box3d"
            color = "green" if n.solved else "black"
            lines.append(
                f'  {ids[n.molecule]} [label="{n.molecule}", shape={shape}, color={color}];'
            )
        for a in self.and_nodes:
            rid = f"r{a.seq}"
            lines.append(f'  {rid} [label="p={a.reaction.probability:.3g}", shape=point];')
            lines.append(f"  {ids[a.parent.molecule]} -> {rid};")
            for c in a.children:
                lines.append(f"  {rid} -> {ids[c.molecule]};")
        lines.append("}")
        return "\n".join(lines)

    def write_dot(self, path: str | Path) -> None:
        Path(path).write_text(self.to_dot() + "\n")


@dataclass(frozen=True)
class Route:
    """A complete synthesis of the root: one reaction chosen per molecule."""

    reactions: tuple[AndNode, ...]
    total_cost: float
    num_reactions: int
    max_depth_reactions: int

    @property
    def reaction_keys(self) -> frozenset[tuple[str, MoleculeSet]]:
        return frozenset(a.key for a in self.reactions)

    @property
    def available_calls(self) -> int:
        return max((a.created_calls for a in self.reactions), default=0)

    @property
    def available_wall(self) -> float:
        return max((a.created_wall for a in self.reactions), default=0.0)

    def to_dot(self, root: str) -> str:
        lines = ["digraph route {", f'  label="{root}";']
        for i, a in enumerate(self.reactions):
            rid = f"r{i}"
            lines.append(f'  "{a.parent.molecule}" [shape=box];')
            lines.append(f'  {rid} [label="p={a.reaction.probability:.3g}", shape=point];')
            lines.append(f'  "{a.parent.molecule}" -> {rid};')
            for c in a.children:
                lines.append(f'  {rid} -> "{c.molecule}";')
        lines.append("}")
        return "\n".join(lines)


def _selection_is_acyclic(chosen: dict[str, AndNode]) -> bool:
    state: dict[str, int] = {}  # 0 visiting, 1 done

    def visit(mol: str) -> bool:
        if state.get(mol) == 1:
            return True
        if state.get(mol) == 0:
            return False
        state[mol] = 0
        and_node = chosen.get(mol)
        if and_node is not None:
            for child in and_node.children:
                if not child.purchasable and not visit(child.molecule):
                    return False
        state[mol] = 1
        return True

    return all(visit(m) for m in list(chosen))


def _route_depth(root: str, chosen: dict[str, AndNode]) -> int:
    memo: dict[str, int] = {}

    def depth(mol: str) -> int:
        if mol in memo:
            return memo[mol]
        and_node = chosen.get(mol)
        if and_node is None:
            memo[mol] = 0
            return 0
        sub = max((depth(c.molecule) for c in and_node.children), default=0)
        memo[mol] = 1 + sub
        return memo[mol]

    return depth(root)


def extract_routes(
    graph: AndOrGraph,
    max_routes: int,
    max_cost: Optional[float] = None,
    max_reactions: Optional[int] = None,
    max_iterations: int = 200_000,
) -> list[Route]:
    """Enumerate routes in non-decreasing total cost.

    Ties break by fewer reactions, then by discovery order.  Best-first over
    partial per-molecule reaction choices; the remainder of a partial is
    bounded below by the cheapest solved reaction of each still-open
    molecule, which keeps emission order correct.  Returns [] when the root
    is unsolved; a purchasable root yields one empty route.
    """
    root = graph.root_node
    if not root.solved:
        return []
    if max_reactions is None:
        max_reactions = graph.max_route_reactions
    if root.purchasable:
        return [Route((), 0.0, 0, 0)]

    min_and_cost: dict[str, float] = {}
    for mol, node in graph.or_nodes.items():
        costs = [a.cost for a in node.children if a.solved]
        if costs:
            min_and_cost[mol] = min(costs)

    routes: list[Route] = []
    counter = 0
    # entry: (cost_bound, reaction_count_bound, tiebreak, pending, chosen)
    heap: list[tuple[float, int, int, tuple[str, ...], dict[str, AndNode]]] = []
    heapq.heappush(heap, (min_and_cost.get(root.molecule, math.inf), 1, counter, (root.molecule,), {}))
    iterations = 0
    while heap and len(routes) < max_routes and iterations < max_iterations:
        iterations += 1
        bound, _count_bound, _tie, pending, chosen = heapq.heappop(heap)
        if max_cost is not None and bound > max_cost + 1e-12:
            break
        if not pending:
            if not _selection_is_acyclic(chosen):
                continue
            reactions = tuple(sorted(chosen.values(), key=lambda a: a.seq))
            routes.append(
                Route(
                    reactions=reactions,
                    total_cost=sum(a.cost for a in reactions),
                    num_reactions=len(reactions),
                    max_depth_reactions=_route_depth(root.molecule, chosen),
                )
            )
            continue
        mol = pending[0]
        rest = pending[1:]
        cost_so_far = sum(a.cost for a in chosen.values())
        for and_node in graph.or_nodes[mol].children:
            if not and_node.solved:
                continue
            new_chosen = dict(chosen)
            new_chosen[mol] = and_node
            new_pending = list(rest)
            feasible = True
            for child in and_node.children:
                cm = child.molecule
                if child.purchasable or cm in new_chosen or cm in new_pending:
                    continue
                if cm not in min_and_cost:
                    feasible = False
                    break
                new_pending.append(cm)
            if not feasible:
                continue
            if max_reactions is not None and len(new_chosen) + len(new_pending) > max_reactions:
                continue
            new_cost = cost_so_far + and_node.cost
            new_bound = new_cost + sum(min_and_cost[p] for p in new_pending)
            counter += 1
            heapq.heappush(
                heap,
                (new_bound, len(new_chosen) + len(new_pending), counter, tuple(new_pending), new_chosen),
            )
    return routes


def validate_route(
    graph: AndOrGraph,
    route: Route,
    max_depth: Optional[int] = None,
    max_reactions: Optional[int] = None,
) -> None:
    """Independent structural check of a route against its graph.

    Walks the graph from the root using only the route's choices and raises
    AssertionError on any violated invariant.  Deliberately shares no code
    with :func:`extract_routes`.
    """
    chosen: dict[str, AndNode] = {}
    for a in route.reactions:
        assert a.parent.molecule not in chosen, "two reactions for one molecule"
        chosen[a.parent.molecule] = a
        assert a in graph.and_nodes or a in a.parent.children, "reaction not in graph"

    used: set[str] = set()
    stack: list[tuple[str, frozenset[str]]] = [(graph.root, frozenset())]
    while stack:
        mol, ancestors = stack.pop()
        assert mol not in ancestors, f"cycle through {mol}"
        node = graph.or_nodes[mol]
        if node.purchasable:
            continue
        assert mol in chosen, f"non-purchasable {mol} has no chosen reaction"
        used.add(mol)
        for child in chosen[mol].children:
            stack.append((child.molecule, ancestors | {mol}))

    assert used == set(chosen), "route contains reactions not reachable from root"
    assert route.num_reactions == len(route.reactions), "num_reactions mismatch"
    assert len({a.key for a in route.reactions}) == len(route.reactions), "duplicate reactions"
    assert abs(route.total_cost - sum(a.cost for a in route.reactions)) < 1e-9

    depth_memo: dict[str, int] = {}

    def rdepth(mol: str) -> int:
        if mol not in depth_memo:
            if mol not in chosen:
                depth_memo[mol] = 0
            else:
                depth_memo[mol] = 1 + max(
                    (rdepth(c.molecule) for c in chosen[mol].children), default=0
                )
        return depth_memo[mol]

    actual_depth = rdepth(graph.root)
    assert actual_depth == route.max_depth_reactions, "route depth mismatch"
    if max_depth is not None:
        assert 2 * actual_depth <= max_depth, "route exceeds AND/OR depth cap"
    if max_reactions is not None:
        assert route.num_reactions <= max_reactions, "route exceeds reaction cap"


def packing_number_greedy(routes: Sequence[Route]) -> int:
    """Greedy count of pairwise reaction-disjoint routes.

    Routes are considered smallest first (ties by input order); a route is
    selected when its reaction set is disjoint from everything selected so
    far.  A lower bound on the exact packing number.
    """
    taken: set[tuple[str, MoleculeSet]] = set()
    count = 0
    for route in sorted(routes, key=lambda r: r.num_reactions):
        keys = route.reaction_keys
        if not (keys & taken):
            taken |= keys
            count += 1
    return count


def packing_number_exact(routes: Sequence[Route], limit: int = 20) -> int:
    """Exact maximum number of reaction-disjoint routes (test oracle).

    Branch and bound over inclusion masks; refuses instances larger than
    ``limit`` because the problem is NP-hard.
    """
    n = len(routes)
    if n > limit:
        raise TooManyRoutes(f"{n} routes exceeds exact-packing limit {limit}")
    if n == 0:
        return 0
    element_ids: dict[tuple[str, MoleculeSet], int] = {}
    masks: list[int] = []
    for route in routes:
        mask = 0
        for key in route.reaction_keys:
            if key not in element_ids:
                element_ids[key] = len(element_ids)
            mask |= 1 << element_ids[key]
        masks.append(mask)

    best = 0

    def search(i: int, used: int, count: int) -> None:
        nonlocal best
        best = max(best, count)
        if count + (n - i) <= best:
            return
        for j in range(i, n):
            if masks[j] & used == 0:
                search(j + 1, used | masks[j], count + 1)

    search(0, 0, 0)
    return best
