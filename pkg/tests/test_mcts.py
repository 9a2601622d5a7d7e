"""MCTS selection, expansion and solve behavior."""

from conftest import LookupModel, make_universe

from synthsearch.algorithms import MctsConfig, SearchBudget, mcts
from synthsearch.algorithms.mcts import _TreeNode, _select_child
from synthsearch.andor import extract_routes, validate_route
from synthsearch.inventory import Inventory
from synthsearch.singlestep import UniverseConfig, UniverseModel, generate_universe
from synthsearch.smiles import Molecule


def test_purchasable_target_single_iteration():
    inv = Inventory.from_smiles(["CC"])
    graph, trace = mcts(
        Molecule(id="CC"), LookupModel({}), inv, SearchBudget(wall_time_s=5.0)
    )
    assert graph.root_node.solved
    assert trace.iterations == 1
    assert trace.first_solution.unique_calls == 0


def test_selection_prefers_higher_prior_at_equal_q_and_n():
    parent = _TreeNode(("CC",), depth=0, terminal_value=None)
    low = _TreeNode(("CO",), depth=1, terminal_value=None)
    high = _TreeNode(("CN",), depth=1, terminal_value=None)
    parent.edges = [(0.1, None, low), (0.9, None, high)]
    parent.visits = 1
    assert _select_child(parent, c_b=100.0, v0=0.5) is high


def test_dead_end_target_terminates_quickly():
    inv = Inventory.from_smiles(["CC"])
    graph, trace = mcts(
        Molecule(id="CO"), LookupModel({}), inv,
        SearchBudget(wall_time_s=5.0, max_iterations=5000),
    )
    assert not graph.root_node.solved
    assert trace.iterations <= 3  # expansion finds no children, then stops


def test_simple_universe_solved():
    universe = make_universe(
        {"CCC": [(["CN", "CC"], 0.7)], "CN": [(["CC", "CO"], 0.9)]},
        blocks=["CC", "CO"],
    )
    inv = Inventory.from_smiles(["CC", "CO"])
    graph, trace = mcts(
        Molecule(id="CCC"), UniverseModel(universe), inv,
        SearchBudget(wall_time_s=10.0, max_iterations=500),
    )
    assert graph.root_node.solved
    assert trace.first_solution is not None


def test_solve_set_subset_of_ground_truth_solvable():
    uni = generate_universe(
        UniverseConfig(num_blocks=25, num_nonblocks=40, distractor_rate=0.4, seed=12, num_targets=12)
    )
    inv = Inventory.from_smiles(uni.building_blocks)
    for target in uni.targets:
        graph, trace = mcts(
            Molecule(id=target), UniverseModel(uni), inv,
            SearchBudget(wall_time_s=10.0, max_iterations=400, stop_on_solve=True),
        )
        if graph.root_node.solved:
            assert uni.ground_truth[target].solvable, target


def test_routes_respect_reaction_cap():
    uni = generate_universe(UniverseConfig(num_blocks=20, num_nonblocks=40, seed=19))
    inv = Inventory.from_smiles(uni.building_blocks)
    config = MctsConfig(max_depth_reactions=20)
    target = next(t for t in uni.targets if uni.ground_truth[t].solvable)
    graph, trace = mcts(
        Molecule(id=target), UniverseModel(uni), inv,
        SearchBudget(wall_time_s=10.0, max_iterations=600), config,
    )
    for route in extract_routes(graph, max_routes=20):
        validate_route(graph, route, max_reactions=20)
        assert route.num_reactions <= 20


def test_call_budget_exact():
    uni = generate_universe(UniverseConfig(num_blocks=10, num_nonblocks=30, seed=23))
    inv = Inventory.from_smiles(uni.building_blocks)
    from synthsearch.singlestep import CachedModel

    cache = CachedModel(UniverseModel(uni), num_results=10)
    target = next(t for t in uni.targets if t not in uni.building_blocks)
    graph, trace = mcts(
        Molecule(id=target), UniverseModel(uni), inv,
        SearchBudget(wall_time_s=10.0, max_model_calls=2, max_iterations=400),
        cache=cache,
    )
    assert cache.stats.unique_calls <= 2
