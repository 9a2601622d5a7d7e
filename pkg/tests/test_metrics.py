"""Metrics-over-time series and final packing."""

from conftest import LookupModel, make_universe

from synthsearch.algorithms import SearchBudget, breadth_first, metrics_over_time, retro_star
from synthsearch.algorithms.metrics import final_packing
from synthsearch.andor import extract_routes, packing_number_exact
from synthsearch.inventory import Inventory
from synthsearch.singlestep import UniverseModel
from synthsearch.smiles import Molecule


def test_never_solved_run_all_zero():
    inv = Inventory.from_smiles(["CC"])
    graph, trace = breadth_first(
        Molecule(id="CO"), LookupModel({}), inv, SearchBudget(wall_time_s=5.0)
    )
    rows = metrics_over_time(graph, trace)
    assert rows
    assert all(r.packing_running_max == 0 and not r.solved for r in rows)
    assert trace.first_solution is None


def test_single_route_steps_at_discovery_call():
    # linear chain: target solved only after the 5th unique call
    chain = {f"C{'N' * i}": [([f"C{'N' * (i + 1)}"], 0.9)] for i in range(5)}
    universe = make_universe(chain, blocks=["C" + "N" * 5])
    inv = Inventory.from_smiles(["C" + "N" * 5])
    graph, trace = breadth_first(
        Molecule(id="C"), UniverseModel(universe), inv, SearchBudget(wall_time_s=5.0), depth_cap=20
    )
    rows = metrics_over_time(graph, trace, interval_calls=1)
    values = {r.unique_calls: r.packing_running_max for r in rows}
    assert trace.first_solution.unique_calls == 5
    assert values[4] == 0 and values[5] == 1
    for row in rows:
        assert row.solved == (row.unique_calls >= 5)


def test_three_routes_two_disjoint_running_max(diamond):
    universe, inventory = diamond
    # add an independent second disconnection of the root
    universe.reactions["CCC"].append(
        universe.reactions["CN"][0].__class__(
            universe.reactions["CN"][0].reactants.__class__.from_ids(["CC", "CC"]), 0.2
        )
    )
    graph, trace = breadth_first(
        Molecule(id="CCC"), UniverseModel(universe), inventory, SearchBudget(wall_time_s=5.0)
    )
    routes = extract_routes(graph, max_routes=10)
    assert len(routes) == 3
    rows = metrics_over_time(graph, trace)
    assert rows[-1].packing_running_max == packing_number_exact(routes) == 2


def test_interval_thinning():
    chain = {f"C{'N' * i}": [([f"C{'N' * (i + 1)}"], 0.9)] for i in range(8)}
    universe = make_universe(chain, blocks=["C" + "N" * 8])
    inv = Inventory.from_smiles(["C" + "N" * 8])
    graph, trace = breadth_first(
        Molecule(id="C"), UniverseModel(universe), inv, SearchBudget(wall_time_s=5.0), depth_cap=20
    )
    dense = metrics_over_time(graph, trace, interval_calls=1)
    sparse = metrics_over_time(graph, trace, interval_calls=3)
    assert len(sparse) < len(dense)
    assert sparse[-1].unique_calls == dense[-1].unique_calls
    assert sparse[-1].packing_running_max == dense[-1].packing_running_max


def test_series_monotone_nondecreasing():
    universe, inventory = ( make_universe(
        {
            "CCC": [(["CN", "CC"], 0.6), (["CO", "CO"], 0.3)],
            "CN": [(["CC", "CO"], 0.9), (["CO"], 0.1)],
        },
        blocks=["CC", "CO"],
    ), Inventory.from_smiles(["CC", "CO"]))
    graph, trace = retro_star(
        Molecule(id="CCC"), UniverseModel(universe), inventory, SearchBudget(wall_time_s=5.0)
    )
    rows = metrics_over_time(graph, trace)
    packing = [r.packing_running_max for r in rows]
    assert packing == sorted(packing)
    assert final_packing(graph, trace) == packing[-1]
