import logging
from multiprocessing.pool import ThreadPool

import pytest
from graphs import cycle_graph, path_graph

from geosolve import GeoSolver, SolverResult
from geosolve.geometry import GeometricInstance, GeometricObject, QuotientGraph
from geosolve.solver import PROBLEMS


@pytest.fixture
def solver(instance):
    return GeoSolver(instance=instance, seed=1, trials=20)


def test_solver_needs_input():
    with pytest.raises(ValueError, match="graph or instance"):
        GeoSolver()


def test_partition_falls_back_without_geometry(caplog):
    solver = GeoSolver(graph=path_graph(4))
    with caplog.at_level(logging.WARNING, logger="geosolve"):
        q = solver.partition
    assert "greedy clique partition" in caplog.text
    assert q.verify() == []
    assert solver.clique_partition is q


def test_clique_partition_warns_on_wide_parts(caplog):
    disks = [GeometricObject("ball", (1.5 * i, 0.0), 1.0) for i in range(3)]
    solver = GeoSolver(instance=GeometricInstance(2, disks))
    solver._partition = QuotientGraph(
        solver.graph, [(0, 1, 2)], [[(0, 1), (2,)]]
    )
    with caplog.at_level(logging.WARNING, logger="geosolve"):
        q = solver.clique_partition
    assert "kappa=2" in caplog.text
    assert q.is_one_partition()
    assert q.verify() == []


def test_structures_are_cached(solver):
    assert solver.partition is solver.partition
    assert solver.decomposition is solver.decomposition
    assert solver.separator_tree(2) is solver.separator_tree(2)


@pytest.mark.parametrize(
    "problem, kwargs",
    [
        ("is", {}),
        ("wis", {"weights": list(range(10))}),
        ("rds", {"r": 1}),
        ("steiner", {"terminals": [0, 1], "k": 10}),
        ("cvc", {"k": 10}),
        ("fvs", {"k": 3}),
        ("oct", {"k": 3}),
        ("coct", {"k": 10}),
        ("cyclecover", {"k": 3}),
        ("hamcycle", {}),
        ("hampath", {}),
    ],
)
def test_every_problem_agrees_with_oracle(solver, problem, kwargs):
    result = solver.solve(problem, **kwargs)
    assert result.problem == problem
    check = solver.cross_check(result)
    assert check["agrees"], check


def test_every_problem_is_listed():
    assert len(PROBLEMS) == 11


def test_named_entry_points():
    g = cycle_graph(6)
    solver = GeoSolver(graph=g, seed=0, trials=20)
    assert solver.independent_set().value == 3
    assert solver.independent_set([1, 0, 1, 0, 1, 0]).value == 3
    assert solver.dominating_set(1).value == 2
    assert solver.steiner_tree([0, 3], 4)
    assert solver.connected_vertex_cover(5)
    assert solver.feedback_vertex_set(1)
    assert solver.odd_cycle_transversal(0)
    assert solver.cycle_cover(1)
    assert solver.hamiltonian_cycle()
    assert solver.hamiltonian_path()


def test_solve_errors(solver):
    with pytest.raises(ValueError, match="Unknown problem"):
        solver.solve("tsp")
    with pytest.raises(ValueError, match="needs weights"):
        solver.solve("wis")


def test_cross_check_catches_wrong_answers(solver):
    honest = solver.solve("is")
    wrong = SolverResult("is", True, honest.value + 1, None, params={})
    assert not solver.cross_check(wrong)["agrees"]


def test_cross_check_skips_large_instances():
    solver = GeoSolver(graph=path_graph(40))
    result = solver.solve("is")
    assert "skipped" in solver.cross_check(result)


def test_pool_dispatch_restores_map(solver):
    with ThreadPool(2) as pool:
        with solver.enable_pool(pool):
            assert solver.map_fn == pool.map
            result = solver.solve("cvc", k=10)
    assert solver.map_fn is map
    assert solver.cross_check(result)["agrees"]
