from itertools import combinations

import networkx as nx
import pytest
from graphs import complete_graph, cycle_graph, graphs, path_graph, star_graph
from hypothesis import given, settings
from hypothesis import strategies as st

from geosolve import oracles
from geosolve.geometry import IntersectionGraph


def test_checkers():
    g = path_graph(4)
    assert oracles.is_independent_set(g, [0, 2])
    assert not oracles.is_independent_set(g, [1, 2])
    assert oracles.is_r_dominating_set(g, [1], 2)
    assert not oracles.is_r_dominating_set(g, [0], 2)
    assert oracles.is_r_dominating_set(path_graph(0), [], 1)
    assert oracles.is_steiner_tree(g, [0, 2], [0, 1, 2])
    assert not oracles.is_steiner_tree(g, [0, 2], [0, 2])
    assert oracles.is_connected_vertex_cover(g, [1, 2])
    assert not oracles.is_connected_vertex_cover(g, [0, 2])
    assert oracles.is_feedback_vertex_set(cycle_graph(4), [3])
    assert not oracles.is_feedback_vertex_set(cycle_graph(4), [])


def test_odd_cycle_checker():
    g = cycle_graph(5)
    assert oracles.is_odd_cycle_transversal(g, [0])
    assert not oracles.is_odd_cycle_transversal(g, [])
    two = IntersectionGraph.from_edges(
        6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]
    )
    assert oracles.is_odd_cycle_transversal(two, [0, 3])
    assert not oracles.is_odd_cycle_transversal(two, [0, 3], connected=True)


def test_cycle_cover_checker():
    g = complete_graph(6)
    assert oracles.is_cycle_cover(g, [[0, 1, 2], [3, 4, 5]])
    assert not oracles.is_cycle_cover(g, [[0, 1, 2], [3, 4, 5]], k=1)
    assert not oracles.is_cycle_cover(g, [[0, 1], [2, 3, 4, 5]])
    assert not oracles.is_cycle_cover(g, [[0, 1, 2]])
    assert not oracles.is_cycle_cover(path_graph(3), [[0, 1, 2]])


def test_brute_independent_set():
    result = oracles.brute_is(path_graph(5))
    assert result.value == 3 and result.witness == [0, 2, 4]
    weighted = oracles.brute_is(path_graph(3), [1, 5, 1])
    assert weighted.value == 5 and weighted.witness == [1]
    assert oracles.brute_is(path_graph(0)).value == 0


@pytest.mark.parametrize(
    "g, r, size",
    [(path_graph(7), 1, 3), (path_graph(7), 2, 2), (star_graph(5), 1, 1)],
)
def test_brute_dominating_set(g, r, size):
    assert oracles.brute_rds(g, r).value == size


def test_brute_minimisation_problems():
    c5 = cycle_graph(5)
    assert oracles.brute_steiner(path_graph(5), [0, 4]).value == 5
    assert oracles.brute_cvc(c5).value == 4
    assert oracles.brute_fvs(c5).value == 1
    assert oracles.brute_fvs(complete_graph(4)).value == 2
    assert oracles.brute_oct(c5).value == 1
    assert oracles.brute_oct(path_graph(4)).value == 0


def test_brute_infeasible_instances():
    split = IntersectionGraph.from_edges(4, [(0, 1), (2, 3)])
    assert oracles.brute_steiner(split, [0, 3]).value is None
    assert oracles.brute_cvc(split).value is None
    two = IntersectionGraph.from_edges(
        6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]
    )
    assert oracles.brute_oct(two).value == 2
    assert oracles.brute_oct(two, connected=True).value is None


def test_brute_cycles():
    assert oracles.brute_hamiltonian(cycle_graph(6)).value
    assert not oracles.brute_hamiltonian(path_graph(6)).value
    assert not oracles.brute_hamiltonian(path_graph(2)).value
    path = oracles.brute_hamiltonian_path(path_graph(5))
    assert path.value and path.witness == [0, 1, 2, 3, 4]
    assert not oracles.brute_hamiltonian_path(star_graph(3)).value
    cover = oracles.brute_cycle_cover(complete_graph(6), 2)
    assert cover.value and oracles.is_cycle_cover(
        complete_graph(6), cover.witness, 2
    )


def _fewest_cycles(g):
    """Fewest components of a spanning 2-regular subgraph, or None."""
    best = None
    for chosen in combinations(g.edges(), g.n):
        factor = nx.Graph(list(chosen))
        if factor.number_of_nodes() != g.n:
            continue
        if any(d != 2 for _, d in factor.degree()):
            continue
        count = nx.number_connected_components(factor)
        best = count if best is None else min(best, count)
    return best


@given(graphs(min_n=1, max_n=6), st.integers(1, 3))
@settings(max_examples=40, deadline=None)
def test_cycle_cover_matches_two_factors(g, k):
    fewest = _fewest_cycles(g)
    result = oracles.brute_cycle_cover(g, k)
    assert result.value == (fewest is not None and fewest <= k)
    if result.value:
        assert oracles.is_cycle_cover(g, result.witness, k)


def test_brute_treedepth():
    assert oracles.brute_treedepth(path_graph(7)).value == 3
    assert oracles.brute_treedepth(star_graph(5)).value == 2
    assert oracles.brute_treedepth(complete_graph(4)).value == 4
    assert oracles.brute_treedepth(path_graph(0)).value == 0


def test_input_errors():
    with pytest.raises(ValueError, match="terminal"):
        oracles.brute_steiner(path_graph(3), [5])
    with pytest.raises(ValueError, match="at least 1"):
        oracles.brute_rds(path_graph(3), 0)
    with pytest.raises(ValueError, match="at least 1"):
        oracles.brute_cycle_cover(path_graph(3), 0)


def test_caps():
    big = path_graph(oracles.ORACLE_CAP + 1)
    with pytest.raises(oracles.OracleCapExceeded, match="capped"):
        oracles.brute_is(big)
    with pytest.raises(oracles.OracleCapExceeded):
        oracles.brute_treedepth(path_graph(oracles.TREEDEPTH_CAP + 1))
    assert oracles.brute_is(big, cap=64).value == 10


def test_result_to_dict():
    result = oracles.brute_fvs(cycle_graph(3))
    assert result.to_dict() == {
        "value": 1,
        "witness": [0],
        "enumerated": result.enumerated,
    }
