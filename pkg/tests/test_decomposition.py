import math

import pytest
from graphs import (
    complete_graph,
    disk_graphs,
    path_graph,
    random_disks,
    singleton_partition,
    star_graph,
)
from hypothesis import given, settings

from geosolve import oracles
from geosolve.decomposition import (
    ALPHA,
    TreedepthDecomposition,
    add_universal_root,
    balanced_weighted_separator,
    build_separator_tree,
    build_unweighted_treedepth,
    build_weighted_treedepth,
    expand_to_unweighted,
    verify_decomposition,
)
from geosolve.geometry import (
    QuotientGraph,
    build_intersection_graph,
    build_kappa_partition,
    generate_random_instance,
)


def test_separator_of_single_part():
    q = singleton_partition(path_graph(1))
    assert balanced_weighted_separator(q, [0]) == (0,)


def test_separator_of_path_is_middle():
    q = singleton_partition(path_graph(3))
    assert balanced_weighted_separator(q, [0, 1, 2]) == (1,)


def test_separator_of_triangle_is_one_part():
    q = singleton_partition(complete_graph(3))
    assert len(balanced_weighted_separator(q, [0, 1, 2])) == 1


def test_separator_needs_parts():
    q = singleton_partition(path_graph(2))
    with pytest.raises(ValueError, match="nonempty"):
        balanced_weighted_separator(q, [])


def test_single_disk_depth(single_disk):
    g = build_intersection_graph(single_disk)
    td = build_weighted_treedepth(build_kappa_partition(g, single_disk))
    assert td.weighted_depth == pytest.approx(1.0)
    assert td.depth == 1


def test_path_quotient_decomposition():
    q = singleton_partition(path_graph(3))
    td = build_weighted_treedepth(q)
    assert td.phi[td.roots[0]] == 1
    assert sorted(td.phi[c] for c in td.children(td.roots[0])) == [0, 2]
    assert td.weighted_depth == pytest.approx(2.0)


@given(disk_graphs(max_n=40))
@settings(max_examples=30, deadline=None)
def test_decompositions_verify_and_balance(instance):
    g, q = instance
    td = build_weighted_treedepth(q)
    assert verify_decomposition(td, q) == []
    for step in td.audit:
        assert step.largest_component <= ALPHA * step.subproblem_size + 1e-9


def test_child_subproblems_shrink():
    g, q = random_disks(120, seed=11, density=1.0)
    td = build_weighted_treedepth(q)
    assert td.audit
    assert all(
        step.largest_component <= ALPHA * step.subproblem_size + 1e-9
        for step in td.audit
    )
    assert all(step.subproblem_size <= g.n for step in td.audit)


def test_incomparable_edge_is_reported():
    q = singleton_partition(path_graph(2))
    td = TreedepthDecomposition([-1, -1], [0, 1], [1.0, 1.0])
    violations = verify_decomposition(td, q)
    assert len(violations) == 1
    assert "edge (0, 1)" in violations[0]


def test_decomposition_rejects_cycles():
    with pytest.raises(ValueError, match="rooted forest"):
        TreedepthDecomposition([1, 0], [0, 1], [1.0, 1.0])


@pytest.mark.parametrize("m", range(1, 11))
def test_path_treedepth(m):
    g = path_graph(m)
    exact = oracles.brute_treedepth(g).value
    assert exact == math.ceil(math.log2(m + 1))
    td = build_weighted_treedepth(singleton_partition(g))
    assert exact <= td.depth <= 1 + math.ceil(math.log2(m))
    assert td.depth <= 2 * exact


@pytest.mark.parametrize(
    "g", [complete_graph(m) for m in range(1, 8)] + [star_graph(6)]
)
def test_builder_depth_against_exact_treedepth(g):
    exact = oracles.brute_treedepth(g).value
    td = build_weighted_treedepth(singleton_partition(g))
    assert exact <= td.depth <= 2 * exact


@given(disk_graphs(max_n=10))
@settings(max_examples=30, deadline=None)
def test_builder_depth_is_an_upper_bound(instance):
    g, _ = instance
    td = build_weighted_treedepth(singleton_partition(g))
    assert verify_decomposition(td, g) == []
    assert td.depth >= oracles.brute_treedepth(g).value


def test_separator_tree_on_path():
    q = singleton_partition(path_graph(3))
    sigma = build_separator_tree(q, 1)
    # inflated weights 2, 3, 2 make an end part the lightest separator
    root = sigma.nodes[sigma.root]
    assert root.parts == (0,)
    assert root.neighborhood == (0, 1)
    assert sigma.neighborhood_weight(sigma.root, q) == pytest.approx(2.0)
    assert [node.parts for node in sigma.nodes] == [(0,), (2,), (1,)]
    assert sigma.path(2) == [2, 1, 0]


@given(disk_graphs(max_n=30))
@settings(max_examples=20, deadline=None)
def test_separator_tree_covers_every_vertex_once(instance):
    g, q = instance
    sigma = build_separator_tree(q, 2)
    covered = [
        v for i in range(len(sigma.nodes))
        for v in sigma.separator_vertices(i, q)
    ]
    assert sorted(covered) == list(range(g.n))
    for node in sigma.nodes:
        total = sum(q.size(p) for p in node.subproblem)
        for side in node.sides:
            assert len(side) <= ALPHA * total + 1e-9


def test_separator_tree_needs_positive_r():
    q = singleton_partition(path_graph(2))
    with pytest.raises(ValueError, match="at least 1"):
        build_separator_tree(q, 0)


def test_expand_to_unweighted():
    g = complete_graph(3)
    one_part = QuotientGraph(g, [(0, 1, 2)], [[(0, 1, 2)]])
    h = expand_to_unweighted(one_part)
    assert h.n == 2 and h.num_edges == 1
    h = expand_to_unweighted(singleton_partition(path_graph(2)))
    assert h.n == 2 and h.edges() == [(0, 1)]


@given(disk_graphs(max_n=30))
@settings(max_examples=20, deadline=None)
def test_expansion_is_not_larger(instance):
    g, q = instance
    assert expand_to_unweighted(q).n <= g.n


def test_unweighted_paths():
    single = TreedepthDecomposition([-1], [0], [1.0])
    assert build_unweighted_treedepth(single, [3]).depth == 3
    chain = TreedepthDecomposition([-1, 0], [0, 1], [1.0, 1.0])
    td = build_unweighted_treedepth(chain, [2, 2])
    assert td.depth == 4
    assert td.mode == "unweighted"
    with pytest.raises(ValueError, match="positive kernel size"):
        build_unweighted_treedepth(chain, [0, 2])


def test_add_universal_root():
    q = singleton_partition(path_graph(3))
    td = build_weighted_treedepth(q)
    augmented = add_universal_root(td, 3)
    assert augmented.roots == [td.num_nodes]
    assert augmented.depth == td.depth + 1


@pytest.mark.slow
def test_weighted_depth_scales_with_sqrt_n():
    ratios = []
    for n in (100, 300, 1000, 3000):
        worst = 0.0
        for seed in range(5):
            instance = generate_random_instance(n, 2, 1.0, seed)
            g = build_intersection_graph(instance)
            td = build_weighted_treedepth(build_kappa_partition(g, instance))
            worst = max(worst, td.weighted_depth / math.sqrt(n))
        ratios.append(worst)
    assert max(ratios) <= 2 * min(ratios)
