import pytest
from graphs import (
    complete_graph,
    compressible_clique_graphs,
    cycle_graph,
    disk_graphs,
    path_graph,
    random_disks,
    star_graph,
)
from hypothesis import given, settings
from hypothesis import strategies as st

from geosolve import oracles
from geosolve.cycle_cover import (
    CycleCover,
    ExactCycleBackend,
    boundary_vertices,
    build_compressed_treedepth,
    build_kernel,
    canonical_violations,
    canonicalize,
    get_cycle_backend,
    hamiltonian_cycle,
    hamiltonian_path,
    reroute_into_kernel,
    solve_cycle_cover,
)
from geosolve.geometry import (
    IntersectionGraph,
    QuotientGraph,
    robust_clique_partition,
)


def _two_cliques(size: int = 15):
    """Two cliques where vertex ``size`` also sees the whole first one."""
    first, second = range(size), range(size, 2 * size)
    edges = [(u, v) for u in first for v in first if u < v]
    edges += [(u, v) for u in second for v in second if u < v]
    edges += [(u, size) for u in first]
    g = IntersectionGraph.from_edges(2 * size, edges)
    parts = [tuple(first), tuple(second)]
    return g, QuotientGraph(g, parts, [[p] for p in parts])


@given(disk_graphs(max_n=12))
@settings(max_examples=30, deadline=None)
def test_kernel_decision_matches_oracle(instance):
    g, q = instance
    for k in (1, 2, 3):
        result = solve_cycle_cover(g, q, k)
        assert result.answer == oracles.brute_cycle_cover(g, k).value
        if result.answer and result.stats.extra["h_vertices"] == g.n:
            cycles = result.stats.extra["cycles"]
            assert oracles.is_cycle_cover(g, cycles, k)


@given(compressible_clique_graphs(), st.integers(1, 3))
@settings(max_examples=25, deadline=None)
def test_compressed_decision_matches_oracle(instance, k):
    g, q = instance
    result = solve_cycle_cover(g, q, k)
    assert result.stats.extra["h_vertices"] < g.n
    assert result.answer == oracles.brute_cycle_cover(g, k).value


def test_two_cliques_decision():
    # vertex 15 is a cut vertex, so no single cycle covers both cliques
    g, q = _two_cliques()
    assert not solve_cycle_cover(g, q, 1).answer
    assert solve_cycle_cover(g, q, 2).answer


def test_canonical_covers():
    checked = 0
    for seed in range(20):
        g, q = random_disks(12, seed, density=1.5)
        found = oracles.brute_cycle_cover(g, g.n).witness
        if found is None:
            continue
        checked += 1
        cover = canonicalize(g, q, CycleCover(found))
        assert cover.validate(g) == []
        assert canonical_violations(q, cover) == []
        for i in range(q.num_parts):
            assert len(boundary_vertices(cover, q, i)) <= 2 * q.delta
    assert checked > 0


def test_canonicalize_merges_cycles_inside_a_part():
    g = complete_graph(6)
    q = robust_clique_partition(g)
    cover = canonicalize(g, q, CycleCover([(0, 1, 2), (3, 4, 5)]))
    assert len(cover) == 1
    assert cover.steps["merge_part"] == 1
    assert cover.validate(g) == []


def test_canonicalize_rejects_invalid_covers():
    g = path_graph(3)
    q = robust_clique_partition(g)
    with pytest.raises(ValueError, match="Invalid cycle cover"):
        canonicalize(g, q, CycleCover([(0, 1, 2)]))


def test_kernel_sets():
    g, q = _two_cliques()
    kernel = build_kernel(g, q)
    assert kernel.delta == 1
    assert kernel.matchings[(0, 1)] == [(0, 15)]
    assert kernel.kernel[0] == tuple(range(12))
    assert kernel.kernel[1] == tuple(range(15, 23))
    assert kernel.graph.n == 20
    assert kernel.compression_ratio == pytest.approx(20 / 30)
    assert all(len(u) <= kernel.size_bound for u in kernel.kernel)
    td = build_compressed_treedepth(q, kernel)
    assert td.mode == "unweighted"
    assert sorted(td.phi) == list(range(20))


def test_reroute_into_kernel():
    g, q = _two_cliques()
    kernel = build_kernel(g, q)
    cover = CycleCover(
        [(15, 14) + tuple(range(14)), tuple(range(16, 30))]
    )
    assert canonical_violations(q, cover) == []
    moved, inside = reroute_into_kernel(g, q, kernel, cover)
    assert inside
    assert moved.steps["kernel_swaps"] == 2
    assert moved.validate(g) == []
    assert boundary_vertices(moved, q, 0) <= set(kernel.kernel[0])


def test_kernel_needs_one_partition():
    g = path_graph(3)
    q = robust_clique_partition(g, kappa_target=2)
    assert not q.is_one_partition()
    with pytest.raises(ValueError, match="1-partition"):
        build_kernel(g, q)
    with pytest.raises(ValueError, match="1-partition"):
        solve_cycle_cover(g, q, 1)


def test_hamiltonian_cycle():
    g = cycle_graph(5)
    assert hamiltonian_cycle(g, robust_clique_partition(g)).answer
    g = path_graph(4)
    assert not hamiltonian_cycle(g, robust_clique_partition(g)).answer
    g = path_graph(2)
    assert not hamiltonian_cycle(g, robust_clique_partition(g)).answer


def test_hamiltonian_path():
    g = path_graph(4)
    result = hamiltonian_path(g, robust_clique_partition(g))
    assert result.problem == "hampath" and result.answer
    g = star_graph(3)
    assert not hamiltonian_path(g, robust_clique_partition(g)).answer
    g = path_graph(1)
    assert hamiltonian_path(g, robust_clique_partition(g)).answer


def test_cycle_cover_of_disjoint_triangles():
    g = IntersectionGraph.from_edges(
        6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]
    )
    q = robust_clique_partition(g)
    assert not solve_cycle_cover(g, q, 1).answer
    result = solve_cycle_cover(g, q, 2)
    assert result.answer
    assert result.params == {"k": 2, "backend": "exact"}
    assert result.stats.extra["exponential_space"]


def test_backend_factory():
    assert get_cycle_backend() is ExactCycleBackend
    with pytest.raises(NotImplementedError):
        get_cycle_backend("treedepth-cnc")
    with pytest.raises(ValueError, match="Unknown backend"):
        get_cycle_backend("sat")


def test_cycle_cover_needs_positive_k():
    g = cycle_graph(5)
    with pytest.raises(ValueError, match="at least 1"):
        solve_cycle_cover(g, robust_clique_partition(g), 0)
