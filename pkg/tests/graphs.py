"""Small named graphs and hypothesis strategies shared by the tests."""

from itertools import combinations

from hypothesis import strategies as st

from geosolve.decomposition import build_weighted_treedepth
from geosolve.geometry import (
    IntersectionGraph,
    QuotientGraph,
    build_intersection_graph,
    build_kappa_partition,
    generate_random_instance,
    robust_clique_partition,
)


def path_graph(m: int) -> IntersectionGraph:
    return IntersectionGraph.from_edges(m, [(i, i + 1) for i in range(m - 1)])


def cycle_graph(m: int) -> IntersectionGraph:
    return IntersectionGraph.from_edges(
        m, [(i, (i + 1) % m) for i in range(m)]
    )


def complete_graph(m: int) -> IntersectionGraph:
    return IntersectionGraph.from_edges(m, combinations(range(m), 2))


def star_graph(leaves: int) -> IntersectionGraph:
    return IntersectionGraph.from_edges(
        leaves + 1, [(0, i) for i in range(1, leaves + 1)]
    )


def singleton_partition(g: IntersectionGraph) -> QuotientGraph:
    return QuotientGraph(
        g, [(v,) for v in range(g.n)], [[(v,)] for v in range(g.n)]
    )


def decompose(g: IntersectionGraph):
    q = robust_clique_partition(g)
    return q, build_weighted_treedepth(q)


def random_disks(n: int, seed: int, density: float = 0.2):
    """A random unit-disk graph with its grid partition."""
    instance = generate_random_instance(n, 2, density, seed)
    g = build_intersection_graph(instance)
    return g, build_kappa_partition(g, instance)


@st.composite
def graphs(draw, min_n: int = 0, max_n: int = 6):
    n = draw(st.integers(min_n, max_n))
    pairs = list(combinations(range(n), 2))
    present = draw(
        st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs))
    )
    return IntersectionGraph.from_edges(
        n, [pair for pair, keep in zip(pairs, present) if keep]
    )


@st.composite
def disk_graphs(draw, min_n: int = 1, max_n: int = 12):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    density = draw(st.sampled_from([0.1, 0.2, 0.4]))
    return random_disks(n, seed, density)


def clique_parts(sizes, cross_edges=()):
    """Disjoint cliques of the given sizes as an explicit 1-partition."""
    parts, edges, start = [], list(cross_edges), 0
    for size in sizes:
        part = tuple(range(start, start + size))
        edges += combinations(part, 2)
        parts.append(part)
        start += size
    g = IntersectionGraph.from_edges(start, edges)
    return g, QuotientGraph(g, parts, [[part] for part in parts])


@st.composite
def compressible_clique_graphs(draw):
    """Clique-part graphs whose kernel is smaller than the graph.

    Either a clique of 14 or 15 vertices with one extra hub vertex, so
    that every crossing edge shares the hub, or a few disjoint cliques
    of which the first has at least four vertices.
    """
    if draw(st.booleans()):
        size = draw(st.integers(14, 15))
        seen = draw(
            st.lists(st.booleans(), min_size=size, max_size=size)
        )
        cross = [(v, size) for v in range(size) if seen[v]]
        return clique_parts([size, 1], cross)
    sizes = [draw(st.integers(4, 6))]
    sizes += draw(st.lists(st.integers(2, 5), max_size=2))
    return clique_parts(sizes)
