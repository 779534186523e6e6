"""Polynomial-space branching over decompositions.

Independent Set branches over the weighted treedepth decomposition and
r-Dominating Set over the separator tree. Both keep only the current
branch state on the stack and thread the best solution found back up the
recursion.
"""

import logging
from itertools import combinations, product
from typing import Iterable, Iterator, Sequence

import networkx as nx

from .decomposition import SeparatorTree, TreedepthDecomposition
from .geometry import IntersectionGraph, QuotientGraph
from .results import SolverResult, SolverStats

logger = logging.getLogger(__name__)

_TOL = 1e-12


def independent_choices(
    g: IntersectionGraph,
    q: QuotientGraph,
    part: int,
    disallowed: frozenset[int],
) -> list[tuple[int, ...]]:
    """Independent subsets of a part picking at most one vertex per clique.

    Vertices in ``disallowed`` are never picked.
    """
    options = [
        [None] + [v for v in clique if v not in disallowed]
        for clique in q.cliques[part]
    ]
    choices = set()
    for combo in product(*options):
        chosen = sorted({v for v in combo if v is not None})
        if all(
            not g.has_edge(u, v)
            for i, u in enumerate(chosen)
            for v in chosen[i + 1 :]
        ):
            choices.add(tuple(chosen))
    return sorted(choices)


def _better(value, solution, best_value, best_solution) -> bool:
    if best_value is None or value > best_value + _TOL:
        return True
    return abs(value - best_value) <= _TOL and solution < best_solution


def max_weight_independent_set(
    g: IntersectionGraph,
    q: QuotientGraph,
    td: TreedepthDecomposition,
    vertex_weights: Sequence[float] | None = None,
) -> SolverResult:
    """Maximum weight independent set by branching over ``td``.

    At every node the solver guesses the independent set inside the
    node's part among the vertices not adjacent to earlier guesses, and
    solves the children independently with the grown disallowed set.
    Ties go to the lexicographically smallest solution.

    Parameters
    ----------
    g : IntersectionGraph
        The graph.
    q : QuotientGraph
        A kappa-partition of ``g``.
    td : TreedepthDecomposition
        Weighted treedepth decomposition of ``q``.
    vertex_weights : sequence of float, optional
        Non-negative vertex weights. Unit weights when omitted.
    """
    if vertex_weights is None:
        weights = [1] * g.n
        problem = "is"
    else:
        weights = list(vertex_weights)
        problem = "wis"
        if len(weights) != g.n:
            raise ValueError(
                f"Expected {g.n} vertex weights, got {len(weights)}"
            )
        if any(w < 0 for w in weights):
            raise ValueError("Vertex weights must be non-negative")
    stats = SolverStats()

    def solve(node: int, disallowed: frozenset[int]):
        stats.push(len(disallowed))
        part = td.phi[node]
        choices = independent_choices(g, q, part, disallowed)
        stats.branching[node] = len(choices)
        best_value, best_solution = None, None
        for chosen in choices:
            blocked = disallowed.union(
                u for v in chosen for u in g.neighbors(v)
            )
            value = sum(weights[v] for v in chosen)
            solution = list(chosen)
            for child in td.children(node):
                child_value, child_solution = solve(child, blocked)
                value += child_value
                solution.extend(child_solution)
            solution = tuple(sorted(solution))
            if _better(value, solution, best_value, best_solution):
                best_value, best_solution = value, solution
        stats.pop(len(disallowed))
        return best_value, best_solution

    total, witness = 0, []
    for root in td.roots:
        value, solution = solve(root, frozenset())
        total += value
        witness.extend(solution)
    logger.info(
        f"Independent set of weight {total} found with {stats.calls} calls"
    )
    return SolverResult(
        problem=problem,
        answer=True,
        value=total,
        witness=witness,
        stats=stats,
    )


def max_independent_set(
    g: IntersectionGraph, q: QuotientGraph, td: TreedepthDecomposition
) -> SolverResult:
    return max_weight_independent_set(g, q, td)


def distance_balls(g: IntersectionGraph, r: int) -> list[frozenset[int]]:
    """Vertices within distance ``r`` of every vertex."""
    graph = g.to_networkx()
    return [
        frozenset(nx.single_source_shortest_path_length(graph, v, cutoff=r))
        for v in range(g.n)
    ]


def r_dominates(
    g: IntersectionGraph, dominators: Iterable[int], r: int
) -> bool:
    """Whether every vertex is within distance ``r`` of ``dominators``."""
    sources = set(dominators)
    if not sources:
        return g.n == 0
    reached = nx.multi_source_dijkstra_path_length(
        g.to_networkx(), sources, cutoff=r
    )
    return len(reached) == g.n


def _dominator_choices(
    q: QuotientGraph, parts: Sequence[int], cap: int
) -> Iterator[frozenset[int]]:
    per_part = [
        [
            subset
            for size in range(min(cap, q.size(p)) + 1)
            for subset in combinations(q.parts[p], size)
        ]
        for p in parts
    ]
    for combo in product(*per_part):
        yield frozenset(v for subset in combo for v in subset)


def min_r_dominating_set(
    g: IntersectionGraph,
    q: QuotientGraph,
    sigma: SeparatorTree,
    r: int,
) -> SolverResult:
    """Minimum r-dominating set by branching over the separator tree.

    At a node the solver picks the dominators inside the still unmarked
    parts of the node's r-neighborhood, at most kappa^2 (Delta + 1) per
    part, and marks those parts. Every vertex whose r-ball is then fully
    decided, which includes the node's separator, must be dominated
    before the two sides are solved independently.
    """
    if r < 1:
        raise ValueError(f"r must be at least 1, got {r}")
    if sigma.r != r:
        raise ValueError(
            f"Separator tree was built for r={sigma.r}, not r={r}"
        )
    cap = q.kappa**2 * (q.delta + 1)
    balls = distance_balls(g, r)
    stats = SolverStats()
    stats.extra["cap"] = cap

    def solve(index: int, chosen: frozenset[int], marked: frozenset[int]):
        stats.push(len(chosen))
        node = sigma.nodes[index]
        free = [p for p in node.neighborhood if p not in marked]
        now_marked = marked.union(free)
        separator = sigma.separator_vertices(index, q)
        best_size, best_solution = None, None
        branches = 0
        for extra in _dominator_choices(q, free, cap):
            branches += 1
            if best_size is not None and len(extra) > best_size:
                continue
            current = chosen | extra
            if any(not (balls[v] & current) for v in separator):
                continue
            size, solution = len(extra), sorted(extra)
            for child in node.children:
                child_size, child_solution = solve(child, current, now_marked)
                if child_size is None:
                    break
                size += child_size
                solution.extend(child_solution)
            else:
                solution = tuple(sorted(solution))
                if (
                    best_size is None
                    or size < best_size
                    or (size == best_size and solution < best_solution)
                ):
                    best_size, best_solution = size, solution
        stats.branching[index] = max(stats.branching.get(index, 0), branches)
        stats.pop(len(chosen))
        return best_size, best_solution

    if sigma.root is None:
        size, witness = 0, ()
    else:
        size, witness = solve(sigma.root, frozenset(), frozenset())
    if size is None or not r_dominates(g, witness, r):
        raise RuntimeError("Separator-tree recursion found no dominating set")
    logger.info(
        f"{r}-dominating set of size {size} found with {stats.calls} calls"
    )
    return SolverResult(
        problem="rds",
        answer=True,
        value=size,
        witness=list(witness),
        stats=stats,
        params={"r": r},
    )
