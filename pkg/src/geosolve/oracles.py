"""Brute-force reference solvers and feasibility checkers.

Nothing here shares code with the decomposition-based solvers. The
checkers follow the problem definitions through ``networkx`` and the
solvers enumerate vertex subsets as bitmasks.
"""

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Iterable, Sequence

import networkx as nx

from .geometry import IntersectionGraph

logger = logging.getLogger(__name__)

ORACLE_CAP = 18
CYCLE_CAP = 16
TREEDEPTH_CAP = 10


class OracleCapExceeded(ValueError):
    """Raised when an instance is larger than an oracle allows."""


@dataclass
class OracleResult:
    """Optimum, one witness and the number of candidates looked at.

    ``value`` is ``None`` for infeasible optimisation instances and a
    bool for decision problems. Cycle oracles return a list of cycles as
    the witness.
    """

    value: Any
    witness: list | None
    enumerated: int = 0

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "witness": self.witness,
            "enumerated": self.enumerated,
        }


def _check_cap(g: IntersectionGraph, cap: int, name: str) -> None:
    if g.n > cap:
        raise OracleCapExceeded(
            f"{name} is capped at {cap} vertices, got {g.n}"
        )


def _masks(g: IntersectionGraph) -> list[int]:
    return [sum(1 << u for u in g.neighbors(v)) for v in range(g.n)]


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _to_mask(vertices: Iterable[int]) -> int:
    return sum(1 << v for v in set(vertices))


def _component_masks(nbr: Sequence[int], mask: int) -> list[int]:
    components = []
    while mask:
        seen = mask & -mask
        frontier = seen
        while frontier:
            reach = 0
            for v in _bits(frontier):
                reach |= nbr[v]
            frontier = reach & mask & ~seen
            seen |= frontier
        components.append(seen)
        mask &= ~seen
    return components


def _is_connected_mask(nbr: Sequence[int], mask: int) -> bool:
    return len(_component_masks(nbr, mask)) <= 1


def _is_forest_mask(nbr: Sequence[int], mask: int) -> bool:
    edges = sum((nbr[v] & mask).bit_count() for v in _bits(mask)) // 2
    return edges == mask.bit_count() - len(_component_masks(nbr, mask))


def _is_bipartite_mask(nbr: Sequence[int], mask: int) -> bool:
    colour: dict[int, int] = {}
    for start in _bits(mask):
        if start in colour:
            continue
        colour[start] = 0
        stack = [start]
        while stack:
            v = stack.pop()
            for u in _bits(nbr[v] & mask):
                if u not in colour:
                    colour[u] = 1 - colour[v]
                    stack.append(u)
                elif colour[u] == colour[v]:
                    return False
    return True


def is_independent_set(g: IntersectionGraph, S: Iterable[int]) -> bool:
    S = sorted(set(S))
    return not any(g.has_edge(u, v) for u, v in combinations(S, 2))


def is_r_dominating_set(
    g: IntersectionGraph, D: Iterable[int], r: int
) -> bool:
    D = set(D)
    if g.n == 0:
        return True
    if not D:
        return False
    reached = nx.multi_source_dijkstra_path_length(
        g.to_networkx(), D, cutoff=r
    )
    return len(reached) == g.n


def is_steiner_tree(
    g: IntersectionGraph, terminals: Iterable[int], X: Iterable[int]
) -> bool:
    X = set(X)
    if not X or not set(terminals) <= X:
        return False
    return nx.is_connected(g.to_networkx().subgraph(X))


def is_connected_vertex_cover(
    g: IntersectionGraph, X: Iterable[int]
) -> bool:
    X = set(X)
    if any(u not in X and v not in X for u, v in g.edges()):
        return False
    return not X or nx.is_connected(g.to_networkx().subgraph(X))


def is_feedback_vertex_set(g: IntersectionGraph, X: Iterable[int]) -> bool:
    rest = set(range(g.n)) - set(X)
    return not rest or nx.is_forest(g.to_networkx().subgraph(rest))


def is_odd_cycle_transversal(
    g: IntersectionGraph, X: Iterable[int], connected: bool = False
) -> bool:
    X = set(X)
    graph = g.to_networkx()
    rest = set(range(g.n)) - X
    if rest and not nx.is_bipartite(graph.subgraph(rest)):
        return False
    return not connected or not X or nx.is_connected(graph.subgraph(X))


def is_cycle_cover(
    g: IntersectionGraph,
    cycles: Sequence[Sequence[int]],
    k: int | None = None,
) -> bool:
    """Vertex-disjoint cycles of length >= 3 covering every vertex."""
    seen: set[int] = set()
    for cycle in cycles:
        if len(cycle) < 3 or seen.intersection(cycle):
            return False
        if len(set(cycle)) != len(cycle):
            return False
        seen.update(cycle)
        for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]):
            if not g.has_edge(a, b):
                return False
    if k is not None and len(cycles) > k:
        return False
    return seen == set(range(g.n))


def brute_is(
    g: IntersectionGraph,
    weights: Sequence[float] | None = None,
    cap: int = ORACLE_CAP,
) -> OracleResult:
    """Maximum (weight) independent set over all independent sets.

    Ties go to the lexicographically smallest vertex list.
    """
    _check_cap(g, cap, "brute_is")
    weights = [1] * g.n if weights is None else list(weights)
    nbr = _masks(g)
    best: tuple | None = None
    count = 0

    def extend(i: int, chosen: int, blocked: int, total: float):
        nonlocal best, count
        if i == g.n:
            count += 1
            key = (-total, sorted(_bits(chosen)))
            if best is None or key < best:
                best = key
            return
        extend(i + 1, chosen, blocked, total)
        if not blocked >> i & 1:
            extend(
                i + 1, chosen | 1 << i, blocked | nbr[i], total + weights[i]
            )

    extend(0, 0, 0, 0)
    return OracleResult(-best[0], best[1], count)


def _smallest(
    candidates: Sequence[int],
    accept,
    base: int = 0,
) -> OracleResult:
    count = 0
    for size in range(len(candidates) + 1):
        for subset in combinations(candidates, size):
            count += 1
            mask = base | _to_mask(subset)
            if accept(mask):
                witness = sorted(_bits(mask))
                return OracleResult(len(witness), witness, count)
    return OracleResult(None, None, count)


def brute_rds(
    g: IntersectionGraph, r: int, cap: int = ORACLE_CAP
) -> OracleResult:
    """Minimum r-dominating set."""
    _check_cap(g, cap, "brute_rds")
    if r < 1:
        raise ValueError(f"r must be at least 1, got {r}")
    graph = g.to_networkx()
    balls = [
        _to_mask(nx.single_source_shortest_path_length(graph, v, cutoff=r))
        for v in range(g.n)
    ]
    full = (1 << g.n) - 1

    def dominates(mask: int) -> bool:
        reached = 0
        for v in _bits(mask):
            reached |= balls[v]
        return reached == full

    return _smallest(range(g.n), dominates)


def brute_steiner(
    g: IntersectionGraph, terminals: Iterable[int], cap: int = ORACLE_CAP
) -> OracleResult:
    """Smallest connected vertex set containing the terminals.

    Infeasible instances give ``value=None``.
    """
    _check_cap(g, cap, "brute_steiner")
    terminals = sorted(set(terminals))
    if not terminals or not all(0 <= t < g.n for t in terminals):
        raise ValueError(f"Invalid terminal set {terminals}")
    nbr = _masks(g)
    others = [v for v in range(g.n) if v not in set(terminals)]
    return _smallest(
        others,
        lambda mask: _is_connected_mask(nbr, mask),
        base=_to_mask(terminals),
    )


def brute_cvc(g: IntersectionGraph, cap: int = ORACLE_CAP) -> OracleResult:
    """Minimum connected vertex cover."""
    _check_cap(g, cap, "brute_cvc")
    nbr = _masks(g)
    edges = g.edges()

    def accept(mask: int) -> bool:
        if any(not (mask >> u & 1 or mask >> v & 1) for u, v in edges):
            return False
        return _is_connected_mask(nbr, mask)

    return _smallest(range(g.n), accept)


def brute_fvs(g: IntersectionGraph, cap: int = ORACLE_CAP) -> OracleResult:
    """Minimum feedback vertex set."""
    _check_cap(g, cap, "brute_fvs")
    nbr = _masks(g)
    full = (1 << g.n) - 1
    return _smallest(
        range(g.n), lambda mask: _is_forest_mask(nbr, full & ~mask)
    )


def brute_oct(
    g: IntersectionGraph, connected: bool = False, cap: int = ORACLE_CAP
) -> OracleResult:
    """Minimum (connected) odd cycle transversal."""
    _check_cap(g, cap, "brute_oct")
    nbr = _masks(g)
    full = (1 << g.n) - 1

    def accept(mask: int) -> bool:
        if not _is_bipartite_mask(nbr, full & ~mask):
            return False
        return not connected or _is_connected_mask(nbr, mask)

    return _smallest(range(g.n), accept)


def _hamiltonian_ends(nbr: Sequence[int], n: int) -> list[int]:
    """Held-Karp table over vertex subsets.

    ``ends[mask]`` has bit ``v`` set when a path through exactly the
    vertices of ``mask`` runs from the lowest vertex of ``mask`` to
    ``v``.
    """
    ends = [0] * (1 << n)
    for s in range(n):
        ends[1 << s] = 1 << s
    for mask in range(1, 1 << n):
        reached = ends[mask]
        if not reached:
            continue
        s = (mask & -mask).bit_length() - 1
        step = 0
        for v in _bits(reached):
            step |= nbr[v]
        for u in _bits(step & ~mask & ~((2 << s) - 1)):
            ends[mask | 1 << u] |= 1 << u
    return ends


def brute_cycle_cover(
    g: IntersectionGraph, k: int, cap: int = CYCLE_CAP
) -> OracleResult:
    """Whether at most ``k`` disjoint cycles cover every vertex.

    A Held-Karp table marks the vertex subsets that carry a Hamiltonian
    cycle. The cover then splits off, in turn, a cycle subset holding
    the lowest remaining vertex.
    """
    _check_cap(g, cap, "brute_cycle_cover")
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    nbr = _masks(g)
    ends = _hamiltonian_ends(nbr, g.n)
    count = 0

    def closing(mask: int) -> int:
        if mask.bit_count() < 3:
            return 0
        return ends[mask] & nbr[(mask & -mask).bit_length() - 1]

    def cycle_of(mask: int) -> list[int]:
        s = (mask & -mask).bit_length() - 1
        v = (closing(mask) & -closing(mask)).bit_length() - 1
        path = [v]
        while mask != 1 << s:
            mask ^= 1 << v
            back = ends[mask] & nbr[v]
            v = (back & -back).bit_length() - 1
            path.append(v)
        return path[::-1]

    on_cycle = 0
    for mask in range(1 << g.n):
        if closing(mask):
            on_cycle |= mask

    # largest budget known to fail for each remaining set
    failed: dict[int, int] = {}

    def cover(remaining: int, budget: int) -> list[list[int]] | None:
        nonlocal count
        if not remaining:
            return []
        if budget == 0 or remaining & ~on_cycle:
            return None
        if failed.get(remaining, 0) >= budget:
            return None
        if budget == 1:
            count += 1
            return [cycle_of(remaining)] if closing(remaining) else None
        low = remaining & -remaining
        others = remaining ^ low
        sub = others
        while sub:
            cycle = sub | low
            if closing(cycle):
                count += 1
                rest = cover(remaining ^ cycle, budget - 1)
                if rest is not None:
                    return [cycle_of(cycle)] + rest
            sub = (sub - 1) & others
        failed[remaining] = budget
        return None

    cycles = cover((1 << g.n) - 1, k)
    return OracleResult(cycles is not None, cycles, count)


def brute_hamiltonian(
    g: IntersectionGraph, cap: int = CYCLE_CAP
) -> OracleResult:
    if g.n < 3:
        _check_cap(g, cap, "brute_hamiltonian")
        return OracleResult(False, None, 0)
    return brute_cycle_cover(g, 1, cap)


def brute_hamiltonian_path(
    g: IntersectionGraph, cap: int = CYCLE_CAP
) -> OracleResult:
    """Hamiltonian path by a memoized search over (visited, end) states."""
    _check_cap(g, cap, "brute_hamiltonian_path")
    if g.n <= 1:
        return OracleResult(True, list(range(g.n)), 1)
    nbr = _masks(g)
    full = (1 << g.n) - 1
    failed: set[tuple[int, int]] = set()
    path: list[int] = []

    def extend(v: int, used: int) -> bool:
        if used == full:
            return True
        if (used, v) in failed:
            return False
        for u in _bits(nbr[v] & ~used):
            path.append(u)
            if extend(u, used | 1 << u):
                return True
            path.pop()
        failed.add((used, v))
        return False

    for start in range(g.n):
        path[:] = [start]
        if extend(start, 1 << start):
            return OracleResult(True, list(path), len(failed) + 1)
    return OracleResult(False, None, len(failed))


def brute_treedepth(
    g: IntersectionGraph, cap: int = TREEDEPTH_CAP
) -> OracleResult:
    """Exact treedepth: the best root of each component, memoized on
    vertex subsets."""
    _check_cap(g, cap, "brute_treedepth")
    nbr = _masks(g)
    memo: dict[int, int] = {0: 0}

    def depth(mask: int) -> int:
        if mask in memo:
            return memo[mask]
        components = _component_masks(nbr, mask)
        if len(components) > 1:
            value = max(depth(c) for c in components)
        elif mask.bit_count() == 1:
            value = 1
        else:
            value = 1 + min(depth(mask & ~(1 << v)) for v in _bits(mask))
        memo[mask] = value
        return value

    return OracleResult(depth((1 << g.n) - 1), None, len(memo))
