"""Cycle Cover, Hamiltonian Cycle and Hamiltonian Path.

The graph is compressed to a kernel that keeps, in every clique part,
only the vertices a canonical cycle cover may need on its boundary.
Deciding cycle covers on the kernel is delegated to a backend.
"""

import logging
from dataclasses import dataclass, field
from typing import Sequence

from .decomposition import (
    TreedepthDecomposition,
    build_unweighted_treedepth,
    build_weighted_treedepth,
    verify_decomposition,
)
from .geometry import IntersectionGraph, QuotientGraph
from .results import SolverResult, SolverStats

logger = logging.getLogger(__name__)


@dataclass
class CycleCover:
    """Vertex-disjoint cycles, each a cyclic vertex sequence.

    ``steps`` counts the operations applied by ``canonicalize``.
    """

    cycles: list[tuple[int, ...]]
    steps: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        self.cycles = [tuple(int(v) for v in c) for c in self.cycles]

    def __len__(self) -> int:
        return len(self.cycles)

    @property
    def vertices(self) -> set[int]:
        return {v for cycle in self.cycles for v in cycle}

    def edges(self) -> list[tuple[int, int]]:
        return [
            (cycle[p], cycle[(p + 1) % len(cycle)])
            for cycle in self.cycles
            for p in range(len(cycle))
        ]

    def validate(self, g: IntersectionGraph, spanning: bool = True):
        """Return the violated cover properties, empty when valid."""
        violations = []
        seen: set[int] = set()
        for i, cycle in enumerate(self.cycles):
            if len(cycle) < 3:
                violations.append(f"cycle {i} has {len(cycle)} vertices")
            if len(set(cycle)) != len(cycle) or seen.intersection(cycle):
                violations.append(f"cycle {i} repeats a vertex")
            seen.update(cycle)
        for a, b in self.edges():
            if not (0 <= a < g.n and 0 <= b < g.n) or not g.has_edge(a, b):
                violations.append(f"({a}, {b}) is not an edge")
        if spanning and seen != set(range(g.n)):
            missing = sorted(set(range(g.n)) - seen)
            violations.append(f"vertices {missing} are not covered")
        return violations

    def to_dict(self) -> dict:
        return {"cycles": [list(c) for c in self.cycles], **self.steps}


def _require_one_partition(q: QuotientGraph) -> None:
    if not q.is_one_partition():
        raise ValueError("Cycle cover kernels need a 1-partition")


def _crossings(
    cycle: Sequence[int], part_of: Sequence[int]
) -> dict[tuple[int, int], list[int]]:
    """Positions ``p`` whose edge to ``p + 1`` crosses parts, by pair."""
    found: dict[tuple[int, int], list[int]] = {}
    for p, v in enumerate(cycle):
        i, j = part_of[v], part_of[cycle[(p + 1) % len(cycle)]]
        if i != j:
            found.setdefault((min(i, j), max(i, j)), []).append(p)
    return found


def _reroute(cycles: list[tuple[int, ...]], part_of) -> bool:
    for c, cycle in enumerate(cycles):
        for positions in _crossings(cycle, part_of).values():
            if len(positions) < 3:
                continue
            by_direction: dict[int, int] = {}
            for p in positions:
                origin = part_of[cycle[p]]
                if origin in by_direction:
                    p1, p2 = by_direction[origin], p
                    cycles[c] = (
                        cycle[: p1 + 1]
                        + cycle[p1 + 1 : p2 + 1][::-1]
                        + cycle[p2 + 1 :]
                    )
                    return True
                by_direction[origin] = p
    return False


def _open_at(cycle: tuple[int, ...], p: int, first_part: int, part_of):
    """The path left after deleting the edge at ``p``, ending in
    ``first_part``."""
    path = cycle[p + 1 :] + cycle[: p + 1]
    if part_of[path[-1]] != first_part:
        path = path[::-1]
    return path


def _merge_pair(cycles: list[tuple[int, ...]], part_of) -> bool:
    owner: dict[tuple[int, int], tuple[int, int]] = {}
    for c, cycle in enumerate(cycles):
        for pair, positions in _crossings(cycle, part_of).items():
            if pair in owner and owner[pair][0] != c:
                d, pos = owner[pair]
                i = pair[0]
                # both paths end in part i and start in part j
                a = _open_at(cycles[d], pos, i, part_of)
                b = _open_at(cycle, positions[0], i, part_of)
                merged = a + b[::-1]
                cycles[:] = [
                    x for k, x in enumerate(cycles) if k not in (c, d)
                ] + [merged]
                return True
            owner.setdefault(pair, (c, positions[0]))
    return False


def _merge_part(cycles: list[tuple[int, ...]], part_of) -> bool:
    for c, cycle in enumerate(cycles):
        parts = {part_of[v] for v in cycle}
        if len(parts) != 1:
            continue
        (i,) = parts
        for d, other in enumerate(cycles):
            if d == c:
                continue
            for p, v in enumerate(other):
                w = other[(p + 1) % len(other)]
                if part_of[v] == i and part_of[w] == i:
                    merged = other[: p + 1] + cycle + other[p + 1 :]
                    cycles[:] = [
                        x for k, x in enumerate(cycles) if k not in (c, d)
                    ] + [merged]
                    return True
    return False


def canonicalize(
    g: IntersectionGraph, q: QuotientGraph, cover: CycleCover
) -> CycleCover:
    """Reroute and merge cycles until the cover is canonical.

    Three operations run to a fixpoint: a cycle crossing between two
    parts three or more times is shortcut inside the parts; two cycles
    crossing the same pair of parts are merged; and a cycle lying in one
    part is spliced into another cycle at an edge inside that part. Each
    step lowers the number of cycles plus crossing edges.
    """
    _require_one_partition(q)
    violations = cover.validate(g, spanning=False)
    if violations:
        raise ValueError(f"Invalid cycle cover: {violations}")
    cycles = list(cover.cycles)
    steps = {"reroute": 0, "merge_pair": 0, "merge_part": 0}
    while True:
        if _reroute(cycles, q.part_of):
            steps["reroute"] += 1
        elif _merge_pair(cycles, q.part_of):
            steps["merge_pair"] += 1
        elif _merge_part(cycles, q.part_of):
            steps["merge_part"] += 1
        else:
            break
    logger.debug(f"Canonicalized cover with {steps}")
    return CycleCover(cycles, steps)


def canonical_violations(q: QuotientGraph, cover: CycleCover) -> list[str]:
    violations = []
    users: dict[tuple[int, int], list[int]] = {}
    inside: dict[int, int] = {}
    for c, cycle in enumerate(cover.cycles):
        for pair, positions in _crossings(cycle, q.part_of).items():
            users.setdefault(pair, []).append(c)
            if len(positions) > 2:
                violations.append(
                    f"cycle {c} crosses parts {pair} {len(positions)} times"
                )
        parts = {q.part_of[v] for v in cycle}
        if len(parts) == 1:
            (i,) = parts
            inside[i] = inside.get(i, 0) + 1
    for pair, cycles in users.items():
        if len(cycles) > 1:
            violations.append(f"cycles {cycles} all cross parts {pair}")
    for i, count in inside.items():
        if count > 1:
            violations.append(f"{count} cycles lie inside part {i}")
    return violations


def boundary_vertices(
    cover: CycleCover, q: QuotientGraph, part: int
) -> set[int]:
    """Vertices of ``part`` on a cycle edge leaving the part."""
    found = set()
    for a, b in cover.edges():
        if q.part_of[a] != q.part_of[b]:
            found.update(v for v in (a, b) if q.part_of[v] == part)
    return found


@dataclass
class KernelSets:
    """Per-part matchings, candidate sets and the compressed graph.

    Pair keys ``(i, j)`` are ordered: ``matchings[(i, j)]`` lists pairs
    ``(u, v)`` with ``u`` in part ``i``. ``kernel[i]`` is the set kept in
    part ``i``, and ``parts[i]`` the same set relabelled in ``graph``.
    """

    delta: int
    matchings: dict[tuple[int, int], list[tuple[int, int]]]
    truncated: dict[tuple[int, int], list[tuple[int, int]]]
    candidates: dict[tuple[int, int], tuple[int, ...]]
    kernel: list[tuple[int, ...]]
    graph: IntersectionGraph | None = field(default=None, repr=False)
    quotient: QuotientGraph | None = field(default=None, repr=False)
    vertex_map: list[int] = field(default_factory=list, repr=False)
    n_original: int = 0

    @property
    def parts(self) -> list[tuple[int, ...]]:
        return self.quotient.parts

    @property
    def size_bound(self) -> int:
        return 36 * self.delta**3 + 4 * self.delta + 3

    @property
    def compression_ratio(self) -> float:
        if self.n_original == 0:
            return 1.0
        return len(self.vertex_map) / self.n_original

    def to_dict(self) -> dict:
        return {
            "kernel": [list(u) for u in self.kernel],
            "h_vertices": len(self.vertex_map),
            "compression_ratio": self.compression_ratio,
            "delta": self.delta,
            "size_bound": self.size_bound,
        }


def _greedy_matching(
    g: IntersectionGraph, left: Sequence[int], right: set[int]
) -> list[tuple[int, int]]:
    used: set[int] = set()
    matching = []
    for u in sorted(left):
        for v in g.neighbors(u):
            if v in right and v not in used:
                matching.append((u, v))
                used.add(v)
                break
    return matching


def build_kernel(g: IntersectionGraph, q: QuotientGraph) -> KernelSets:
    """Candidate boundary sets ``U_i`` for every clique part.

    For a neighbouring part ``j`` a greedy maximal matching ``M_ij`` of
    the edges between the parts is truncated to ``6 Delta`` edges. When
    the matching is that large its endpoints in ``V_i`` are kept;
    otherwise every matched vertex of ``V_j`` also keeps up to
    ``6 Delta - 1`` of its neighbours in ``V_i``. Each part is then
    padded with ``min(4 Delta + 3, |V_i - U_i|)`` more vertices.
    """
    _require_one_partition(q)
    delta = q.delta
    limit = 6 * delta
    matchings: dict[tuple[int, int], list[tuple[int, int]]] = {}
    truncated: dict[tuple[int, int], list[tuple[int, int]]] = {}
    candidates: dict[tuple[int, int], tuple[int, ...]] = {}
    for i, j in q.quotient_edges():
        matching = _greedy_matching(g, q.parts[i], set(q.parts[j]))
        matchings[(i, j)] = matching
        matchings[(j, i)] = [(v, u) for u, v in matching]
    kernel = []
    for i, part in enumerate(q.parts):
        members = set(part)
        chosen: set[int] = set()
        for j in q.neighbors(i):
            matching = matchings[(i, j)]
            truncated[(i, j)] = matching[:limit]
            keep = {u for u, _ in truncated[(i, j)]}
            if len(matching) < limit:
                for _, v in matching:
                    nbrs = [u for u in g.neighbors(v) if u in members]
                    keep.update(nbrs[: limit - 1])
            candidates[(i, j)] = tuple(sorted(keep))
            chosen |= keep
        rest = [v for v in part if v not in chosen]
        chosen.update(rest[: 4 * delta + 3])
        kernel.append(tuple(sorted(chosen)))
    kernel_sets = KernelSets(
        delta, matchings, truncated, candidates, kernel, n_original=g.n
    )
    graph, quotient = compress(g, q, kernel_sets)
    kernel_sets.graph = graph
    kernel_sets.quotient = quotient
    kernel_sets.vertex_map = sorted(v for u in kernel for v in u)
    logger.info(
        f"Cycle cover kernel: {graph.n} of {g.n} vertices kept "
        f"(Delta={delta})"
    )
    return kernel_sets


def compress(
    g: IntersectionGraph, q: QuotientGraph, kernel: KernelSets
) -> tuple[IntersectionGraph, QuotientGraph]:
    """The subgraph induced by the kernel and its clique partition."""
    if len(kernel.kernel) != q.num_parts:
        raise ValueError("Kernel and partition disagree on the parts")
    graph, keep = g.induced_subgraph(v for u in kernel.kernel for v in u)
    index = {v: i for i, v in enumerate(keep)}
    parts = [tuple(index[v] for v in u) for u in kernel.kernel]
    quotient = QuotientGraph(graph, parts, [[p] for p in parts])
    return graph, quotient


def _swap(cycles: list[tuple[int, ...]], mapping: dict[int, int]):
    return [tuple(mapping.get(v, v) for v in c) for c in cycles]


def _partners(cover: CycleCover, v: int) -> list[int]:
    found = set()
    for a, b in cover.edges():
        if a == v:
            found.add(b)
        elif b == v:
            found.add(a)
    return sorted(found)


def _kernel_swap(
    g: IntersectionGraph,
    q: QuotientGraph,
    kernel: KernelSets,
    cycles: list[tuple[int, ...]],
    part: int,
    b: int,
) -> list[tuple[int, ...]] | None:
    cover = CycleCover(cycles)
    boundary = [boundary_vertices(cover, q, i) for i in range(q.num_parts)]

    def valid(trial) -> bool:
        return not CycleCover(trial).validate(g, spanning=False)

    for x in sorted(set(kernel.kernel[part]) - boundary[part]):
        trial = _swap(cycles, {b: x, x: b})
        if valid(trial):
            return trial
    for y in _partners(cover, b):
        j = q.part_of[y]
        if j == part:
            continue
        for x, z in kernel.truncated.get((part, j), []):
            if x in boundary[part] or z in boundary[j]:
                continue
            trial = _swap(cycles, {b: x, x: b, y: z, z: y})
            if valid(trial):
                return trial
    return None


def reroute_into_kernel(
    g: IntersectionGraph,
    q: QuotientGraph,
    kernel: KernelSets,
    cover: CycleCover,
) -> tuple[CycleCover, bool]:
    """Move boundary vertices into the kernel by swapping positions.

    A boundary vertex outside ``U_i`` trades places with a kernel vertex
    of the same part that is not on the boundary. When no single swap
    keeps every cycle edge, the crossing edge is replaced by a truncated
    matching edge, swapping both of its ends. Every swap lowers the
    number of boundary vertices outside the kernel. Returns the new
    cover and whether all boundary vertices now lie in the kernel.
    """
    _require_one_partition(q)
    cycles = list(cover.cycles)
    swaps = 0

    def misplaced() -> list[tuple[int, int]]:
        current = CycleCover(cycles)
        return [
            (i, b)
            for i, kept in enumerate(kernel.kernel)
            for b in sorted(boundary_vertices(current, q, i))
            if b not in kept
        ]

    stuck: set[int] = set()
    while True:
        pending = [(i, b) for i, b in misplaced() if b not in stuck]
        if not pending:
            break
        i, b = pending[0]
        trial = _kernel_swap(g, q, kernel, cycles, i, b)
        if trial is None:
            stuck.add(b)
            continue
        cycles = trial
        swaps += 1
    result = CycleCover(cycles, {"kernel_swaps": swaps})
    return result, not misplaced()


def build_compressed_treedepth(
    q: QuotientGraph, kernel: KernelSets
) -> TreedepthDecomposition:
    """Vertex treedepth decomposition of the kernel graph.

    Every node of the weighted decomposition of ``q`` becomes a path
    through the kernel vertices of its part.
    """
    td = build_weighted_treedepth(q)
    sizes = [len(u) for u in kernel.kernel]
    td_h = build_unweighted_treedepth(td, sizes, kernel.parts)
    violations = verify_decomposition(td_h, kernel.graph)
    if violations:
        raise RuntimeError(f"Kernel decomposition is invalid: {violations}")
    return td_h


class ExactCycleBackend:
    """Exact cycle cover search on small graphs.

    Cycles are grown from the lowest uncovered vertex. States that
    failed are remembered, which costs exponential space.
    """

    name = "exact"
    exponential_space = True

    def __init__(self, max_vertices: int = 22):
        self.max_vertices = max_vertices
        self.states = 0

    def decide(
        self, g: IntersectionGraph, k: int
    ) -> tuple[bool, list[tuple[int, ...]] | None]:
        if g.n > self.max_vertices:
            logger.warning(
                f"Exact cycle backend on {g.n} vertices, above its "
                f"{self.max_vertices} vertex limit"
            )
        nbr = [sum(1 << u for u in g.neighbors(v)) for v in range(g.n)]
        failed: set[tuple] = set()
        path: list[int] = []
        self.states = 0

        def bits(mask: int):
            while mask:
                low = mask & -mask
                yield low.bit_length() - 1
                mask ^= low

        def pieces(mask: int) -> int:
            count = 0
            while mask:
                seen = frontier = mask & -mask
                while frontier:
                    reach = 0
                    for v in bits(frontier):
                        reach |= nbr[v]
                    frontier = reach & mask & ~seen
                    seen |= frontier
                count += 1
                mask &= ~seen
            return count

        def starved(free: int, ends: int) -> bool:
            usable = free | ends
            return any((nbr[w] & usable).bit_count() < 2 for w in bits(free))

        def cover(remaining: int, budget: int):
            if not remaining:
                return []
            if budget == 0 or starved(remaining, 0):
                return None
            if pieces(remaining) > budget:
                return None
            start = (remaining & -remaining).bit_length() - 1
            path[:] = [start]
            return extend(remaining, start, start, 1 << start, budget)

        def extend(remaining, start, v, used, budget):
            key = (remaining, used, v, min(len(path), 3), budget)
            if key in failed:
                return None
            self.states += 1
            free = remaining & ~used
            if len(path) >= 3 and nbr[v] >> start & 1:
                closed = tuple(path)
                saved = list(path)
                rest = cover(free, budget - 1)
                path[:] = saved
                if rest is not None:
                    return [closed] + rest
            if not starved(free, (1 << start) | (1 << v)):
                for u in bits(nbr[v] & free):
                    path.append(u)
                    found = extend(remaining, start, u, used | 1 << u, budget)
                    path.pop()
                    if found is not None:
                        return found
            failed.add(key)
            return None

        cycles = cover((1 << g.n) - 1, k)
        return cycles is not None, cycles


def get_cycle_backend(name: str = "exact"):
    """Get the cycle cover backend class."""
    if name == "exact":
        return ExactCycleBackend
    elif name == "treedepth-cnc":
        raise NotImplementedError(
            "The treedepth Cut&Count cycle cover backend is not available"
        )
    else:
        raise ValueError(f"Unknown backend: {name}")


def solve_cycle_cover(
    g: IntersectionGraph,
    q: QuotientGraph,
    k: int,
    backend: str = "exact",
    *,
    problem: str = "cyclecover",
) -> SolverResult:
    """Decide whether at most ``k`` disjoint cycles cover ``g``.

    The decision is made on the kernel graph, which has a cover of that
    size exactly when ``g`` has one.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    backend_class = get_cycle_backend(backend)
    stats = SolverStats()
    params = {"k": k, "backend": backend}
    if g.n == 0:
        return SolverResult(problem, True, k, None, stats, params)
    kernel = build_kernel(g, q)
    td_h = build_compressed_treedepth(q, kernel)
    solver = backend_class()
    answer, cycles = solver.decide(kernel.graph, k)
    stats.calls = solver.states
    stats.depth = td_h.depth
    stats.extra.update(
        {
            "h_vertices": kernel.graph.n,
            "compression_ratio": kernel.compression_ratio,
            "h_treedepth": td_h.depth,
            "exponential_space": solver.exponential_space,
        }
    )
    if cycles is not None:
        stats.extra["cycles"] = [
            [kernel.vertex_map[v] for v in c] for c in cycles
        ]
    logger.info(f"Cycle cover with k={k} on the kernel: {answer}")
    return SolverResult(problem, answer, k, None, stats, params)


def hamiltonian_cycle(
    g: IntersectionGraph, q: QuotientGraph, backend: str = "exact"
) -> SolverResult:
    if g.n < 3:
        return SolverResult("hamcycle", False, 1, params={"k": 1})
    return solve_cycle_cover(g, q, 1, backend, problem="hamcycle")


def hamiltonian_path(
    g: IntersectionGraph, q: QuotientGraph, backend: str = "exact"
) -> SolverResult:
    """Hamiltonian path as a Hamiltonian cycle through a new universal
    vertex."""
    if g.n <= 1:
        return SolverResult("hampath", True, 1, params={"k": 1})
    graph, quotient, _ = q.with_universal_vertex()
    return solve_cycle_cover(graph, quotient, 1, backend, problem="hampath")
