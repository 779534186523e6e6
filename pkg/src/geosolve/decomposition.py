"""Weighted balanced separators and treedepth decompositions."""

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import networkx as nx

from .geometry import IntersectionGraph, QuotientGraph

logger = logging.getLogger(__name__)

ALPHA = 2 / 3
EXHAUSTIVE_LIMIT = 20
GREEDY_LIMIT = 150
MAX_CANDIDATES = 200_000


def _key(weight: float) -> float:
    return round(weight, 9)


@dataclass
class SeparatorStep:
    """One separator chosen while building a decomposition."""

    subproblem_size: int
    largest_component: int
    separator: tuple[int, ...]
    separator_weight: float


@dataclass
class TreedepthDecomposition:
    """A rooted forest with a bijection from nodes to parts or vertices.

    Parameters
    ----------
    parent : list[int]
        Parent of every node, ``-1`` for roots.
    phi : list[int]
        Part (weighted mode) or vertex (unweighted mode) of every node.
    weights : list[float]
        Node weights. Unweighted decompositions use unit weights.
    mode : str
        ``"weighted"`` or ``"unweighted"``.
    """

    parent: list[int]
    phi: list[int]
    weights: list[float]
    mode: str = "weighted"
    audit: list[SeparatorStep] = field(default_factory=list, repr=False)
    weighted_depth: float = field(init=False)
    depth: int = field(init=False)

    def __post_init__(self):
        if self.mode not in ("weighted", "unweighted"):
            raise ValueError(f"Unknown decomposition mode: {self.mode}")
        m = len(self.parent)
        if len(self.phi) != m or len(self.weights) != m:
            raise ValueError("parent, phi and weights must have equal length")
        self._children: list[list[int]] = [[] for _ in range(m)]
        self.roots: list[int] = []
        for u, p in enumerate(self.parent):
            if p == -1:
                self.roots.append(u)
            elif 0 <= p < m:
                self._children[p].append(u)
            else:
                raise ValueError(f"Node {u} has invalid parent {p}")
        self._order = self.preorder()
        if len(self._order) != m:
            raise ValueError("Parent pointers do not form a rooted forest")
        self._level = [0] * m
        for u in self._order:
            p = self.parent[u]
            self._level[u] = 0 if p == -1 else self._level[p] + 1
        self.node_of = {label: u for u, label in enumerate(self.phi)}
        self.weighted_depth, self.depth = self.compute_depths()

    @property
    def num_nodes(self) -> int:
        return len(self.parent)

    def children(self, u: int) -> list[int]:
        return self._children[u]

    def preorder(self) -> list[int]:
        order = []
        stack = list(reversed(self.roots))
        while stack:
            u = stack.pop()
            order.append(u)
            stack.extend(reversed(self._children[u]))
        return order

    def ancestors(self, u: int) -> list[int]:
        """Proper ancestors of ``u``, nearest first."""
        path = []
        p = self.parent[u]
        while p != -1:
            path.append(p)
            p = self.parent[p]
        return path

    def tail(self, u: int) -> list[int]:
        """Nodes on the root path of ``u``, root first, ``u`` included."""
        return list(reversed(self.ancestors(u))) + [u]

    def is_ancestor(self, a: int, b: int) -> bool:
        """Whether ``a`` is ``b`` or an ancestor of ``b``."""
        while self._level[b] > self._level[a]:
            b = self.parent[b]
        return a == b

    def comparable(self, a: int, b: int) -> bool:
        return self.is_ancestor(a, b) or self.is_ancestor(b, a)

    def compute_depths(self) -> tuple[float, int]:
        weighted = [0.0] * self.num_nodes
        plain = [0] * self.num_nodes
        for u in self._order:
            p = self.parent[u]
            weighted[u] = self.weights[u] + (0.0 if p == -1 else weighted[p])
            plain[u] = 1 + (0 if p == -1 else plain[p])
        return max(weighted, default=0.0), max(plain, default=0)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "parent": list(self.parent),
            "phi": list(self.phi),
            "weights": list(self.weights),
            "weighted_depth": self.weighted_depth,
            "depth": self.depth,
        }


def _largest_component(q: QuotientGraph, active: set[int]) -> int:
    view = q.to_networkx().subgraph(active)
    return max(
        (
            sum(q.size(i) for i in component)
            for component in nx.connected_components(view)
        ),
        default=0,
    )


def _exhaustive_separator(
    q: QuotientGraph,
    active: list[int],
    weights: Sequence[float],
    limit: float,
    max_candidates: int,
) -> tuple[int, ...] | None:
    active_set = set(active)
    ascending = sorted(weights[i] for i in active)
    best_key = None
    evaluated = 0
    for size in range(len(active) + 1):
        if best_key is not None and _key(sum(ascending[:size])) > best_key[0]:
            break
        for subset in combinations(active, size):
            evaluated += 1
            if evaluated > max_candidates:
                return None
            weight = _key(sum(weights[i] for i in subset))
            if best_key is not None and weight > best_key[0]:
                continue
            largest = _largest_component(q, active_set.difference(subset))
            if largest > limit:
                continue
            key = (weight, largest, subset)
            if best_key is None or key < best_key:
                best_key = key
    return best_key[2] if best_key is not None else None


def _greedy_separator(
    q: QuotientGraph,
    active: list[int],
    weights: Sequence[float],
    limit: float,
) -> set[int]:
    chosen: set[int] = set()
    remaining = set(active)
    while True:
        components = q.components(remaining)
        largest = max(components, key=lambda c: sum(q.size(i) for i in c))
        base = sum(q.size(i) for i in largest)
        if base <= limit:
            return chosen
        best_part, best_score = None, None
        for p in largest:
            after = _largest_component(q, set(largest) - {p})
            score = (base - after) / weights[p]
            if best_score is None or score > best_score + 1e-12:
                best_part, best_score = p, score
        chosen.add(best_part)
        remaining.discard(best_part)


def _bfs_layers(q: QuotientGraph, component: set[int], start: int):
    view = q.to_networkx().subgraph(component)
    return [sorted(layer) for layer in nx.bfs_layers(view, start)]


def _level_separator(
    q: QuotientGraph,
    active: list[int],
    weights: Sequence[float],
    limit: float,
) -> set[int]:
    chosen: set[int] = set()
    remaining = set(active)
    while True:
        components = q.components(remaining)
        largest = max(components, key=lambda c: sum(q.size(i) for i in c))
        comp_total = sum(q.size(i) for i in largest)
        if comp_total <= limit:
            return chosen
        component = set(largest)
        # two sweeps give a pseudo-peripheral start
        start = _bfs_layers(q, component, largest[0])[-1][0]
        start = _bfs_layers(q, component, start)[-1][0]
        best = None
        before = 0
        for layer in _bfs_layers(q, component, start):
            layer_size = sum(q.size(i) for i in layer)
            after = comp_total - before - layer_size
            if before <= limit and after <= limit:
                weight = _key(sum(weights[i] for i in layer))
                key = (weight, max(before, after), layer)
                if best is None or key < best:
                    best = key
            before += layer_size
        layer = largest if best is None else best[2]
        chosen.update(layer)
        remaining.difference_update(layer)


def _minimalize(
    q: QuotientGraph,
    active: list[int],
    chosen: set[int],
    weights: Sequence[float],
    limit: float,
) -> tuple[int, ...]:
    active_set = set(active)
    for p in sorted(chosen, key=lambda i: (-weights[i], i)):
        trial = chosen - {p}
        if _largest_component(q, active_set - trial) <= limit:
            chosen = trial
    return tuple(sorted(chosen))


def balanced_weighted_separator(
    q: QuotientGraph,
    active_parts: Iterable[int],
    weights: Sequence[float] | None = None,
    *,
    alpha: float = ALPHA,
    exhaustive_limit: int = EXHAUSTIVE_LIMIT,
    max_candidates: int = MAX_CANDIDATES,
) -> tuple[int, ...]:
    """Find a light alpha-balanced separator among ``active_parts``.

    Every component of the quotient restricted to the remaining active
    parts spans at most ``alpha`` of the vertices of the active parts.
    Small subproblems are searched exhaustively by increasing weight,
    with ties going to the smaller largest component and then to the
    lexicographically smallest part set. Larger ones use a greedy
    (up to ``GREEDY_LIMIT`` parts) or BFS-level search followed by
    minimalization.

    Parameters
    ----------
    q : QuotientGraph
        The partition.
    active_parts : iterable of int
        Parts of the subproblem.
    weights : sequence of float, optional
        Part weights, defaults to ``q.weights``.
    """
    active = sorted(set(active_parts))
    if not active:
        raise ValueError("active_parts must be nonempty")
    weights = q.weights if weights is None else weights
    total = sum(q.size(i) for i in active)
    limit = alpha * total + 1e-9
    if len(active) <= exhaustive_limit:
        separator = _exhaustive_separator(
            q, active, weights, limit, max_candidates
        )
        if separator is not None:
            return separator
        logger.warning(
            f"Exhaustive separator search over {len(active)} parts ran out "
            f"of candidates, using the greedy search"
        )
    if len(active) <= GREEDY_LIMIT:
        chosen = _greedy_separator(q, active, weights, limit)
    else:
        chosen = _level_separator(q, active, weights, limit)
    return _minimalize(q, active, chosen, weights, limit)


def _check_balance(
    q: QuotientGraph,
    parts: Sequence[int],
    components: list[list[int]],
    alpha: float,
) -> int:
    total = sum(q.size(i) for i in parts)
    largest = max(
        (sum(q.size(i) for i in c) for c in components), default=0
    )
    if largest > alpha * total + 1e-9:
        raise RuntimeError(
            f"Separator leaves a component of {largest} vertices out of "
            f"{total}, above the {alpha:.3f} balance"
        )
    return largest


def build_weighted_treedepth(
    q: QuotientGraph,
    weights: Sequence[float] | None = None,
    *,
    alpha: float = ALPHA,
    exhaustive_limit: int = EXHAUSTIVE_LIMIT,
) -> TreedepthDecomposition:
    """Weighted treedepth decomposition of the quotient graph.

    The separator of every component becomes a root path and the
    components of the remainder hang below its last node.
    """
    weights = q.weights if weights is None else list(weights)
    parent: list[int] = []
    phi: list[int] = []
    node_weights: list[float] = []
    audit: list[SeparatorStep] = []

    def add_node(part: int, par: int) -> int:
        parent.append(par)
        phi.append(part)
        node_weights.append(weights[part])
        return len(parent) - 1

    stack = [(c, -1) for c in reversed(q.components(range(q.num_parts)))]
    while stack:
        parts, par = stack.pop()
        if len(parts) == 1:
            add_node(parts[0], par)
            continue
        separator = balanced_weighted_separator(
            q, parts, weights, alpha=alpha, exhaustive_limit=exhaustive_limit
        )
        remainder = q.components(set(parts).difference(separator))
        largest = _check_balance(q, parts, remainder, alpha)
        audit.append(
            SeparatorStep(
                subproblem_size=sum(q.size(i) for i in parts),
                largest_component=largest,
                separator=separator,
                separator_weight=sum(weights[i] for i in separator),
            )
        )
        last = par
        for p in separator:
            last = add_node(p, last)
        stack.extend((c, last) for c in reversed(remainder))
    td = TreedepthDecomposition(parent, phi, node_weights, audit=audit)
    logger.info(
        f"Weighted treedepth decomposition: {td.num_nodes} nodes, "
        f"weighted depth {td.weighted_depth:.2f}, depth {td.depth}"
    )
    return td


def add_universal_root(
    td: TreedepthDecomposition, part: int, weight: float = 1.0
) -> TreedepthDecomposition:
    """Put a new node for ``part`` above every root of ``td``."""
    new = td.num_nodes
    parent = [new if p == -1 else p for p in td.parent] + [-1]
    return TreedepthDecomposition(
        parent, list(td.phi) + [part], list(td.weights) + [weight], td.mode
    )


def expand_to_unweighted(q: QuotientGraph) -> IntersectionGraph:
    """Replace every part by a clique of ceil(log2(1 + |V_i|)) vertices.

    Parts joined by a quotient edge become completely joined.
    """
    blocks = []
    offset = 0
    for part in q.parts:
        size = len(part).bit_length()
        blocks.append(range(offset, offset + size))
        offset += size
    edges = [
        (u, v) for block in blocks for u, v in combinations(block, 2)
    ]
    edges += [
        (u, v) for i, j in q.quotient_edges()
        for u in blocks[i] for v in blocks[j]
    ]
    return IntersectionGraph.from_edges(offset, edges)


@dataclass
class SeparatorNode:
    parts: tuple[int, ...]
    level: int
    parent: int | None
    subproblem: tuple[int, ...]
    sides: tuple[tuple[int, ...], tuple[int, ...]]
    neighborhood: tuple[int, ...]
    children: list[int] = field(default_factory=list)


@dataclass
class SeparatorTree:
    """Hierarchy of balanced separators for the r-domination recursion."""

    nodes: list[SeparatorNode]
    r: int

    @property
    def root(self) -> int | None:
        return 0 if self.nodes else None

    def path(self, i: int) -> list[int]:
        """Node ``i`` and its ancestors, nearest first."""
        path = [i]
        while self.nodes[path[-1]].parent is not None:
            path.append(self.nodes[path[-1]].parent)
        return path

    def neighborhood_weight(self, i: int, q: QuotientGraph) -> float:
        return sum(q.weights[p] for p in self.nodes[i].neighborhood)

    def separator_vertices(self, i: int, q: QuotientGraph) -> list[int]:
        return sorted(v for p in self.nodes[i].parts for v in q.parts[p])


def _split_sides(
    q: QuotientGraph, components: list[list[int]]
) -> tuple[list[int], list[int]]:
    sides: tuple[list[int], list[int]] = ([], [])
    loads = [0, 0]
    ordered = sorted(
        components, key=lambda c: (-sum(q.size(i) for i in c), c[0])
    )
    for component in ordered:
        side = 0 if loads[0] <= loads[1] else 1
        sides[side].extend(component)
        loads[side] += sum(q.size(i) for i in component)
    return sides


def build_separator_tree(
    q: QuotientGraph,
    r: int,
    *,
    alpha: float = ALPHA,
    exhaustive_limit: int = EXHAUSTIVE_LIMIT,
) -> SeparatorTree:
    """Separator tree with r-neighborhood inflated part weights.

    Every node stores its separator parts, the two sides of the
    separation and the parts of its subproblem within quotient distance
    ``r`` of the separator.
    """
    if r < 1:
        raise ValueError(f"r must be at least 1, got {r}")
    inflated = [
        sum(q.weights[j] for j in q.r_neighborhood(i, r))
        for i in range(q.num_parts)
    ]
    nodes: list[SeparatorNode] = []
    if q.num_parts == 0:
        return SeparatorTree(nodes, r)
    stack = [(tuple(range(q.num_parts)), None, 1)]
    while stack:
        subproblem, par, level = stack.pop()
        separator = balanced_weighted_separator(
            q,
            subproblem,
            inflated,
            alpha=alpha,
            exhaustive_limit=exhaustive_limit,
        )
        remainder = q.components(set(subproblem).difference(separator))
        _check_balance(q, subproblem, remainder, alpha)
        left, right = _split_sides(q, remainder)
        inside = set(subproblem)
        reach = set().union(*(q.r_neighborhood(p, r) for p in separator))
        node = SeparatorNode(
            parts=tuple(separator),
            level=level,
            parent=par,
            subproblem=subproblem,
            sides=(
                tuple(sorted(v for p in left for v in q.parts[p])),
                tuple(sorted(v for p in right for v in q.parts[p])),
            ),
            neighborhood=tuple(sorted(reach & inside)),
        )
        index = len(nodes)
        nodes.append(node)
        if par is not None:
            nodes[par].children.append(index)
        for side in (right, left):
            if side:
                stack.append((tuple(sorted(side)), index, level + 1))
    logger.info(
        f"Separator tree for r={r}: {len(nodes)} nodes, "
        f"{max(n.level for n in nodes)} levels"
    )
    return SeparatorTree(nodes, r)


def build_unweighted_treedepth(
    td: TreedepthDecomposition,
    kernel_sizes: Sequence[int],
    kernel_vertices: Sequence[Sequence[int]] | None = None,
) -> TreedepthDecomposition:
    """Replace every node by a path of ``kernel_sizes[part]`` vertex nodes.

    ``kernel_vertices[part]`` gives the vertices placed on that path. By
    default vertices are numbered consecutively by part index.
    """
    if kernel_vertices is None:
        kernel_vertices = []
        offset = 0
        for size in kernel_sizes:
            kernel_vertices.append(range(offset, offset + size))
            offset += size
    for part in td.phi:
        if kernel_sizes[part] < 1:
            raise ValueError(f"Part {part} needs a positive kernel size")
        if len(kernel_vertices[part]) != kernel_sizes[part]:
            raise ValueError(
                f"Part {part} lists {len(kernel_vertices[part])} vertices "
                f"for kernel size {kernel_sizes[part]}"
            )
    parent: list[int] = []
    phi: list[int] = []
    path_end: dict[int, int] = {}
    for u in td.preorder():
        p = td.parent[u]
        last = -1 if p == -1 else path_end[p]
        for v in kernel_vertices[td.phi[u]]:
            parent.append(last)
            phi.append(v)
            last = len(parent) - 1
        path_end[u] = last
    return TreedepthDecomposition(
        parent, phi, [1.0] * len(parent), mode="unweighted"
    )


def verify_decomposition(
    td: TreedepthDecomposition, q: QuotientGraph | IntersectionGraph
) -> list[str]:
    """Check the bijection, the ancestry property and the cached depths.

    ``q`` is a quotient graph for weighted decompositions or a plain
    graph for unweighted ones. Returns the violations, empty when valid.
    """
    if isinstance(q, QuotientGraph):
        labels, edges = q.num_parts, q.quotient_edges()
    else:
        labels, edges = q.n, q.edges()
    violations = []
    if sorted(td.phi) != list(range(labels)):
        violations.append(
            f"phi is not a bijection onto {labels} labels: "
            f"{sorted(td.phi)}"
        )
    for a, b in edges:
        na, nb = td.node_of.get(a), td.node_of.get(b)
        if na is None or nb is None:
            continue
        if not td.comparable(na, nb):
            violations.append(
                f"edge ({a}, {b}) joins incomparable nodes {na} and {nb}"
            )
    weighted, plain = td.compute_depths()
    if not math.isclose(weighted, td.weighted_depth) or plain != td.depth:
        violations.append(
            f"cached depths ({td.weighted_depth}, {td.depth}) differ from "
            f"recomputed ({weighted}, {plain})"
        )
    return violations
