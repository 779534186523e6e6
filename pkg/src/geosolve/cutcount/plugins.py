"""Problem plugins for Steiner Tree, CVC, FVS and (Connected) OCT."""

import logging
from dataclasses import dataclass, field, replace
from itertools import combinations, product
from typing import Iterable, Sequence

from ..geometry import IntersectionGraph, QuotientGraph
from .core import Gf2Polynomial, ProblemPlugin, State

logger = logging.getLogger(__name__)

_ONES = (State.ONE_L, State.ONE_R)


@dataclass
class RestrictedFunctionFamily:
    """The functions a plugin allows on one part.

    Each function is a tuple of states aligned with ``vertices``.
    ``relaxed`` families skip the cut-respecting filter.
    """

    part: int
    vertices: tuple[int, ...]
    states: tuple[State, ...]
    functions: list[tuple[State, ...]]
    caps: dict[str, int] = field(default_factory=dict)
    relaxed: bool = False

    def __len__(self) -> int:
        return len(self.functions)

    def __iter__(self):
        return iter(self.functions)

    def as_dicts(self) -> list[dict[int, State]]:
        return [dict(zip(self.vertices, f)) for f in self.functions]


def maximal_independent_set(
    g: IntersectionGraph, vertices: Iterable[int]
) -> list[int]:
    """Greedy maximal independent set, lowest index first."""
    chosen: list[int] = []
    for v in sorted(vertices):
        if not any(g.has_edge(u, v) for u in chosen):
            chosen.append(v)
    return chosen


def cut_sides(
    g: IntersectionGraph, kept: Sequence[int], *, relaxed: bool = False
) -> list[dict[int, bool]]:
    """Side assignments of ``kept`` vertices, ``True`` meaning left.

    Sides are fixed on a maximal independent set and pushed to the
    neighbours; assignments with an edge across the cut are discarded.
    A part covered by kappa cliques has an independent set of at most
    kappa vertices, hence at most ``2 ** kappa`` sides. ``relaxed``
    returns every assignment instead.
    """
    kept = sorted(kept)
    if relaxed:
        return [
            dict(zip(kept, bits))
            for bits in product((True, False), repeat=len(kept))
        ]
    anchors = maximal_independent_set(g, kept)
    anchor_of = {
        v: next(u for u in anchors if u == v or g.has_edge(u, v))
        for v in kept
    }
    sides = []
    for bits in product((True, False), repeat=len(anchors)):
        fixed = dict(zip(anchors, bits))
        side = {v: fixed[anchor_of[v]] for v in kept}
        if all(
            side[u] == side[v]
            for u in kept
            for v in g.neighbors(u)
            if v in side
        ):
            sides.append(side)
    return sides


def _one_state(left: bool) -> State:
    return State.ONE_L if left else State.ONE_R


class SteinerPlugin(ProblemPlugin):
    """Steiner Tree: a connected ``X`` containing the terminals.

    Terminals are never ``ZERO`` and the smallest terminal is pinned to
    the left side. At most kappa^2 (Delta + 1) non-terminals of a part
    enter the solution. Monomials are ``Z_W^w(X) Z_X^|X|``.
    """

    name = "steiner"
    states = (State.ZERO, State.ONE_L, State.ONE_R)
    solution_states = frozenset(_ONES)

    def __init__(
        self,
        g: IntersectionGraph,
        q: QuotientGraph,
        terminals: Iterable[int],
        k: int,
        forced_out: Iterable[int] = (),
    ):
        super().__init__(g, q, forced_out)
        self.terminals = frozenset(terminals)
        if not self.terminals:
            raise ValueError("Steiner Tree needs at least one terminal")
        outside = sorted(t for t in self.terminals if not 0 <= t < g.n)
        if outside:
            raise ValueError(f"Terminals {outside} are not vertices")
        self.k = k
        self.root_terminal = min(self.terminals)
        self.cap = q.kappa**2 * (q.delta + 1)
        clamp = len(self.terminals) + self.cap * q.num_parts
        self.min_size = len(self.terminals)
        self.max_size = min(k, clamp, g.n)
        self._caps = (2 * g.n**2, max(self.max_size, 0))

    def universe(self) -> tuple:
        return tuple(range(self.graph.n))

    def caps(self) -> tuple[int, ...]:
        return self._caps

    def vertex_ok(self, v: int, state: State) -> bool:
        if v in self.terminals and state == State.ZERO:
            return False
        if v == self.root_terminal and state != State.ONE_L:
            return False
        return super().vertex_ok(v, state)

    def edge_ok(self, a: State, b: State) -> bool:
        return a == b or a == State.ZERO or b == State.ZERO

    def family(self, part: int, relaxed: bool = False):
        vertices = self.quotient.parts[part]
        terminals = [v for v in vertices if v in self.terminals]
        others = [v for v in vertices if v not in self.terminals]
        functions = []
        for size in range(min(self.cap, len(others)) + 1):
            for chosen in combinations(others, size):
                kept = terminals + list(chosen)
                for side in cut_sides(self.graph, kept, relaxed=relaxed):
                    if not side.get(self.root_terminal, True):
                        continue
                    functions.append(
                        tuple(
                            _one_state(side[v]) if v in side else State.ZERO
                            for v in vertices
                        )
                    )
        return RestrictedFunctionFamily(
            part,
            vertices,
            self.states,
            functions,
            {"non_terminals": self.cap},
            relaxed,
        )

    def family_bound(self, part: int) -> int:
        q = self.quotient
        return (1 + q.size(part)) ** self.cap * 2**q.kappa

    def monomial(self, vertices, states, assignment, weights):
        chosen = [v for v, s in zip(vertices, states) if s != State.ZERO]
        return Gf2Polynomial.monomial(
            (weights.total(chosen), len(chosen)), self._caps
        )

    def reads(self, term: tuple[int, ...]) -> bool:
        return self.min_size <= term[1] <= self.max_size


class CvcPlugin(ProblemPlugin):
    """Connected Vertex Cover with ``root_vertex`` pinned left.

    At most kappa vertices of a part stay outside the cover, and no edge
    may have both ends outside it.
    """

    name = "cvc"
    states = (State.ZERO, State.ONE_L, State.ONE_R)
    solution_states = frozenset(_ONES)

    def __init__(
        self,
        g: IntersectionGraph,
        q: QuotientGraph,
        k: int,
        root_vertex: int,
        forced_out: Iterable[int] = (),
    ):
        super().__init__(g, q, forced_out)
        if not 0 <= root_vertex < g.n:
            raise ValueError(f"Vertex {root_vertex} is not in the graph")
        self.k = k
        self.root_vertex = root_vertex
        self._caps = (2 * g.n**2, min(k, g.n))

    def universe(self) -> tuple:
        return tuple(range(self.graph.n))

    def caps(self) -> tuple[int, ...]:
        return self._caps

    def vertex_ok(self, v: int, state: State) -> bool:
        if v == self.root_vertex and state != State.ONE_L:
            return False
        return super().vertex_ok(v, state)

    def edge_ok(self, a: State, b: State) -> bool:
        if a == State.ZERO or b == State.ZERO:
            return a != b
        return a == b

    def family(self, part: int, relaxed: bool = False):
        vertices = self.quotient.parts[part]
        kappa = self.quotient.kappa
        functions = []
        for size in range(min(kappa, len(vertices)) + 1):
            for excluded in combinations(vertices, size):
                if self.root_vertex in excluded:
                    continue
                kept = [v for v in vertices if v not in excluded]
                for side in cut_sides(self.graph, kept, relaxed=relaxed):
                    if not side.get(self.root_vertex, True):
                        continue
                    functions.append(
                        tuple(
                            _one_state(side[v]) if v in side else State.ZERO
                            for v in vertices
                        )
                    )
        return RestrictedFunctionFamily(
            part, vertices, self.states, functions, {"excluded": kappa},
            relaxed,
        )

    def family_bound(self, part: int) -> int:
        q = self.quotient
        return (1 + q.size(part)) ** (2 * q.kappa)

    def monomial(self, vertices, states, assignment, weights):
        chosen = [v for v, s in zip(vertices, states) if s != State.ZERO]
        return Gf2Polynomial.monomial(
            (weights.total(chosen), len(chosen)), self._caps
        )

    def reads(self, term: tuple[int, ...]) -> bool:
        return 1 <= term[1] <= self.k


class FvsPlugin(ProblemPlugin):
    """Feedback Vertex Set of size ``k`` through the forest ``Y = V - X``.

    The universe is ``V x {F, M}``. Forest vertices take ``ZERO_L`` or
    ``ZERO_R``, solution vertices ``ONE``, and every left forest vertex
    may carry a marker. Monomials are ``Z_W Z_Y Z_E Z_M`` where ``Z_E``
    counts forest edges, charged to the lower endpoint's part. A forest
    on ``n - k`` vertices with ``j`` edges has ``n - k - j`` components,
    one marker each.
    """

    name = "fvs"
    states = (State.ONE, State.ZERO_L, State.ZERO_R)
    solution_states = frozenset({State.ONE})
    _forest = frozenset({State.ZERO_L, State.ZERO_R})

    def __init__(
        self,
        g: IntersectionGraph,
        q: QuotientGraph,
        k: int,
        forced_out: Iterable[int] = (),
    ):
        super().__init__(g, q, forced_out)
        if not 0 <= k < g.n:
            raise ValueError(f"k must lie in [0, {g.n - 1}], got {k}")
        self.k = k
        self.target = g.n - k
        self._caps = (
            2 * (2 * g.n) ** 2,
            self.target,
            self.target - 1,
            self.target,
        )

    def universe(self) -> tuple:
        return tuple((v, tag) for v in range(self.graph.n) for tag in "FM")

    def caps(self) -> tuple[int, ...]:
        return self._caps

    def edge_ok(self, a: State, b: State) -> bool:
        return {a, b} != self._forest

    def family(self, part: int, relaxed: bool = False):
        vertices = self.quotient.parts[part]
        limit = 2 * self.quotient.kappa
        functions = []
        for size in range(min(limit, len(vertices)) + 1):
            for kept in combinations(vertices, size):
                for side in cut_sides(self.graph, kept, relaxed=relaxed):
                    functions.append(
                        tuple(
                            State.ONE
                            if v not in side
                            else State.ZERO_L if side[v] else State.ZERO_R
                            for v in vertices
                        )
                    )
        return RestrictedFunctionFamily(
            part, vertices, self.states, functions, {"forest": limit},
            relaxed,
        )

    def family_bound(self, part: int) -> int:
        q = self.quotient
        return (1 + q.size(part)) ** (2 * q.kappa) * 2**q.kappa

    def monomial(self, vertices, states, assignment, weights):
        forest = [v for v, s in zip(vertices, states) if s in self._forest]
        inside = set(forest)
        edges = 0
        for v in forest:
            for u in self.graph.neighbors(v):
                if u in inside:
                    edges += u > v
                elif assignment.get(u) in self._forest:
                    edges += 1
        weight = sum(weights[(v, "F")] for v in forest)
        poly = Gf2Polynomial.monomial(
            (weight, len(forest), edges, 0), self._caps
        )
        if not poly:
            return poly
        zero = (0, 0, 0, 0)
        for v, s in zip(vertices, states):
            if s == State.ZERO_L:
                marker = (weights[(v, "M")], 0, 0, 1)
                poly = poly * Gf2Polynomial((zero, marker), self._caps)
        return poly

    def reads(self, term: tuple[int, ...]) -> bool:
        _, forest, edges, markers = term
        return (
            forest == self.target
            and edges + markers == self.target
            and edges <= self.target - 1
        )


class CoctPlugin(ProblemPlugin):
    """Connected Odd Cycle Transversal with a bipartition of the rest.

    The solution ``X`` is cut into ``ONE_L``/``ONE_R``, the remaining
    vertices are two-coloured ``ZERO_A``/``ZERO_B``. Weights range over
    ``V x {X, A}`` so that both ``X`` and the side ``A`` are isolated.
    With ``root_vertex=None`` only ``X`` empty is read, which decides
    bipartiteness.
    """

    name = "coct"
    states = (State.ONE_L, State.ONE_R, State.ZERO_A, State.ZERO_B)
    solution_states = frozenset(_ONES)
    _colours = (State.ZERO_A, State.ZERO_B)

    def __init__(
        self,
        g: IntersectionGraph,
        q: QuotientGraph,
        k: int,
        root_vertex: int | None = None,
        forced_out: Iterable[int] = (),
    ):
        super().__init__(g, q, forced_out)
        if root_vertex is not None and not 0 <= root_vertex < g.n:
            raise ValueError(f"Vertex {root_vertex} is not in the graph")
        self.k = k
        self.root_vertex = root_vertex
        if root_vertex is None:
            self.min_size, self.max_size = 0, 0
        else:
            self.min_size, self.max_size = 1, min(k, g.n)
        self._caps = (2 * (2 * g.n) ** 2, max(self.max_size, 0))

    def universe(self) -> tuple:
        return tuple((v, tag) for v in range(self.graph.n) for tag in "XA")

    def caps(self) -> tuple[int, ...]:
        return self._caps

    def vertex_ok(self, v: int, state: State) -> bool:
        if v == self.root_vertex and state != State.ONE_L:
            return False
        return super().vertex_ok(v, state)

    def edge_ok(self, a: State, b: State) -> bool:
        if a in _ONES and b in _ONES:
            return a == b
        if a in self._colours and b in self._colours:
            return a != b
        return True

    def family(self, part: int, relaxed: bool = False):
        vertices = self.quotient.parts[part]
        limit = 2 * self.quotient.kappa
        functions = []
        for size in range(min(limit, len(vertices)) + 1):
            for outside in combinations(vertices, size):
                if self.root_vertex in outside:
                    continue
                kept = [v for v in vertices if v not in outside]
                if self.root_vertex is None and kept:
                    continue
                for side in cut_sides(self.graph, kept, relaxed=relaxed):
                    if not side.get(self.root_vertex, True):
                        continue
                    for colours in product(self._colours, repeat=size):
                        colour = dict(zip(outside, colours))
                        functions.append(
                            tuple(
                                _one_state(side[v]) if v in side
                                else colour[v]
                                for v in vertices
                            )
                        )
        return RestrictedFunctionFamily(
            part, vertices, self.states, functions, {"outside": limit},
            relaxed,
        )

    def family_bound(self, part: int) -> int:
        q = self.quotient
        return (1 + q.size(part)) ** (5 * q.kappa)

    def monomial(self, vertices, states, assignment, weights):
        weight, size = 0, 0
        for v, s in zip(vertices, states):
            if s in _ONES:
                weight += weights[(v, "X")]
                size += 1
            elif s == State.ZERO_A:
                weight += weights[(v, "A")]
        return Gf2Polynomial.monomial((weight, size), self._caps)

    def reads(self, term: tuple[int, ...]) -> bool:
        return self.min_size <= term[1] <= self.max_size


def enumerate_restricted_functions(
    part: int,
    plugin: ProblemPlugin,
    ancestor_assignment: dict[int, State] | None = None,
    *,
    relaxed: bool = False,
) -> RestrictedFunctionFamily:
    """The plugin's functions on ``part``, optionally filtered against
    an assignment of the ancestor parts."""
    family = plugin.family(part, relaxed=relaxed)
    if ancestor_assignment is None:
        return family
    functions = [
        f
        for f in family.functions
        if plugin.compatible(family.vertices, f, ancestor_assignment)
    ]
    return replace(family, functions=functions)


def brute_force_family(
    plugin: ProblemPlugin, part: int
) -> list[tuple[State, ...]]:
    """All state tuples on ``part`` that respect the plugin's local rules.

    Used to audit the enumerators: every tuple here that satisfies the
    plugin's size restriction must appear in ``plugin.family(part)``.
    """
    vertices = plugin.quotient.parts[part]
    return [
        states
        for states in product(plugin.states, repeat=len(vertices))
        if plugin.compatible(vertices, states, {})
    ]
