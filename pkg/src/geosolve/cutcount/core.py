"""Cut&Count machinery shared by every connectivity problem.

A problem is described by a ``ProblemPlugin``: its states, its weighted
universe, the restricted functions allowed on a part, the local
consistency rules and the monomial contributed by a part. The engine
evaluates the counting polynomial depth-first over a treedepth
decomposition, holding one polynomial per live stack frame.
"""

import logging
from enum import IntEnum
from functools import partial
from itertools import product
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from ..decomposition import TreedepthDecomposition
from ..geometry import IntersectionGraph, QuotientGraph
from ..results import SolverStats
from ..utils import spawn_seeds

logger = logging.getLogger(__name__)

DEFAULT_TRIALS = 20
MODES = ("production", "verify")


class State(IntEnum):
    """Vertex states used by the problem plugins."""

    ZERO = 0
    ONE_L = 1
    ONE_R = 2
    ONE = 3
    ZERO_L = 4
    ZERO_R = 5
    ZERO_A = 6
    ZERO_B = 7


class WeightAssignment:
    """Weights in ``[1, 2|U|]`` for every element of a universe."""

    __slots__ = ("universe", "values", "seed")

    def __init__(
        self,
        universe: Sequence[Hashable],
        values: dict,
        seed: int | None = None,
    ):
        self.universe = tuple(universe)
        self.values = dict(values)
        self.seed = seed
        bound = self.max_value
        for element in self.universe:
            value = self.values[element]
            if not 1 <= value <= bound:
                raise ValueError(
                    f"Weight {value} of {element!r} outside [1, {bound}]"
                )

    @property
    def max_value(self) -> int:
        return 2 * len(self.universe)

    @property
    def max_total(self) -> int:
        return 2 * len(self.universe) ** 2

    def __getitem__(self, element) -> int:
        return self.values[element]

    def total(self, elements: Iterable[Hashable]) -> int:
        return sum(self.values[e] for e in elements)


def sample_weights(
    universe: Iterable[Hashable], seed: int | None = None
) -> WeightAssignment:
    """Draw independent uniform weights from ``[1, 2|U|]``."""
    universe = tuple(universe)
    if not universe:
        raise ValueError("The universe must be nonempty")
    rng = np.random.default_rng(seed)
    draws = rng.integers(
        1, 2 * len(universe), size=len(universe), endpoint=True
    )
    values = {e: int(w) for e, w in zip(universe, draws)}
    return WeightAssignment(universe, values, seed)


def is_isolating(
    weights: WeightAssignment, family: Iterable[Iterable[Hashable]]
) -> bool:
    """Whether exactly one member of ``family`` has the minimum weight."""
    totals = sorted(weights.total(member) for member in family)
    return len(totals) == 1 or (len(totals) > 1 and totals[0] < totals[1])


class Gf2Polynomial:
    """Sparse multivariate polynomial over GF(2).

    The polynomial is the set of its monomials, each an exponent tuple
    with one entry per formal variable. Monomials with an exponent above
    ``caps`` are dropped, since exponents only grow under products.
    """

    __slots__ = ("terms", "caps")

    def __init__(
        self,
        terms: Iterable[Sequence[int]] = (),
        caps: Sequence[int] = (),
    ):
        self.caps = tuple(caps)
        result: set[tuple[int, ...]] = set()
        for term in terms:
            term = tuple(term)
            if len(term) != len(self.caps):
                raise ValueError(
                    f"Monomial {term} does not have {len(self.caps)} "
                    f"exponents"
                )
            if any(e < 0 for e in term):
                raise ValueError(f"Negative exponent in {term}")
            if self._fits(term):
                result ^= {term}
        self.terms = frozenset(result)

    @classmethod
    def _wrap(cls, terms, caps) -> "Gf2Polynomial":
        poly = cls.__new__(cls)
        poly.terms = frozenset(terms)
        poly.caps = caps
        return poly

    @classmethod
    def zero(cls, caps: Sequence[int]) -> "Gf2Polynomial":
        return cls._wrap((), tuple(caps))

    @classmethod
    def one(cls, caps: Sequence[int]) -> "Gf2Polynomial":
        return cls._wrap(((0,) * len(caps),), tuple(caps))

    @classmethod
    def monomial(
        cls, exponents: Sequence[int], caps: Sequence[int]
    ) -> "Gf2Polynomial":
        return cls((exponents,), caps)

    @property
    def arity(self) -> int:
        return len(self.caps)

    def _fits(self, term: tuple[int, ...]) -> bool:
        return all(e <= c for e, c in zip(term, self.caps))

    def _common_caps(self, other: "Gf2Polynomial") -> tuple[int, ...]:
        if self.arity != other.arity:
            raise ValueError(
                f"Variable arity mismatch: {self.arity} vs {other.arity}"
            )
        if self.caps == other.caps:
            return self.caps
        return tuple(map(min, self.caps, other.caps))

    def __add__(self, other: "Gf2Polynomial") -> "Gf2Polynomial":
        caps = self._common_caps(other)
        terms = self.terms ^ other.terms
        if caps != self.caps or caps != other.caps:
            terms = (t for t in terms if all(map(int.__le__, t, caps)))
        return self._wrap(terms, caps)

    def __mul__(self, other: "Gf2Polynomial") -> "Gf2Polynomial":
        caps = self._common_caps(other)
        result: set[tuple[int, ...]] = set()
        for a in self.terms:
            for b in other.terms:
                term = tuple(map(int.__add__, a, b))
                if all(map(int.__le__, term, caps)):
                    if term in result:
                        result.remove(term)
                    else:
                        result.add(term)
        return self._wrap(result, caps)

    def coefficient(self, exponents: Sequence[int]) -> int:
        return int(tuple(exponents) in self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(sorted(self.terms))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Gf2Polynomial):
            return NotImplemented
        return self.terms == other.terms and self.arity == other.arity

    def __hash__(self) -> int:
        return hash((self.terms, self.arity))

    def __repr__(self) -> str:
        if not self.terms:
            return "Gf2Polynomial(0)"
        return f"Gf2Polynomial({' + '.join(map(str, sorted(self.terms)))})"


def poly_add(a: Gf2Polynomial, b: Gf2Polynomial) -> Gf2Polynomial:
    return a + b


def poly_mul(a: Gf2Polynomial, b: Gf2Polynomial) -> Gf2Polynomial:
    return a * b


class ProblemPlugin:
    """Base class for Cut&Count problem descriptions.

    Subclasses set ``name``, ``states`` and ``solution_states`` and
    implement the methods raising ``NotImplementedError``. Vertices in
    ``forced_out`` may not take a solution state.
    """

    name: str = ""
    states: tuple[State, ...] = ()
    solution_states: frozenset[State] = frozenset()

    def __init__(
        self,
        g: IntersectionGraph,
        q: QuotientGraph,
        forced_out: Iterable[int] = (),
    ):
        self.graph = g
        self.quotient = q
        self.forced_out = frozenset(forced_out)

    def universe(self) -> tuple:
        raise NotImplementedError

    def caps(self) -> tuple[int, ...]:
        raise NotImplementedError

    def family(self, part: int, relaxed: bool = False):
        raise NotImplementedError

    def family_bound(self, part: int) -> int:
        raise NotImplementedError

    def edge_ok(self, a: State, b: State) -> bool:
        raise NotImplementedError

    def monomial(
        self,
        vertices: Sequence[int],
        states: Sequence[State],
        assignment: dict[int, State],
        weights: WeightAssignment,
    ) -> Gf2Polynomial:
        raise NotImplementedError

    def reads(self, term: tuple[int, ...]) -> bool:
        raise NotImplementedError

    def vertex_ok(self, v: int, state: State) -> bool:
        return not (v in self.forced_out and state in self.solution_states)

    def compatible(
        self,
        vertices: Sequence[int],
        states: Sequence[State],
        assignment: dict[int, State],
    ) -> bool:
        """Check a part function against itself and the ancestors."""
        local = dict(zip(vertices, states))
        for v, s in local.items():
            if not self.vertex_ok(v, s):
                return False
            for u in self.graph.neighbors(v):
                t = local.get(u)
                if t is None:
                    t = assignment.get(u)
                elif u < v:
                    continue
                if t is not None and not self.edge_ok(s, t):
                    return False
        return True

    def leaf_predicate(self, assignment: dict[int, State]) -> bool:
        for v, s in assignment.items():
            if not self.vertex_ok(v, s):
                return False
            for u in self.graph.neighbors(v):
                t = assignment.get(u)
                if u > v and t is not None and not self.edge_ok(s, t):
                    return False
        return True

    def accept(self, poly: Gf2Polynomial, weights: WeightAssignment) -> bool:
        return any(
            term[0] <= weights.max_total and self.reads(term)
            for term in poly.terms
        )


class CutCountEngine:
    """Depth-first evaluation of the counting polynomial.

    ``include`` sums over the functions of a node's part and ``exclude``
    multiplies the children, so at most one accumulator per live frame
    is held. In production mode only cut-respecting functions are
    enumerated and every function is checked against its ancestors as
    it is placed, so leaves are always consistent. In verify mode all
    restricted functions are enumerated and leaves evaluate the full
    predicate on their root path.
    """

    def __init__(
        self,
        plugin: ProblemPlugin,
        td: TreedepthDecomposition,
        weights: WeightAssignment,
        *,
        mode: str = "production",
        stats: SolverStats | None = None,
    ):
        if mode not in MODES:
            raise ValueError(f"Unknown mode: {mode}")
        self.plugin = plugin
        self.td = td
        self.weights = weights
        self.prune = mode == "production"
        self.stats = SolverStats() if stats is None else stats
        self.caps = plugin.caps()
        self.one = Gf2Polynomial.one(self.caps)
        self.zero = Gf2Polynomial.zero(self.caps)
        self._families: dict = {}

    def family(self, part: int):
        family = self._families.get(part)
        if family is None:
            family = self.plugin.family(part, relaxed=not self.prune)
            if self.prune:
                bound = self.plugin.family_bound(part)
                if len(family) > bound:
                    raise RuntimeError(
                        f"{self.plugin.name}: part {part} of size "
                        f"{len(family.vertices)} has {len(family)} "
                        f"restricted functions, above the bound {bound}"
                    )
            sizes = self.stats.family_sizes
            sizes[part] = max(sizes.get(part, 0), len(family))
            self._families[part] = family
        return family

    def evaluate(self, assignment: dict | None = None) -> Gf2Polynomial:
        assignment = dict(assignment or {})
        result = self.one
        for root in self.td.roots:
            result = result * self.include(root, assignment)
            if not result:
                break
        return result

    def include(self, node: int, assignment: dict) -> Gf2Polynomial:
        self.stats.push(len(assignment))
        family = self.family(self.td.phi[node])
        vertices = family.vertices
        acc = self.zero
        held = 0
        for states in family.functions:
            if self.prune and not self.plugin.compatible(
                vertices, states, assignment
            ):
                continue
            extended = dict(assignment)
            extended.update(zip(vertices, states))
            sub = self.exclude(node, extended)
            if not sub:
                continue
            factor = self.plugin.monomial(
                vertices, states, assignment, self.weights
            )
            acc = acc + sub * factor
            self.stats.hold(len(acc) - held)
            held = len(acc)
        self.stats.release(held)
        self.stats.pop(len(assignment))
        return acc

    def exclude(self, node: int, assignment: dict) -> Gf2Polynomial:
        children = self.td.children(node)
        if not children:
            if self.prune or self.plugin.leaf_predicate(assignment):
                return self.one
            return self.zero
        result = self.one
        held = 1
        self.stats.hold(held)
        for child in children:
            result = result * self.include(child, assignment)
            self.stats.hold(len(result) - held)
            held = len(result)
            if not result:
                break
        self.stats.release(held)
        return result


def evaluate_over_treedepth(
    plugin: ProblemPlugin,
    td: TreedepthDecomposition,
    weights: WeightAssignment,
    assignment: dict | None = None,
    *,
    node: int | None = None,
    mode: str = "production",
    stats: SolverStats | None = None,
) -> Gf2Polynomial:
    """Counting polynomial of the whole forest, or below ``node``.

    With ``node`` given, ``assignment`` must cover the ancestors of the
    node and the result sums over the functions of the node's part.
    """
    engine = CutCountEngine(plugin, td, weights, mode=mode, stats=stats)
    if node is None:
        return engine.evaluate(assignment)
    return engine.include(node, dict(assignment or {}))


def _run_trial(
    td: TreedepthDecomposition,
    mode: str,
    job: tuple[ProblemPlugin, int],
) -> tuple[bool, SolverStats]:
    plugin, seed = job
    stats = SolverStats(trials=1)
    weights = sample_weights(plugin.universe(), seed)
    engine = CutCountEngine(plugin, td, weights, mode=mode, stats=stats)
    return plugin.accept(engine.evaluate(), weights), stats


def cut_count_any(
    plugins: Sequence[ProblemPlugin],
    td: TreedepthDecomposition,
    trials: int = DEFAULT_TRIALS,
    seed: int | None = None,
    *,
    mode: str = "production",
    map_fn: Callable = map,
    stats: SolverStats | None = None,
) -> bool:
    """Accept when any of ``plugins`` accepts in one of its trials.

    The trials of all plugins go through a single ``map_fn`` call, so a
    pool map runs them in parallel, while the built-in lazy ``map``
    still stops at the first accepting trial. Plugin ``i`` draws its
    trial seeds from the ``i``-th seed split off ``seed``.
    """
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    jobs = [
        (plugin, trial_seed)
        for plugin, plugin_seed in zip(
            plugins, spawn_seeds(seed, len(plugins))
        )
        for trial_seed in spawn_seeds(plugin_seed, trials)
    ]
    return _accept_first(jobs, td, mode, map_fn, stats)


def _accept_first(
    jobs: list[tuple[ProblemPlugin, int]],
    td: TreedepthDecomposition,
    mode: str,
    map_fn: Callable,
    stats: SolverStats | None,
) -> bool:
    trial = partial(_run_trial, td, mode)
    for i, (accepted, trial_stats) in enumerate(map_fn(trial, jobs)):
        if stats is not None:
            stats.merge(trial_stats)
        if accepted:
            logger.debug(f"{jobs[i][0].name}: accepted after {i + 1} trials")
            return True
    logger.debug(f"Rejected after {len(jobs)} trials")
    return False


def cut_count_driver(
    plugin: ProblemPlugin,
    td: TreedepthDecomposition,
    trials: int = DEFAULT_TRIALS,
    seed: int | None = None,
    *,
    mode: str = "production",
    map_fn: Callable = map,
    stats: SolverStats | None = None,
) -> bool:
    """Run independent Cut&Count trials and accept on the first hit.

    Every trial samples fresh weights, evaluates the root polynomial once
    and reads all target coefficients from it. A ``True`` answer is
    always correct; a yes-instance is missed with probability at most
    ``2 ** -trials``.
    """
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    jobs = [(plugin, trial_seed) for trial_seed in spawn_seeds(seed, trials)]
    return _accept_first(jobs, td, mode, map_fn, stats)


def count_consistent_cuts(
    g: IntersectionGraph, X: Iterable[int], v1: int
) -> int:
    """Number of consistent cuts of ``G[X]`` with ``v1`` on the left."""
    X = sorted(set(X))
    if v1 not in X:
        raise ValueError(f"Vertex {v1} is not in X")
    others = [v for v in X if v != v1]
    count = 0
    for bits in product((True, False), repeat=len(others)):
        left = dict(zip(others, bits))
        left[v1] = True
        if all(
            left[u] == left[v]
            for u in X
            for v in g.neighbors(u)
            if v in left
        ):
            count += 1
    return count
