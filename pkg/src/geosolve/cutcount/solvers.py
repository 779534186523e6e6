"""Cut&Count decision procedures and their witness extraction."""

import logging
from typing import Callable, Iterable, Sequence

import networkx as nx

from ..decomposition import TreedepthDecomposition, add_universal_root
from ..geometry import IntersectionGraph, QuotientGraph
from ..oracles import (
    is_connected_vertex_cover,
    is_feedback_vertex_set,
    is_odd_cycle_transversal,
    is_steiner_tree,
)
from ..results import SolverResult, SolverStats
from ..utils import spawn_seeds
from . import get_plugin
from .core import DEFAULT_TRIALS, ProblemPlugin, cut_count_any

logger = logging.getLogger(__name__)

PluginFactory = Callable[[frozenset[int]], list[ProblemPlugin]]


def _decide(
    plugins: Sequence[ProblemPlugin],
    td: TreedepthDecomposition,
    trials: int,
    seed: int | None,
    map_fn: Callable,
    stats: SolverStats,
    mode: str,
) -> bool:
    return cut_count_any(
        plugins, td, trials, seed, mode=mode, map_fn=map_fn, stats=stats
    )


def extract_witness(
    make_plugins: PluginFactory,
    td: TreedepthDecomposition,
    vertices: Iterable[int],
    candidates: Iterable[int],
    check: Callable[[list[int]], bool],
    *,
    trials: int = DEFAULT_TRIALS,
    seed: int | None = None,
    map_fn: Callable = map,
    stats: SolverStats | None = None,
    mode: str = "production",
) -> list[int] | None:
    """Recover a solution by forcing vertices out one at a time.

    A forcing is kept whenever the instance stays solvable, so the
    vertices never forced out form a solution. The result is returned
    only if ``check`` accepts it.
    """
    stats = SolverStats() if stats is None else stats
    candidates = list(candidates)
    forced: set[int] = set()
    for v, v_seed in zip(candidates, spawn_seeds(seed, len(candidates))):
        trial_forced = frozenset(forced | {v})
        if _decide(
            make_plugins(trial_forced), td, trials, v_seed, map_fn, stats,
            mode,
        ):
            forced.add(v)
    solution = sorted(set(vertices) - forced)
    if not check(solution):
        logger.warning(
            f"Extracted solution {solution} did not verify, dropping it"
        )
        return None
    return solution


def steiner_tree(
    g: IntersectionGraph,
    q: QuotientGraph,
    td: TreedepthDecomposition,
    terminals: Iterable[int],
    k: int,
    *,
    trials: int = DEFAULT_TRIALS,
    seed: int | None = None,
    map_fn: Callable = map,
    witness: bool = False,
    mode: str = "production",
) -> SolverResult:
    """Decide whether a connected set of at most ``k`` vertices contains
    all terminals."""
    terminals = sorted(set(terminals))
    if not terminals:
        raise ValueError("Steiner Tree needs at least one terminal")
    outside = [t for t in terminals if not 0 <= t < g.n]
    if outside:
        raise ValueError(f"Terminals {outside} are not vertices")
    stats = SolverStats()
    params = {"k": k, "terminals": terminals, "trials": trials}
    if len(terminals) > k:
        return SolverResult("steiner", False, k, None, stats, params)
    plugin_class = get_plugin("steiner")

    def make(forced: frozenset[int]) -> list[ProblemPlugin]:
        return [plugin_class(g, q, terminals, k, forced_out=forced)]

    seeds = spawn_seeds(seed, 2)
    answer = _decide(
        make(frozenset()), td, trials, seeds[0], map_fn, stats, mode
    )
    solution = None
    if answer and witness:
        solution = extract_witness(
            make,
            td,
            range(g.n),
            [v for v in range(g.n) if v not in set(terminals)],
            lambda X: len(X) <= k and is_steiner_tree(g, terminals, X),
            trials=trials,
            seed=seeds[1],
            map_fn=map_fn,
            stats=stats,
            mode=mode,
        )
    logger.info(f"Steiner tree with k={k}: {answer}")
    return SolverResult("steiner", answer, k, solution, stats, params)


def connected_vertex_cover(
    g: IntersectionGraph,
    q: QuotientGraph,
    td: TreedepthDecomposition,
    k: int,
    *,
    trials: int = DEFAULT_TRIALS,
    seed: int | None = None,
    map_fn: Callable = map,
    witness: bool = False,
    mode: str = "production",
) -> SolverResult:
    """Decide whether a connected vertex cover of size at most ``k``
    exists, trying every vertex as the smallest one of the cover."""
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    stats = SolverStats()
    params = {"k": k, "trials": trials}
    if g.num_edges == 0:
        return SolverResult(
            "cvc", True, k, [] if witness else None, stats, params
        )
    plugin_class = get_plugin("cvc")

    def make(forced: frozenset[int]) -> list[ProblemPlugin]:
        # pinned at v: no vertex below v is in the cover, so those
        # vertices must be independent
        graph = g.to_networkx()
        plugins = []
        for v in range(g.n):
            blocked = forced.union(range(v))
            if graph.subgraph(blocked).number_of_edges():
                break
            if v not in forced:
                plugins.append(plugin_class(g, q, k, v, forced_out=blocked))
        return plugins

    seeds = spawn_seeds(seed, 2)
    answer = _decide(
        make(frozenset()), td, trials, seeds[0], map_fn, stats, mode
    )
    solution = None
    if answer and witness:
        solution = extract_witness(
            make,
            td,
            range(g.n),
            range(g.n),
            lambda X: len(X) <= k and is_connected_vertex_cover(g, X),
            trials=trials,
            seed=seeds[1],
            map_fn=map_fn,
            stats=stats,
            mode=mode,
        )
    logger.info(f"Connected vertex cover with k={k}: {answer}")
    return SolverResult("cvc", answer, k, solution, stats, params)


def feedback_vertex_set(
    g: IntersectionGraph,
    q: QuotientGraph,
    td: TreedepthDecomposition,
    k: int,
    *,
    trials: int = DEFAULT_TRIALS,
    seed: int | None = None,
    map_fn: Callable = map,
    witness: bool = False,
    mode: str = "production",
) -> SolverResult:
    """Decide whether deleting ``k`` vertices can leave a forest."""
    if not 0 <= k <= g.n:
        raise ValueError(f"k must lie in [0, {g.n}], got {k}")
    stats = SolverStats()
    params = {"k": k, "trials": trials}
    if k == g.n:
        return SolverResult(
            "fvs", True, k, list(range(g.n)) if witness else None, stats,
            params,
        )
    plugin_class = get_plugin("fvs")

    def make(forced: frozenset[int]) -> list[ProblemPlugin]:
        return [plugin_class(g, q, k, forced_out=forced)]

    seeds = spawn_seeds(seed, 2)
    answer = _decide(
        make(frozenset()), td, trials, seeds[0], map_fn, stats, mode
    )
    solution = None
    if answer and witness:
        solution = extract_witness(
            make,
            td,
            range(g.n),
            range(g.n),
            lambda X: len(X) <= k and is_feedback_vertex_set(g, X),
            trials=trials,
            seed=seeds[1],
            map_fn=map_fn,
            stats=stats,
            mode=mode,
        )
    logger.info(f"Feedback vertex set with k={k}: {answer}")
    return SolverResult("fvs", answer, k, solution, stats, params)


def odd_cycle_transversal(
    g: IntersectionGraph,
    q: QuotientGraph,
    td: TreedepthDecomposition,
    k: int,
    connected: bool = False,
    *,
    trials: int = DEFAULT_TRIALS,
    seed: int | None = None,
    map_fn: Callable = map,
    witness: bool = False,
    mode: str = "production",
) -> SolverResult:
    """Decide whether at most ``k`` vertices hit every odd cycle.

    The connected variant also asks the deleted set to be connected. The
    plain variant adds a universal vertex as a new root part and solves
    the connected variant with that vertex pinned and budget ``k + 1``.
    """
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    problem = "coct" if connected else "oct"
    stats = SolverStats()
    params = {"k": k, "connected": connected, "trials": trials}
    if g.n == 0:
        return SolverResult(
            problem, True, k, [] if witness else None, stats, params
        )
    plugin_class = get_plugin(problem)
    if connected:
        decomposition = td

        def make(forced: frozenset[int]) -> list[ProblemPlugin]:
            plugins = [plugin_class(g, q, k, None, forced_out=forced)]
            if k < 1:
                return plugins
            # the plugin pinned at v looks for solutions whose smallest
            # vertex is v, so everything below v stays bipartite
            graph = g.to_networkx()
            for v in range(g.n):
                blocked = forced.union(range(v))
                if not nx.is_bipartite(graph.subgraph(blocked)):
                    break
                if v not in forced:
                    plugins.append(
                        plugin_class(g, q, k, v, forced_out=blocked)
                    )
            return plugins

    else:
        graph, quotient, universal = q.with_universal_vertex()
        decomposition = add_universal_root(td, quotient.num_parts - 1)

        def make(forced: frozenset[int]) -> list[ProblemPlugin]:
            return [
                plugin_class(
                    graph, quotient, k + 1, universal, forced_out=forced
                )
            ]

    seeds = spawn_seeds(seed, 2)
    answer = _decide(
        make(frozenset()), decomposition, trials, seeds[0], map_fn, stats,
        mode,
    )
    solution = None
    if answer and witness:
        solution = extract_witness(
            make,
            decomposition,
            range(g.n),
            range(g.n),
            lambda X: len(X) <= k
            and is_odd_cycle_transversal(g, X, connected=connected),
            trials=trials,
            seed=seeds[1],
            map_fn=map_fn,
            stats=stats,
            mode=mode,
        )
    logger.info(f"{problem.upper()} with k={k}: {answer}")
    return SolverResult(problem, answer, k, solution, stats, params)
