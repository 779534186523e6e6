import logging
import multiprocessing as mp
from typing import Callable, Iterable, Sequence

from . import oracles
from .branching import max_weight_independent_set, min_r_dominating_set
from .cutcount.core import DEFAULT_TRIALS
from .cutcount.solvers import (
    connected_vertex_cover,
    feedback_vertex_set,
    odd_cycle_transversal,
    steiner_tree,
)
from .cycle_cover import (
    hamiltonian_cycle,
    hamiltonian_path,
    solve_cycle_cover,
)
from .decomposition import (
    SeparatorTree,
    TreedepthDecomposition,
    build_separator_tree,
    build_weighted_treedepth,
)
from .geometry import (
    GeometricInstance,
    IntersectionGraph,
    MissingRepresentationError,
    QuotientGraph,
    build_intersection_graph,
    build_kappa_partition,
    robust_clique_partition,
)
from .results import SolverResult

logger = logging.getLogger(__name__)

PROBLEMS = (
    "is",
    "wis",
    "rds",
    "steiner",
    "cvc",
    "fvs",
    "oct",
    "coct",
    "cyclecover",
    "hamcycle",
    "hampath",
)
CUT_COUNT_PROBLEMS = ("steiner", "cvc", "fvs", "oct", "coct")
CYCLE_PROBLEMS = ("cyclecover", "hamcycle", "hampath")


class GeoSolver:
    """Solve problems on a geometric intersection graph.

    The partition and the decompositions are built on first use and
    cached.

    Parameters
    ----------
    graph : IntersectionGraph, optional
        The graph. Built from ``instance`` when omitted.
    instance : GeometricInstance, optional
        The geometric representation. Without it the partition falls
        back to greedy clique growing.
    seed : int, optional
        Seed for the randomized Cut&Count solvers.
    trials : int
        Cut&Count trials per decision.
    kappa_target : int
        Cliques per part for the representation-free partition.
    backend : str
        Cycle cover backend.
    """

    def __init__(
        self,
        *,
        graph: IntersectionGraph | None = None,
        instance: GeometricInstance | None = None,
        seed: int | None = None,
        trials: int = DEFAULT_TRIALS,
        kappa_target: int = 1,
        backend: str = "exact",
    ) -> None:
        if graph is None and instance is None:
            raise ValueError("Either graph or instance must be given")
        if graph is None:
            graph = build_intersection_graph(instance)
        if instance is None:
            instance = graph.instance
        self.graph = graph
        self.instance = instance
        self.seed = seed
        self.trials = trials
        self.kappa_target = kappa_target
        self.backend = backend
        self.map_fn = map

        self._partition = None
        self._clique_partition = None
        self._decomposition = None
        self._separator_trees: dict[int, SeparatorTree] = {}

    @property
    def partition(self) -> QuotientGraph:
        """The kappa-partition of the graph."""
        if self._partition is None:
            try:
                self._partition = build_kappa_partition(
                    self.graph, self.instance
                )
            except MissingRepresentationError:
                logger.warning(
                    "No geometric representation, using the greedy clique "
                    "partition"
                )
                self._partition = robust_clique_partition(
                    self.graph, self.kappa_target
                )
        return self._partition

    @property
    def clique_partition(self) -> QuotientGraph:
        """A partition into cliques, as the cycle cover kernel needs."""
        if self._clique_partition is None:
            if self.partition.is_one_partition():
                self._clique_partition = self.partition
            else:
                log = logger.debug if self.instance is None else logger.warning
                log(
                    f"Partition has kappa={self.partition.kappa}, the cycle "
                    "cover kernel uses the greedy clique partition instead"
                )
                self._clique_partition = robust_clique_partition(self.graph)
        return self._clique_partition

    @property
    def decomposition(self) -> TreedepthDecomposition:
        """Weighted treedepth decomposition of the partition."""
        if self._decomposition is None:
            self._decomposition = build_weighted_treedepth(self.partition)
        return self._decomposition

    def separator_tree(self, r: int) -> SeparatorTree:
        if r not in self._separator_trees:
            self._separator_trees[r] = build_separator_tree(
                self.partition, r
            )
        return self._separator_trees[r]

    def solve(
        self, problem: str, *, map_fn: Callable | None = None, **kwargs
    ) -> SolverResult:
        """Solve ``problem`` with the matching solver.

        Parameters
        ----------
        problem : str
            One of ``PROBLEMS``.
        map_fn : Callable, optional
            Map used for Cut&Count trials. Defaults to ``self.map_fn``.
        **kwargs
            Problem arguments: ``weights`` for ``wis``, ``r`` for ``rds``,
            ``k`` and ``terminals`` for the others, plus ``witness``,
            ``seed`` and ``trials`` for the Cut&Count problems.
        """
        result = self._solve(problem, map_fn=map_fn, **kwargs)
        if not result.stats.within_space_bound(self.graph.n):
            logger.warning(
                f"{problem}: peak of {result.stats.peak_states} states and "
                f"{result.stats.peak_monomials} monomials exceeds the "
                f"polynomial space bound for n={self.graph.n}"
            )
        return result

    def _solve(
        self, problem: str, *, map_fn: Callable | None = None, **kwargs
    ) -> SolverResult:
        map_fn = self.map_fn if map_fn is None else map_fn
        g = self.graph
        if problem in ("is", "wis"):
            weights = kwargs.get("weights")
            if problem == "wis" and weights is None:
                raise ValueError("Weighted independent set needs weights")
            result = max_weight_independent_set(
                g, self.partition, self.decomposition, weights
            )
            if weights is not None:
                result.params["weights"] = list(weights)
            return result
        if problem == "rds":
            r = kwargs.get("r", 1)
            return min_r_dominating_set(
                g, self.partition, self.separator_tree(r), r
            )
        if problem in CUT_COUNT_PROBLEMS:
            options = {
                "trials": kwargs.get("trials", self.trials),
                "seed": kwargs.get("seed", self.seed),
                "map_fn": map_fn,
                "witness": kwargs.get("witness", False),
                "mode": kwargs.get("mode", "production"),
            }
            args = (g, self.partition, self.decomposition)
            k = kwargs["k"]
            if problem == "steiner":
                return steiner_tree(*args, kwargs["terminals"], k, **options)
            if problem == "cvc":
                return connected_vertex_cover(*args, k, **options)
            if problem == "fvs":
                return feedback_vertex_set(*args, k, **options)
            return odd_cycle_transversal(
                *args, k, connected=problem == "coct", **options
            )
        if problem in CYCLE_PROBLEMS:
            backend = kwargs.get("backend", self.backend)
            q = self.clique_partition
            if problem == "cyclecover":
                return solve_cycle_cover(g, q, kwargs["k"], backend)
            if problem == "hamcycle":
                return hamiltonian_cycle(g, q, backend)
            return hamiltonian_path(g, q, backend)
        raise ValueError(f"Unknown problem: {problem}")

    def independent_set(
        self, weights: Sequence[float] | None = None
    ) -> SolverResult:
        if weights is None:
            return self.solve("is")
        return self.solve("wis", weights=weights)

    def dominating_set(self, r: int = 1) -> SolverResult:
        return self.solve("rds", r=r)

    def steiner_tree(
        self, terminals: Iterable[int], k: int, **kwargs
    ) -> SolverResult:
        return self.solve("steiner", terminals=terminals, k=k, **kwargs)

    def connected_vertex_cover(self, k: int, **kwargs) -> SolverResult:
        return self.solve("cvc", k=k, **kwargs)

    def feedback_vertex_set(self, k: int, **kwargs) -> SolverResult:
        return self.solve("fvs", k=k, **kwargs)

    def odd_cycle_transversal(
        self, k: int, connected: bool = False, **kwargs
    ) -> SolverResult:
        return self.solve("coct" if connected else "oct", k=k, **kwargs)

    def cycle_cover(self, k: int, **kwargs) -> SolverResult:
        return self.solve("cyclecover", k=k, **kwargs)

    def hamiltonian_cycle(self, **kwargs) -> SolverResult:
        return self.solve("hamcycle", **kwargs)

    def hamiltonian_path(self, **kwargs) -> SolverResult:
        return self.solve("hampath", **kwargs)

    def cross_check(self, result: SolverResult) -> dict:
        """Compare ``result`` with the brute-force oracle.

        Returns the oracle result and whether the answers agree. Witnesses
        are checked as well when present. Instances above the oracle cap
        are reported as skipped.
        """
        g = self.graph
        params = result.params
        witness = result.witness
        try:
            if result.problem in ("is", "wis"):
                oracle = oracles.brute_is(g, params.get("weights"))
                agrees = abs(oracle.value - result.value) < 1e-9
                if witness is not None:
                    agrees &= oracles.is_independent_set(g, witness)
            elif result.problem == "rds":
                r = params["r"]
                oracle = oracles.brute_rds(g, r)
                agrees = oracle.value == result.value
                if witness is not None:
                    agrees &= oracles.is_r_dominating_set(g, witness, r)
            elif result.problem in CUT_COUNT_PROBLEMS:
                oracle, check = self._cut_count_oracle(result)
                k = params["k"]
                expected = oracle.value is not None and oracle.value <= k
                agrees = expected == result.answer
                if witness is not None:
                    agrees &= len(witness) <= k and check(witness)
            elif result.problem == "cyclecover":
                oracle = oracles.brute_cycle_cover(g, params["k"])
                agrees = oracle.value == result.answer
            elif result.problem == "hamcycle":
                oracle = oracles.brute_hamiltonian(g)
                agrees = oracle.value == result.answer
            elif result.problem == "hampath":
                oracle = oracles.brute_hamiltonian_path(g)
                agrees = oracle.value == result.answer
            else:
                raise ValueError(f"Unknown problem: {result.problem}")
        except oracles.OracleCapExceeded as e:
            logger.info(f"Skipping the oracle check: {e}")
            return {"skipped": str(e)}
        if not agrees:
            logger.warning(
                f"{result.problem}: solver and oracle disagree "
                f"({result.value}/{result.answer} vs {oracle.value})"
            )
        return {"oracle": oracle.to_dict(), "agrees": bool(agrees)}

    def _cut_count_oracle(self, result: SolverResult):
        g = self.graph
        problem = result.problem
        if problem == "steiner":
            terminals = result.params["terminals"]
            return (
                oracles.brute_steiner(g, terminals),
                lambda X: oracles.is_steiner_tree(g, terminals, X),
            )
        if problem == "cvc":
            return (
                oracles.brute_cvc(g),
                lambda X: oracles.is_connected_vertex_cover(g, X),
            )
        if problem == "fvs":
            return (
                oracles.brute_fvs(g),
                lambda X: oracles.is_feedback_vertex_set(g, X),
            )
        connected = problem == "coct"
        return (
            oracles.brute_oct(g, connected=connected),
            lambda X: oracles.is_odd_cycle_transversal(g, X, connected),
        )

    def enable_pool(self, pool: mp.Pool):
        """Context manager to temporarily dispatch Cut&Count trials
        through a multiprocessing pool.

        Parameters
        ----------
        pool : multiprocessing.Pool
            The pool to use for parallel computation.
        """
        from .utils import PoolHandler

        return PoolHandler(self, pool)
