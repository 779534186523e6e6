import inspect
import logging
import multiprocessing as mp
import os
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .solver import GeoSolver

logger = logging.getLogger(__name__)

THREADS_ENV_VAR = "GEOSOLVE_THREADS"


def configure_logger(log_level: str | int = "INFO") -> logging.Logger:
    """Log to stderr. Calling it again replaces the earlier handler."""
    logger = logging.getLogger("geosolve")
    logger.setLevel(log_level)
    for handler in list(logger.handlers):
        if type(handler) is logging.StreamHandler:
            logger.removeHandler(handler)
    ch = logging.StreamHandler()
    ch.setLevel(log_level)
    formatter = logging.Formatter(
        "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )
    ch.setFormatter(formatter)
    logger.addHandler(ch)
    return logger


def spawn_seeds(seed: int | None, count: int) -> list[int]:
    """Split one seed into ``count`` independent integer seeds.

    Children come from ``numpy.random.SeedSequence(seed).spawn`` and are
    reduced to a single 32-bit word each, so the same ``(seed, count)``
    always gives the same list and the first ``m`` entries do not depend
    on ``count``.
    """
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(child.generate_state(1)[0]) for child in children]


def get_thread_count() -> int:
    """Number of worker processes allowed by ``GEOSOLVE_THREADS``."""
    value = os.environ.get(THREADS_ENV_VAR)
    if value is None or value == "":
        return 1
    try:
        threads = int(value)
    except ValueError:
        raise ValueError(
            f"{THREADS_ENV_VAR} must be an integer, got {value!r}"
        ) from None
    if threads < 1:
        raise ValueError(f"{THREADS_ENV_VAR} must be >= 1, got {threads}")
    return threads


class PoolHandler:
    """Context manager to temporarily replace the map function of a
    GeoSolver instance with the map method of a multiprocessing pool, so
    that independent Cut&Count trials run in parallel.

    Parameters
    ----------
    solver : GeoSolver
        The solver to modify. It must expose a ``map_fn`` attribute and
        its ``solve`` method must accept a 'map_fn' keyword argument.
    pool : multiprocessing.Pool
        The pool to use for parallel computation.
    """

    def __init__(self, solver: "GeoSolver", pool: mp.Pool):
        self.solver = solver
        self.pool = pool

    @property
    def solver(self):
        return self._solver

    @solver.setter
    def solver(self, value: "GeoSolver"):
        signature = inspect.signature(value.solve)
        if not hasattr(value, "map_fn") or (
            "map_fn" not in signature.parameters
        ):
            raise ValueError(
                "The solver must have a 'map_fn' attribute and its solve"
                " method must accept a 'map_fn' keyword argument."
            )
        self._solver = value

    def __enter__(self):
        logger.info("Dispatching Cut&Count trials through the pool")
        self.original_map_fn = self.solver.map_fn
        self.solver.map_fn = self.pool.map
        return self.solver

    def __exit__(self, exc_type, exc_value, traceback):
        self.solver.map_fn = self.original_map_fn
