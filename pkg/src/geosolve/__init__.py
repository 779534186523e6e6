"""
geosolve: exact algorithms on geometric intersection graphs in python
"""

import logging
from importlib.metadata import PackageNotFoundError, version

from .cycle_cover import CycleCover, KernelSets
from .decomposition import SeparatorTree, TreedepthDecomposition
from .geometry import (
    GeometricInstance,
    GeometricObject,
    IntersectionGraph,
    QuotientGraph,
    build_intersection_graph,
    generate_random_instance,
)
from .results import SolverResult, SolverStats
from .solver import GeoSolver

try:
    __version__ = version(__name__)
except PackageNotFoundError:
    __version__ = "unknown"

logging.getLogger(__name__).addHandler(logging.NullHandler())

__all__ = [
    "CycleCover",
    "GeoSolver",
    "GeometricInstance",
    "GeometricObject",
    "IntersectionGraph",
    "KernelSets",
    "QuotientGraph",
    "SeparatorTree",
    "SolverResult",
    "SolverStats",
    "TreedepthDecomposition",
    "build_intersection_graph",
    "generate_random_instance",
]
