"""Geometric instances, intersection graphs and kappa-partitions."""

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import networkx as nx
import numpy as np
from scipy.spatial import cKDTree

logger = logging.getLogger(__name__)

SHAPE_KINDS = ("ball", "cube")


class MissingRepresentationError(ValueError):
    """No geometric representation is available for a partition."""


@dataclass(frozen=True)
class GeometricObject:
    """A closed ball or axis-aligned cube.

    For a cube ``radius`` is the half side length.
    """

    kind: str
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise ValueError(f"Unknown shape kind: {self.kind}")
        if not self.radius > 0:
            raise ValueError(f"Radius must be positive, got {self.radius}")
        object.__setattr__(
            self, "center", tuple(float(c) for c in self.center)
        )
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dimension(self) -> int:
        return len(self.center)

    @property
    def outer_radius(self) -> float:
        if self.kind == "ball":
            return self.radius
        return self.radius * math.sqrt(self.dimension)

    def squared_diameter(self) -> Fraction:
        r = Fraction(self.radius)
        if self.kind == "ball":
            return 4 * r * r
        return 4 * r * r * self.dimension

    def exact(self) -> tuple[tuple[Fraction, ...], Fraction]:
        return tuple(Fraction(c) for c in self.center), Fraction(self.radius)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "center": list(self.center),
            "radius": self.radius,
        }


def objects_intersect(a: GeometricObject, b: GeometricObject) -> bool:
    """Exact intersection test for closed balls and cubes.

    Tangent objects intersect.
    """
    ca, ra = a.exact()
    cb, rb = b.exact()
    if a.kind == "ball" and b.kind == "ball":
        return sum((x - y) ** 2 for x, y in zip(ca, cb)) <= (ra + rb) ** 2
    if a.kind == "cube" and b.kind == "cube":
        return all(abs(x - y) <= ra + rb for x, y in zip(ca, cb))
    if a.kind == "ball":
        ball_center, r, cube_center, h = ca, ra, cb, rb
    else:
        ball_center, r, cube_center, h = cb, rb, ca, ra
    excess = sum(
        max(Fraction(0), abs(x - y) - h) ** 2
        for x, y in zip(ball_center, cube_center)
    )
    return excess <= r * r


@dataclass
class GeometricInstance:
    """Similarly-sized balls and cubes in R^d.

    Parameters
    ----------
    dimension : int
        Ambient dimension, at least 2.
    objects : list
        ``GeometricObject`` instances or dictionaries with the keys
        ``kind``, ``center`` and ``radius``.
    instance_id : str
        Free-form identifier carried into outputs.
    sigma : float
        Largest allowed ratio between the largest and the smallest
        diameter.
    """

    dimension: int
    objects: list[GeometricObject] = field(default_factory=list)
    instance_id: str = ""
    sigma: float = 2.0

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError(
                f"Dimension must be at least 2, got {self.dimension}"
            )
        objects = [
            obj if isinstance(obj, GeometricObject) else GeometricObject(**obj)
            for obj in self.objects
        ]
        for i, obj in enumerate(objects):
            if obj.dimension != self.dimension:
                raise ValueError(
                    f"Object {i} has dimension {obj.dimension}, expected "
                    f"{self.dimension}"
                )
        self.objects = objects
        self.check_similarly_sized()

    def __len__(self) -> int:
        return len(self.objects)

    def check_similarly_sized(self) -> None:
        if not self.objects:
            return
        diameters = [obj.squared_diameter() for obj in self.objects]
        ratio = max(diameters) / min(diameters)
        if ratio > Fraction(self.sigma) ** 2:
            raise ValueError(
                f"Objects are not similarly sized: diameter ratio "
                f"{math.sqrt(ratio):.3f} exceeds sigma={self.sigma}"
            )

    @property
    def centers(self) -> np.ndarray:
        if not self.objects:
            return np.empty((0, self.dimension))
        return np.array([obj.center for obj in self.objects], dtype=float)

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "instance_id": self.instance_id,
            "objects": [obj.to_dict() for obj in self.objects],
        }

    @classmethod
    def from_dict(cls, data: dict, sigma: float = 2.0) -> "GeometricInstance":
        try:
            dimension = int(data["dimension"])
            objects = list(data["objects"])
        except (KeyError, TypeError) as e:
            raise ValueError(f"Malformed instance: missing {e}") from e
        return cls(
            dimension=dimension,
            objects=objects,
            instance_id=str(data.get("instance_id", "")),
            sigma=sigma,
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path, sigma: float = 2.0) -> "GeometricInstance":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise ValueError(f"Malformed instance file {path}: {e}") from e
        return cls.from_dict(data, sigma=sigma)


@dataclass
class IntersectionGraph:
    """Simple undirected graph with sorted neighbor lists."""

    n: int
    adjacency: list[tuple[int, ...]]
    instance: GeometricInstance | None = field(
        default=None, repr=False, compare=False
    )
    _neighbor_sets: list[frozenset[int]] = field(
        init=False, repr=False, compare=False
    )
    _nx_graph: nx.Graph | None = field(
        default=None, init=False, repr=False, compare=False
    )

    def __post_init__(self):
        if len(self.adjacency) != self.n:
            raise ValueError(
                f"Expected {self.n} neighbor lists, got {len(self.adjacency)}"
            )
        self.adjacency = [tuple(sorted(set(nbrs))) for nbrs in self.adjacency]
        self._neighbor_sets = [frozenset(nbrs) for nbrs in self.adjacency]
        for v, nbrs in enumerate(self.adjacency):
            for u in nbrs:
                if u == v:
                    raise ValueError(f"Self-loop at vertex {v}")
                if not 0 <= u < self.n:
                    raise ValueError(f"Vertex {u} out of range")
                if v not in self._neighbor_sets[u]:
                    raise ValueError(f"Edge ({v}, {u}) is not symmetric")
        if self.instance is not None and len(self.instance) != self.n:
            raise ValueError(
                "Instance size does not match the number of vertices"
            )

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int]],
        instance: GeometricInstance | None = None,
    ) -> "IntersectionGraph":
        adjacency = [[] for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"Edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"Self-loop at vertex {u}")
            adjacency[u].append(v)
            adjacency[v].append(u)
        return cls(n=n, adjacency=adjacency, instance=instance)

    @property
    def num_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self.adjacency) // 2

    def edges(self) -> list[tuple[int, int]]:
        return [
            (u, v) for u, nbrs in enumerate(self.adjacency) for v in nbrs
            if u < v
        ]

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def neighbor_set(self, v: int) -> frozenset[int]:
        return self._neighbor_sets[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._neighbor_sets[u]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def is_clique(self, vertices: Sequence[int]) -> bool:
        return all(
            self.has_edge(u, v)
            for i, u in enumerate(vertices)
            for v in vertices[i + 1 :]
        )

    def induced_subgraph(
        self, vertices: Iterable[int]
    ) -> tuple["IntersectionGraph", list[int]]:
        """Induced subgraph relabelled to ``0..len(vertices)-1``.

        Returns the subgraph and the list mapping new labels to old ones.
        """
        keep = sorted(set(vertices))
        index = {v: i for i, v in enumerate(keep)}
        adjacency = [
            [index[u] for u in self.adjacency[v] if u in index] for v in keep
        ]
        return IntersectionGraph(n=len(keep), adjacency=adjacency), keep

    def to_networkx(self) -> nx.Graph:
        """Cached networkx copy of the graph. Do not modify it."""
        if self._nx_graph is None:
            graph = nx.Graph()
            graph.add_nodes_from(range(self.n))
            graph.add_edges_from(self.edges())
            self._nx_graph = graph
        return self._nx_graph

    def save(self, path: str | Path) -> None:
        edges = self.edges()
        lines = [f"{self.n} {len(edges)}"] + [f"{u} {v}" for u, v in edges]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "IntersectionGraph":
        rows = [
            line.split()
            for line in Path(path).read_text().splitlines()
            if line.strip()
        ]
        if not rows or len(rows[0]) != 2:
            raise ValueError(f"Malformed graph file {path}: bad header")
        try:
            n, m = int(rows[0][0]), int(rows[0][1])
            edges = [(int(u), int(v)) for u, v in rows[1:]]
        except ValueError as e:
            raise ValueError(f"Malformed graph file {path}: {e}") from e
        if len(edges) != m:
            raise ValueError(
                f"Malformed graph file {path}: header says {m} edges, "
                f"found {len(edges)}"
            )
        return cls.from_edges(n, edges)


def build_intersection_graph(inst: GeometricInstance) -> IntersectionGraph:
    """Build the intersection graph of the objects in ``inst``.

    A k-d tree over the centers proposes candidate pairs, and every
    candidate is then confirmed with the exact predicate.
    """
    n = len(inst)
    if n < 2:
        return IntersectionGraph.from_edges(n, [], instance=inst)
    reach = 2 * max(obj.outer_radius for obj in inst.objects)
    tree = cKDTree(inst.centers)
    candidates = tree.query_pairs(r=reach * (1 + 1e-9) + 1e-12)
    edges = [
        (i, j)
        for i, j in sorted(candidates)
        if objects_intersect(inst.objects[i], inst.objects[j])
    ]
    logger.debug(
        f"Intersection graph: {n} vertices, {len(edges)} edges from "
        f"{len(candidates)} candidate pairs"
    )
    return IntersectionGraph.from_edges(n, edges, instance=inst)


@dataclass
class QuotientGraph:
    """A kappa-partition of an intersection graph and its contraction.

    Parameters
    ----------
    graph : IntersectionGraph
        The partitioned graph.
    parts : list
        Vertex sets of the parts.
    cliques : list
        For every part, the cliques whose union is the part.
    """

    graph: IntersectionGraph = field(repr=False)
    parts: list[tuple[int, ...]]
    cliques: list[list[tuple[int, ...]]]
    adjacency: list[tuple[int, ...]] = field(init=False)
    part_of: list[int] = field(init=False, repr=False)
    weights: list[float] = field(init=False)
    kappa: int = field(init=False)
    delta: int = field(init=False)
    _nx_quotient: nx.Graph | None = field(
        default=None, init=False, repr=False, compare=False
    )

    def __post_init__(self):
        self.parts = [tuple(sorted(part)) for part in self.parts]
        self.cliques = [
            [tuple(sorted(clique)) for clique in cover]
            for cover in self.cliques
        ]
        if len(self.cliques) != len(self.parts):
            raise ValueError("Every part needs a clique cover")
        part_of = [-1] * self.graph.n
        for i, part in enumerate(self.parts):
            if not part:
                raise ValueError(f"Part {i} is empty")
            for v in part:
                if not 0 <= v < self.graph.n:
                    raise ValueError(f"Vertex {v} out of range")
                if part_of[v] != -1:
                    raise ValueError(f"Vertex {v} is in two parts")
                part_of[v] = i
        if -1 in part_of:
            raise ValueError(
                f"Vertex {part_of.index(-1)} is not covered by any part"
            )
        self.part_of = part_of
        adjacency = [set() for _ in self.parts]
        for u, v in self.graph.edges():
            i, j = part_of[u], part_of[v]
            if i != j:
                adjacency[i].add(j)
                adjacency[j].add(i)
        self.adjacency = [tuple(sorted(nbrs)) for nbrs in adjacency]
        self.weights = [math.log2(1 + len(part)) for part in self.parts]
        self.kappa = max((len(cover) for cover in self.cliques), default=0)
        self.delta = max((len(nbrs) for nbrs in self.adjacency), default=0)

    @property
    def num_parts(self) -> int:
        return len(self.parts)

    def size(self, i: int) -> int:
        return len(self.parts[i])

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.adjacency[i]

    def quotient_edges(self) -> list[tuple[int, int]]:
        return [
            (i, j) for i, nbrs in enumerate(self.adjacency) for j in nbrs
            if i < j
        ]

    def to_networkx(self) -> nx.Graph:
        """Cached networkx quotient graph, one node per part."""
        if self._nx_quotient is None:
            quotient = nx.Graph()
            quotient.add_nodes_from(range(self.num_parts))
            quotient.add_edges_from(self.quotient_edges())
            self._nx_quotient = quotient
        return self._nx_quotient

    def components(self, active: Iterable[int]) -> list[list[int]]:
        """Connected components of the quotient restricted to ``active``.

        Each component is sorted, and components are ordered by their
        smallest part.
        """
        view = self.to_networkx().subgraph(active)
        return sorted(sorted(c) for c in nx.connected_components(view))

    def r_neighborhood(self, i: int, r: int) -> set[int]:
        """Parts within quotient distance ``r`` of part ``i``."""
        return set(
            nx.single_source_shortest_path_length(
                self.to_networkx(), i, cutoff=r
            )
        )

    def is_one_partition(self) -> bool:
        return all(
            len(cover) == 1 and self.graph.is_clique(cover[0])
            for cover in self.cliques
        )

    def verify(self) -> list[str]:
        """Return the violated partition invariants (empty when valid)."""
        violations = []
        nx_graph = self.graph.to_networkx()
        for i, (part, cover) in enumerate(zip(self.parts, self.cliques)):
            covered = set().union(*cover) if cover else set()
            if covered != set(part):
                violations.append(
                    f"part {i}: cliques cover {sorted(covered)}, part is "
                    f"{list(part)}"
                )
            for clique in cover:
                if not self.graph.is_clique(clique):
                    violations.append(
                        f"part {i}: stored clique {list(clique)} is not "
                        f"pairwise adjacent"
                    )
            if not nx.is_connected(nx_graph.subgraph(part)):
                violations.append(f"part {i} is not connected")
        for u, v in self.graph.edges():
            i, j = self.part_of[u], self.part_of[v]
            if i != j and j not in self.adjacency[i]:
                violations.append(f"edge ({u}, {v}) has no quotient edge")
        return violations

    def with_universal_vertex(
        self,
    ) -> tuple[IntersectionGraph, "QuotientGraph", int]:
        """Add a vertex adjacent to every vertex as a new singleton part.

        Returns the augmented graph, its partition and the new vertex.
        The new part is the last one.
        """
        n = self.graph.n
        edges = self.graph.edges() + [(v, n) for v in range(n)]
        graph = IntersectionGraph.from_edges(n + 1, edges)
        quotient = QuotientGraph(
            graph,
            list(self.parts) + [(n,)],
            list(self.cliques) + [[(n,)]],
        )
        return graph, quotient, n

    def to_dict(self) -> dict:
        return {
            "parts": [list(part) for part in self.parts],
            "cliques": [[list(c) for c in cover] for cover in self.cliques],
            "quotient_edges": [list(e) for e in self.quotient_edges()],
            "kappa": self.kappa,
            "delta": self.delta,
            "weights": self.weights,
        }

    @classmethod
    def from_dict(
        cls, graph: IntersectionGraph, data: dict
    ) -> "QuotientGraph":
        parts = data["parts"]
        cliques = data.get("cliques") or [
            greedy_clique_cover(graph, part) for part in parts
        ]
        return cls(graph, parts, cliques)


def greedy_clique_cover(
    g: IntersectionGraph, vertices: Iterable[int]
) -> list[tuple[int, ...]]:
    """Cover ``vertices`` with cliques, growing each from the lowest index."""
    remaining = sorted(set(vertices))
    cover = []
    while remaining:
        clique = [remaining[0]]
        for u in remaining[1:]:
            if all(g.has_edge(u, c) for c in clique):
                clique.append(u)
        chosen = set(clique)
        remaining = [v for v in remaining if v not in chosen]
        cover.append(tuple(clique))
    return cover


def _components_within(
    g: IntersectionGraph, vertices: Iterable[int]
) -> list[list[int]]:
    view = g.to_networkx().subgraph(vertices)
    return sorted(sorted(c) for c in nx.connected_components(view))


def grid_degree_bound(inst: GeometricInstance, side: float, kappa: int) -> int:
    """Largest quotient degree a grid partition with cell ``side`` allows."""
    reach = 2 * max(obj.outer_radius for obj in inst.objects)
    offset = math.ceil(reach / side) + 1
    return (2 * offset + 1) ** inst.dimension * max(kappa, 1) - 1


def build_kappa_partition(
    g: IntersectionGraph, inst: GeometricInstance | None
) -> QuotientGraph:
    """Grid-based kappa-partition of a geometric intersection graph.

    Objects are bucketed by the grid cell of their center. The cell side
    is the smallest inscribed-ball diameter over sqrt(d), so any two
    objects sharing a cell intersect. Each cell is covered greedily by
    cliques and split into connected components.
    """
    if inst is None:
        raise MissingRepresentationError(
            "No geometric representation available; use "
            "robust_clique_partition instead"
        )
    if len(inst) != g.n:
        raise ValueError(
            f"Instance has {len(inst)} objects but the graph has {g.n} "
            f"vertices"
        )
    if g.n == 0:
        return QuotientGraph(g, [], [])
    min_inner = 2 * min(obj.radius for obj in inst.objects)
    side = min_inner / math.sqrt(inst.dimension) * (1 - 1e-9)
    cells = np.floor(inst.centers / side).astype(np.int64)
    by_cell: dict[tuple[int, ...], list[int]] = {}
    for v, cell in enumerate(map(tuple, cells)):
        by_cell.setdefault(cell, []).append(v)

    parts, cliques = [], []
    for cell in sorted(by_cell):
        members = by_cell[cell]
        cover = greedy_clique_cover(g, members)
        for component in _components_within(g, members):
            inside = set(component)
            parts.append(component)
            cliques.append([c for c in cover if c[0] in inside])
    quotient = QuotientGraph(g, parts, cliques)
    bound = grid_degree_bound(inst, side, quotient.kappa)
    if quotient.delta > bound:
        logger.warning(
            f"Quotient degree {quotient.delta} exceeds the grid bound {bound}"
        )
    logger.info(
        f"Grid partition: {quotient.num_parts} parts, "
        f"kappa={quotient.kappa}, delta={quotient.delta}"
    )
    return quotient


def _grow_clique(
    g: IntersectionGraph, seed: int, available: set[int]
) -> list[int]:
    clique = [seed]
    for u in g.neighbors(seed):
        if u in available and all(g.has_edge(u, c) for c in clique):
            clique.append(u)
    return clique


def robust_clique_partition(
    g: IntersectionGraph, kappa_target: int = 1
) -> QuotientGraph:
    """Representation-free kappa-partition by greedy clique growing.

    Each part starts from the lowest unassigned vertex and absorbs up to
    ``kappa_target`` greedily grown cliques, each seeded at the lowest
    unassigned neighbor of the part so that parts stay connected. The
    resulting degree is reported, not guaranteed.
    """
    if kappa_target < 1:
        raise ValueError(f"kappa_target must be >= 1, got {kappa_target}")
    unassigned = set(range(g.n))
    parts, cliques = [], []
    for v in range(g.n):
        if v not in unassigned:
            continue
        members: set[int] = set()
        cover = []
        seed = v
        while seed is not None and len(cover) < kappa_target:
            clique = _grow_clique(g, seed, unassigned)
            cover.append(tuple(sorted(clique)))
            members.update(clique)
            unassigned.difference_update(clique)
            seed = min(
                (
                    u
                    for m in members
                    for u in g.neighbors(m)
                    if u in unassigned
                ),
                default=None,
            )
        parts.append(tuple(sorted(members)))
        cliques.append(cover)
    quotient = QuotientGraph(g, parts, cliques)
    violations = quotient.verify()
    if violations:
        raise RuntimeError(f"Greedy partition is invalid: {violations}")
    logger.info(
        f"Greedy clique partition: {quotient.num_parts} parts, "
        f"kappa={quotient.kappa}, delta={quotient.delta}"
    )
    return quotient


def box_side(n: int, d: int, density: float) -> float:
    """Side of the cube of volume ``n / density`` in R^d."""
    return (n / density) ** (1 / d) if n else 0.0


def generate_random_instance(
    n: int, d: int = 2, density: float = 1.0, seed: int | None = None
) -> GeometricInstance:
    """Unit balls with centers uniform in a box of volume ``n / density``."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if d < 2:
        raise ValueError(f"d must be at least 2, got {d}")
    if not density > 0:
        raise ValueError(f"density must be positive, got {density}")
    rng = np.random.default_rng(seed)
    centers = rng.uniform(0.0, box_side(n, d, density), size=(n, d))
    objects = [GeometricObject("ball", tuple(c), 1.0) for c in centers]
    return GeometricInstance(
        dimension=d,
        objects=objects,
        instance_id=f"unit-balls-n{n}-d{d}-density{density:g}-seed{seed}",
    )
