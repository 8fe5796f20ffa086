"""Geometric graphs at a fixed radius and the sorted-edge process.

The edge process lists all n(n-1)/2 pairs by increasing length (ties
broken lexicographically by (i, j)), so every hitting radius is exactly
an edge length.  For large n the pair list is not materialized and
callers use the grid-based routes instead.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, EmptyInputError
from .geometry import GridIndex, NormSpec, lp_distances

MATERIALIZE_DEFAULT = 10_000


class GeometricGraph:
    """Undirected graph with edge ij iff lp_distance(x_i, x_j) <= radius."""

    def __init__(self, n, radius, adjacency):
        self.n = n
        self.radius = radius
        self.adjacency = adjacency  # per-vertex sorted int arrays

    def degrees(self):
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    @property
    def edge_count(self):
        return int(self.degrees().sum()) // 2

    def edges(self):
        for i, nbrs in enumerate(self.adjacency):
            for j in nbrs:
                if j > i:
                    yield (i, int(j))

    def has_edge(self, i, j):
        a = self.adjacency[i]
        pos = np.searchsorted(a, j)
        return pos < len(a) and a[pos] == j

    def neighbor_sets(self):
        return [set(map(int, a)) for a in self.adjacency]

    def bitmasks(self):
        """Adjacency bitmasks for the subset-DP oracles (n <= 32)."""
        if self.n > 32:
            raise CapacityError(f"bitmask adjacency needs n <= 32, got {self.n}")
        masks = np.zeros(self.n, dtype=np.uint32)
        for i, nbrs in enumerate(self.adjacency):
            m = 0
            for j in nbrs:
                m |= 1 << int(j)
            masks[i] = m
        return masks


def _adjacency_from_edges(n, edges):
    adj = [[] for _ in range(n)]
    for i, j in edges:
        adj[int(i)].append(int(j))
        adj[int(j)].append(int(i))
    return [np.array(sorted(a), dtype=np.int64) for a in adj]


def geometric_graph(points, norm: NormSpec, radius: float) -> GeometricGraph:
    """Build G(V, radius) directly with the grid index (subquadratic)."""
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    if radius <= 0:
        cell = 1.0
    else:
        cell = min(radius, 1.0)
    grid = GridIndex(pts, cell)
    adjacency = [grid.neighbors(i, radius, norm) for i in range(n)]
    return GeometricGraph(n, radius, adjacency)


class EdgeProcess:
    """All pairs sorted ascending by length; the graph evolution G(n, r)."""

    def __init__(self, points, norm, edges, lengths):
        self.points = points
        self.norm = norm
        self.edges = edges      # (M, 2) int32, sorted by (length, i, j)
        self.lengths = lengths  # (M,) float64, nondecreasing

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def materialized(self):
        return self.edges is not None

    @property
    def edge_total(self):
        return self.n * (self.n - 1) // 2

    def require_materialized(self):
        if not self.materialized:
            raise CapacityError(
                f"edge process for n={self.n} is not materialized; "
                "use the grid-based routes for large instances"
            )


def build_edge_process(points, norm: NormSpec, materialize_threshold=MATERIALIZE_DEFAULT) -> EdgeProcess:
    pts = np.ascontiguousarray(points, dtype=np.float64)
    n = pts.shape[0]
    if n < 2:
        raise EmptyInputError(f"edge process needs at least 2 points, got {n}")
    if n > materialize_threshold:
        return EdgeProcess(pts, norm, None, None)
    ii, jj = np.triu_indices(n, k=1)
    diff = np.abs(pts[ii] - pts[jj])
    if np.isinf(norm.p):
        lengths = diff.max(axis=1)
    elif norm.p == 2.0:
        lengths = np.sqrt((diff * diff).sum(axis=1))
    else:
        lengths = (diff ** norm.p).sum(axis=1) ** (1.0 / norm.p)
    order = np.lexsort((jj, ii, lengths))
    edges = np.stack([ii[order], jj[order]], axis=1).astype(np.int32)
    return EdgeProcess(pts, norm, edges, lengths[order])


def graph_at_rank(proc: EdgeProcess, m: int) -> GeometricGraph:
    """Graph consisting of the first m edges of the process."""
    proc.require_materialized()
    if not 0 <= m <= len(proc.lengths):
        raise ValueError(f"edge rank {m} out of range")
    radius = float(proc.lengths[m - 1]) if m > 0 else 0.0
    return GeometricGraph(proc.n, radius, _adjacency_from_edges(proc.n, proc.edges[:m]))


def graph_at_radius(proc: EdgeProcess, radius: float) -> GeometricGraph:
    """Graph with exactly the edges of length <= radius (closed threshold)."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if proc.materialized:
        m = int(np.searchsorted(proc.lengths, radius, side="right"))
        g = graph_at_rank(proc, m)
        g.radius = radius
        return g
    return geometric_graph(proc.points, proc.norm, radius)


def min_degree(g: GeometricGraph) -> int:
    if g.n < 1:
        raise EmptyInputError("graph has no vertices")
    return int(min(len(a) for a in g.adjacency))


@dataclass
class ComponentLabeling:
    labels: np.ndarray
    count: int


def connected_components(g: GeometricGraph) -> ComponentLabeling:
    """BFS labeling; ids dense in [0, count), assigned by smallest root vertex."""
    labels = np.full(g.n, -1, dtype=np.int64)
    count = 0
    for s in range(g.n):
        if labels[s] >= 0:
            continue
        labels[s] = count
        q = deque([s])
        while q:
            v = q.popleft()
            for w in g.adjacency[v]:
                if labels[w] < 0:
                    labels[w] = count
                    q.append(int(w))
        count += 1
    return ComponentLabeling(labels, count)


def kth_nearest_distance(proc: EdgeProcess, i: int, k: int) -> float:
    """The k-th smallest distance from point i to another point."""
    n = proc.n
    if not 0 <= i < n:
        raise ValueError(f"unknown vertex {i}")
    if not 1 <= k <= n - 1:
        raise ValueError(f"k={k} out of range for n={n}")
    dist = lp_distances(proc.points, proc.points[i], proc.norm)
    dist[i] = np.inf
    return float(np.partition(dist, k - 1)[k - 1])
