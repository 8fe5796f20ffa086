"""Hitting radii of monotone properties along the sorted-edge process.

Every hitting radius is returned as an exact edge length (or 0 when the
empty graph already satisfies the property), together with its edge rank.
Ranks, not floating lengths, are what coincidence flags compare.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as kernels
from .errors import CapacityError, UnsatisfiablePropertyError
from .graph import EdgeProcess, graph_at_rank
from .oracles import HAM_DP_MAX, is_hamiltonian_exact, vertex_connectivity_at_least


@dataclass(frozen=True)
class Hit:
    """rank = number of edges inserted when the property first holds."""

    rank: int
    radius: float


def hitting_rank(proc: EdgeProcess, predicate) -> Hit:
    """Smallest edge rank after which a monotone predicate holds.

    Binary search over edge ranks; the predicate must be monotone under
    edge addition and true on the complete graph.
    """
    proc.require_materialized()
    if predicate(graph_at_rank(proc, 0)):
        return Hit(0, 0.0)
    M = len(proc.lengths)
    if not predicate(graph_at_rank(proc, M)):
        raise UnsatisfiablePropertyError("predicate is false on the complete graph")
    lo, hi = 1, M  # invariant: predicate false at lo-1, true at hi
    while lo < hi:
        mid = (lo + hi) // 2
        if predicate(graph_at_rank(proc, mid)):
            hi = mid
        else:
            lo = mid + 1
    return Hit(lo, float(proc.lengths[lo - 1]))


def rho_property(proc: EdgeProcess, predicate) -> float:
    return hitting_rank(proc, predicate).radius


def min_degree_hit(proc: EdgeProcess, k: int) -> Hit:
    """First rank at which the minimum degree reaches k (single edge sweep)."""
    proc.require_materialized()
    n = proc.n
    if not 1 <= k <= n - 1:
        raise ValueError(f"k={k} out of range for n={n}")
    deg = np.zeros(n, dtype=np.int64)
    below = n
    for m, (i, j) in enumerate(proc.edges, start=1):
        deg[i] += 1
        if deg[i] == k:
            below -= 1
        deg[j] += 1
        if deg[j] == k:
            below -= 1
        if below == 0:
            return Hit(m, float(proc.lengths[m - 1]))
    raise AssertionError("complete graph has minimum degree n-1 >= k")


def rho_min_degree(proc: EdgeProcess, k: int) -> float:
    return min_degree_hit(proc, k).radius


def connectivity_hit(proc: EdgeProcess) -> Hit:
    """First rank at which the graph becomes connected (union-find sweep)."""
    proc.require_materialized()
    n = proc.n
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = n
    for m, (i, j) in enumerate(proc.edges, start=1):
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[ri] = rj
            comps -= 1
            if comps == 1:
                return Hit(m, float(proc.lengths[m - 1]))
    raise AssertionError("complete graph is connected")


def k_connectivity_hit(proc: EdgeProcess, k: int, oracle=vertex_connectivity_at_least) -> Hit:
    """First rank of k-connectedness; monotone binary search over the oracle."""
    if proc.n <= k:
        raise ValueError(f"k-connectedness needs n > k (n={proc.n}, k={k})")
    if k == 1:
        return connectivity_hit(proc)
    return hitting_rank(proc, lambda g: oracle(g, k))


def rho_k_connected(proc: EdgeProcess, k: int, oracle=vertex_connectivity_at_least) -> float:
    return k_connectivity_hit(proc, k, oracle).radius


def hamiltonicity_hit(proc: EdgeProcess, oracle=None) -> Hit:
    """First rank of Hamiltonicity under the exact subset-DP oracle."""
    n = proc.n
    if n < 3:
        raise ValueError(f"Hamiltonicity needs n >= 3, got {n}")
    if n > HAM_DP_MAX:
        raise CapacityError(f"exact Hamiltonicity hitting radius needs n <= {HAM_DP_MAX}")
    if oracle is None:
        oracle = lambda g: is_hamiltonian_exact(g)[0]
    return hitting_rank(proc, oracle)


def rho_hamiltonian_exact(proc: EdgeProcess, oracle=None) -> float:
    return hamiltonicity_hit(proc, oracle).radius


def min_degree_radius_large(points, norm, k: int) -> float:
    """max over vertices of the k-th nearest distance, via the grid kernel.

    The unmaterialized route for large n: this equals the hitting radius
    of minimum degree >= k.
    """
    dists = kernels.kth_nearest_all(np.asarray(points, dtype=np.float64), k, norm.p)
    return float(dists.max())


def x_statistic(n: int, radius: float) -> float:
    """pi * n * r^2 - ln n - ln ln n  (the 2-d Euclidean normalization)."""
    if n < 3:
        raise ValueError(f"x statistic needs n >= 3, got {n}")
    return math.pi * n * radius * radius - math.log(n) - math.log(math.log(n))


@dataclass
class HittingReport:
    """Hitting radii of one instance; ranks kept alongside for exact flags."""

    rho_min_degree: dict
    rho_connected: float
    rho_k_connected: dict
    rho_hamiltonian: Optional[float]
    x_statistic: Optional[float]
    ranks: dict = field(default_factory=dict)


def compute_hitting_report(proc: EdgeProcess, k_max=3, with_hamiltonian=True) -> HittingReport:
    n = proc.n
    k_cap = min(k_max, n - 1)
    md = {k: min_degree_hit(proc, k) for k in range(1, k_cap + 1)}
    conn = connectivity_hit(proc)
    kc = {k: k_connectivity_hit(proc, k) for k in range(1, k_cap + 1) if n > k}
    ham = None
    if with_hamiltonian and 3 <= n <= HAM_DP_MAX:
        ham = hamiltonicity_hit(proc)
    x = None
    if proc.norm.is_euclidean_plane and n >= 3 and 2 in md:
        x = x_statistic(n, md[2].radius)
    ranks = {"ham": ham}
    ranks.update({f"md{k}": h for k, h in md.items()})
    ranks.update({f"{k}conn": h for k, h in kc.items()})
    ranks["conn"] = conn
    return HittingReport(
        rho_min_degree={k: h.radius for k, h in md.items()},
        rho_connected=conn.radius,
        rho_k_connected={k: h.radius for k, h in kc.items()},
        rho_hamiltonian=None if ham is None else ham.radius,
        x_statistic=x,
        ranks=ranks,
    )
