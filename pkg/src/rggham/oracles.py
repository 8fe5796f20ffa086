"""Ground-truth algorithms for small instances.

Exact Hamiltonicity and cycle-length spectra via anchored subset DP,
vertex connectivity via unit-capacity vertex-split max flow (Menger),
and two internally disjoint paths between vertex sets via min-cost flow.
The *_by_enumeration functions are independent brute-force counterparts
used to cross-validate the fast routes.
"""

import heapq
import itertools
from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .errors import CapacityError, InfeasibleError

HAM_DP_MAX = 22        # 2^22 subset table, desk-scale RAM
CYCLE_SPECTRUM_MAX = 18


def _check_cycle_in_graph(g, cycle):
    if sorted(cycle) != list(range(g.n)):
        return False
    return all(g.has_edge(cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle)))


def is_hamiltonian_exact(g):
    """Exact Hamiltonicity by subset DP anchored at vertex 0.

    Returns (flag, witness-cycle-or-None); the witness is checked against
    the adjacency before being returned.
    """
    if not 3 <= g.n <= HAM_DP_MAX:
        raise CapacityError(f"exact Hamiltonicity supports 3 <= n <= {HAM_DP_MAX}, got n={g.n}")
    if any(len(a) < 2 for a in g.adjacency):
        return False, None
    masks = g.bitmasks()
    dp = kernels.ham_path_dp(masks, g.n)
    cycle = kernels.hamilton_cycle_from_dp(dp, masks, g.n)
    if cycle is None:
        return False, None
    assert _check_cycle_in_graph(g, cycle)
    return True, cycle


def hamiltonian_by_enumeration(g):
    """Exhaustive search over vertex orders anchored at 0 (test oracle)."""
    n = g.n
    if n < 3:
        return False
    nbrs = g.neighbor_sets()

    def extend(v, used):
        if len(used) == n:
            return 0 in nbrs[v]
        for w in sorted(nbrs[v]):
            if w not in used:
                used.add(w)
                if extend(w, used):
                    return True
                used.remove(w)
        return False

    return extend(0, {0})


def cycle_length_spectrum(g):
    """Set of lengths L for which some simple cycle on exactly L vertices exists."""
    if not 3 <= g.n <= CYCLE_SPECTRUM_MAX:
        raise CapacityError(f"cycle spectrum supports 3 <= n <= {CYCLE_SPECTRUM_MAX}, got n={g.n}")
    mask = kernels.cycle_length_mask(g.bitmasks(), g.n)
    return {L for L in range(3, g.n + 1) if (mask >> L) & 1}


def has_cycle_of_length(g, length):
    if not 3 <= length <= g.n:
        raise CapacityError(f"cycle length {length} out of range 3..{g.n}")
    return length in cycle_length_spectrum(g)


def find_cycle_of_length(g, length):
    """A witness simple cycle of exactly `length` vertices, or None.

    Same anchored DP as the spectrum, rerun with reconstruction; intended
    for small n (the pancyclic oracle fallback).
    """
    n = g.n
    if not 3 <= length <= n <= CYCLE_SPECTRUM_MAX:
        raise CapacityError(f"cycle length {length} out of range for n={n}")
    masks = [int(m) for m in g.bitmasks()]
    for a in range(n - length + 1):
        m = n - a
        adj = [masks[a + i] >> a for i in range(m)]
        adj0 = adj[0]
        size = 1 << (m - 1)
        dp = [0] * size
        for v in range(1, m):
            if (adj0 >> v) & 1:
                dp[1 << (v - 1)] = 1 << v
        target = None
        for S in range(1, size):
            e = dp[S]
            if not e:
                continue
            pc = S.bit_count()
            if pc == length - 1 and e & adj0:
                target = S
                break
            if pc >= length - 1:
                continue
            for v in range(1, m):
                b = 1 << (v - 1)
                if not S & b and adj[v] & e:
                    dp[S | b] |= 1 << v
        if target is None:
            continue
        closers = dp[target] & adj0
        v = (closers & -closers).bit_length() - 1
        S = target
        rev = []
        while v != 0:
            rev.append(v)
            S ^= 1 << (v - 1)
            cand = (dp[S] if S else 1) & adj[v]
            v = (cand & -cand).bit_length() - 1
        cycle = [a] + [a + u for u in rev[::-1]]
        assert len(cycle) == length
        assert all(g.has_edge(cycle[i], cycle[(i + 1) % length]) for i in range(length))
        return cycle
    return None


def cycle_lengths_by_enumeration(g):
    """All simple-cycle lengths by backtracking (test oracle, tiny n)."""
    n = g.n
    nbrs = g.neighbor_sets()
    lengths = set()

    def extend(anchor, v, used):
        for w in nbrs[v]:
            if w == anchor and len(used) >= 3:
                lengths.add(len(used))
            if w > anchor and w not in used:
                used.add(w)
                extend(anchor, w, used)
                used.remove(w)

    for a in range(n):
        extend(a, a, {a})
    return lengths


# ---------------------------------------------------------------------------
# vertex connectivity (Menger via vertex-split unit-capacity flow)
# ---------------------------------------------------------------------------


class _UnitFlow:
    """Residual network with unit-ish capacities and BFS augmentation."""

    def __init__(self, num_nodes):
        self.head = [-1] * num_nodes
        self.to = []
        self.cap = []
        self.nxt = []

    def add(self, u, v, c):
        self.to.append(v)
        self.cap.append(c)
        self.nxt.append(self.head[u])
        self.head[u] = len(self.to) - 1
        self.to.append(u)
        self.cap.append(0)
        self.nxt.append(self.head[v])
        self.head[v] = len(self.to) - 1

    def augment(self, s, t):
        """One BFS augmenting path; returns True if a unit was pushed."""
        parent_arc = [-1] * len(self.head)
        parent_arc[s] = -2
        q = [s]
        while q:
            nq = []
            for u in q:
                a = self.head[u]
                while a != -1:
                    v = self.to[a]
                    if self.cap[a] > 0 and parent_arc[v] == -1:
                        parent_arc[v] = a
                        if v == t:
                            a2 = a
                            while a2 != -2:
                                self.cap[a2] -= 1
                                self.cap[a2 ^ 1] += 1
                                a2 = parent_arc[self.to[a2 ^ 1]]
                            return True
                        nq.append(v)
                    a = self.nxt[a]
            q = nq
        return False


def _local_connectivity_at_least(nbr_sets, n, s, t, k):
    """True iff there are >= k internally disjoint s-t paths (s, t non-adjacent)."""
    net = _UnitFlow(2 * n)
    for v in range(n):
        net.add(2 * v, 2 * v + 1, 1)
        for w in nbr_sets[v]:
            net.add(2 * v + 1, 2 * w, 1)
    src, snk = 2 * s + 1, 2 * t
    pushed = 0
    while pushed < k and net.augment(src, snk):
        pushed += 1
    return pushed >= k


def vertex_connectivity_at_least(g, k):
    """Exact test for k-connectedness.

    Local flow checks between one minimum-degree vertex u and its
    non-neighbors, plus all non-adjacent pairs inside N(u): any minimum
    cut either avoids u (first family) or contains it (second family).
    """
    n = g.n
    if n <= k:
        raise ValueError(f"k-connectedness needs n > k (n={n}, k={k})")
    if k <= 0:
        return True
    degs = g.degrees()
    if int(degs.min()) < k:
        return False
    nbr_sets = g.neighbor_sets()
    u = int(np.argmin(degs))
    for w in range(n):
        if w != u and w not in nbr_sets[u]:
            if not _local_connectivity_at_least(nbr_sets, n, u, w, k):
                return False
    nu = sorted(nbr_sets[u])
    for x, y in itertools.combinations(nu, 2):
        if y not in nbr_sets[x]:
            if not _local_connectivity_at_least(nbr_sets, n, x, y, k):
                return False
    return True


def brute_vertex_connectivity_at_least(g, k):
    """Subset-removal oracle: connected after deleting every set of < k vertices."""
    n = g.n
    if n <= k:
        raise ValueError(f"k-connectedness needs n > k (n={n}, k={k})")
    nbr_sets = g.neighbor_sets()

    def connected_without(removed):
        alive = [v for v in range(n) if v not in removed]
        if not alive:
            return True
        seen = {alive[0]}
        stack = [alive[0]]
        while stack:
            v = stack.pop()
            for w in nbr_sets[v]:
                if w not in removed and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(alive)

    for size in range(k):
        for removed in itertools.combinations(range(n), size):
            if not connected_without(set(removed)):
                return False
    return True


def is_biconnected(g):
    """Articulation-point test (Hopcroft-Tarjan), iterative."""
    n = g.n
    if n < 3:
        return False
    disc = [-1] * n
    low = [0] * n
    timer = 0
    root_children = 0
    stack = [(0, -1, iter(g.adjacency[0]))]
    disc[0] = low[0] = timer
    timer += 1
    visited = 1
    while stack:
        v, parent, it = stack[-1]
        advanced = False
        for w in it:
            w = int(w)
            if disc[w] < 0:
                disc[w] = low[w] = timer
                timer += 1
                visited += 1
                if v == 0:
                    root_children += 1
                stack.append((w, v, iter(g.adjacency[w])))
                advanced = True
                break
            elif w != parent:
                low[v] = min(low[v], disc[w])
        if not advanced:
            stack.pop()
            if stack:
                pv = stack[-1][0]
                low[pv] = min(low[pv], low[v])
                if pv != 0 and low[v] >= disc[pv]:
                    return False
    if visited != n:
        return False
    return root_children <= 1


# ---------------------------------------------------------------------------
# two internally disjoint paths between vertex sets (min-cost flow)
# ---------------------------------------------------------------------------


@dataclass
class PathPair:
    """Two paths from A to B, internally vertex-disjoint.

    In share-one-endpoint mode a singleton side's vertex is shared by both
    paths; nothing else ever is.
    """

    first: list
    second: list


class _MinCostFlow:
    def __init__(self, num_nodes):
        self.nn = num_nodes
        self.graph = [[] for _ in range(num_nodes)]  # node -> list of arc ids
        self.to = []
        self.cap = []
        self.cost = []

    def add(self, u, v, cap, cost):
        self.graph[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(cap)
        self.cost.append(cost)
        self.graph[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0)
        self.cost.append(-cost)

    def min_cost_flow(self, s, t, need):
        """Successive shortest paths with Johnson potentials (Dijkstra)."""
        INF = float("inf")
        pot = [0.0] * self.nn
        flow = 0
        total_cost = 0
        while flow < need:
            dist = [INF] * self.nn
            par = [-1] * self.nn
            dist[s] = 0.0
            pq = [(0.0, s)]
            while pq:
                d, u = heapq.heappop(pq)
                if d > dist[u]:
                    continue
                for a in self.graph[u]:
                    if self.cap[a] <= 0:
                        continue
                    v = self.to[a]
                    nd = d + self.cost[a] + pot[u] - pot[v]
                    if nd < dist[v] - 1e-12:
                        dist[v] = nd
                        par[v] = a
                        heapq.heappush(pq, (nd, v))
            if dist[t] == INF:
                return flow, total_cost
            for v in range(self.nn):
                if dist[v] < INF:
                    pot[v] += dist[v]
            v = t
            while v != s:
                a = par[v]
                self.cap[a] -= 1
                self.cap[a ^ 1] += 1
                total_cost += self.cost[a]
                v = self.to[a ^ 1]
            flow += 1
        return flow, total_cost


def _trim_path(path, A, B):
    """Subpath from the last A-vertex before the first B-vertex to that B-vertex."""
    fb = next(i for i, v in enumerate(path) if v in B)
    la = max(i for i, v in enumerate(path[: fb + 1]) if v in A)
    return path[la : fb + 1]


def two_disjoint_paths(g, A, B, mode="disjoint"):
    """Two paths from A to B via min-cost flow, trimmed to meet A and B
    only at their endpoints.  Total edge count is minimized among feasible
    pairs.  Raises InfeasibleError when no such pair exists.
    """
    if mode not in ("disjoint", "share-one-endpoint"):
        raise ValueError(f"unknown mode {mode!r}")
    A, B = set(map(int, A)), set(map(int, B))
    if not A or not B or A & B:
        raise ValueError("A and B must be nonempty and disjoint")
    if mode == "share-one-endpoint" and len(B) != 1 and len(A) != 1:
        raise ValueError("share-one-endpoint mode requires a singleton side")
    n = g.n
    S, T = 2 * n, 2 * n + 1
    net = _MinCostFlow(2 * n + 2)
    share_a = mode == "share-one-endpoint" and len(A) == 1
    share_b = mode == "share-one-endpoint" and len(B) == 1
    for v in range(n):
        c = 1
        if (share_a and v in A) or (share_b and v in B):
            c = 2
        net.add(2 * v, 2 * v + 1, c, 0)
    for i, j in g.edges():
        net.add(2 * i + 1, 2 * j, 1, 1)
        net.add(2 * j + 1, 2 * i, 1, 1)
    for a in sorted(A):
        net.add(S, 2 * a, 2 if share_a else 1, 0)
    for b in sorted(B):
        net.add(2 * b + 1, T, 2 if share_b else 1, 0)
    flow, _ = net.min_cost_flow(S, T, 2)
    if flow < 2:
        raise InfeasibleError(
            "no two internally disjoint A-B paths (graph not 2-connected between the sets)"
        )
    # decompose the 2 units into vertex paths
    used = [net.cap[a ^ 1] if a % 2 == 0 else 0 for a in range(len(net.to))]
    paths = []
    for _ in range(2):
        node = S
        verts = []
        while node != T:
            for a in net.graph[node]:
                if a % 2 == 0 and used[a] > 0:
                    used[a] -= 1
                    node = net.to[a]
                    if node < 2 * n and node % 2 == 1:
                        verts.append(node // 2)
                    break
            else:
                raise AssertionError("flow decomposition failed")
        paths.append(verts)
    p1, p2 = (_trim_path(p, A, B) for p in paths)
    return PathPair(p1, p2)


def validate_path_pair(g, pair, A, B, mode="disjoint"):
    """Independent validator for PathPair invariants; returns list of issues."""
    A, B = set(map(int, A)), set(map(int, B))
    issues = []
    for name, path in (("first", pair.first), ("second", pair.second)):
        if len(path) < 1:
            issues.append(f"{name}: empty path")
            continue
        if path[0] not in A:
            issues.append(f"{name}: does not start in A")
        if path[-1] not in B:
            issues.append(f"{name}: does not end in B")
        if len(set(path)) != len(path):
            issues.append(f"{name}: repeats a vertex")
        for u, v in zip(path, path[1:]):
            if not g.has_edge(u, v):
                issues.append(f"{name}: non-edge {u}-{v}")
        inner = path[1:-1]
        if any(v in A or v in B for v in inner):
            issues.append(f"{name}: interior touches A or B")
    shared = set(pair.first) & set(pair.second)
    if mode == "disjoint":
        if shared:
            issues.append(f"paths share vertices {sorted(shared)}")
    else:
        allowed = set()
        if len(A) == 1:
            allowed |= A
        if len(B) == 1:
            allowed |= B
        if shared - allowed:
            issues.append(f"paths share non-endpoint vertices {sorted(shared - allowed)}")
    return issues
