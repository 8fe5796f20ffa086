"""Constructive Hamilton cycles in dense geometric graphs.

The construction walks a bounded-degree spanning tree of the giant
dense-cell component (every tree edge traversed once in each direction)
and spends vertices of the visited cells as it goes: one fresh vertex per
ordinary visit, a single excursion per small component that consumes the
component, its labelled satellites and its two escort paths, and a final
clean-up pass per cell that sweeps all labelled vertices and the cell's
remainder.  Success is certified by re-verifying the emitted cycle
against the raw points.
"""

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dissection import AuditConstants, Dissection, StructureGraphs, audit_properties, \
    build_dissection, classify_and_extract
from .errors import InfeasibleError
from .geometry import NormSpec, lp_distances
from .graph import geometric_graph
from .oracles import is_biconnected, two_disjoint_paths

# trace tags used by the shrinking schedule of the pancyclic family
T_ARRIVAL, T_ANCHOR, T_LABEL, T_REST, T_EXC_OTHER, T_EXC_COMP, T_EXC_LABEL = range(7)


@dataclass
class BuilderConstants:
    """Dense threshold, grid scale and the vertex budgets of the rules.

    The per-cell budget audit: a cell is entered at most once per tree
    degree (r2_budget covers all but the final entry), a single excursion
    takes at most r1_budget extra vertices, and the final clean-up needs
    r3_reserve anchors of which one is the vertex already standing there.
    """

    K: int
    eta: float
    escort_radius_factor: float = 6.0
    sector_count: int = 6
    tree_degree_bound: int = 26
    r1_budget: int = 4
    r2_budget: int = 25
    r3_reserve: int = 7
    k_pancyclic: Optional[int] = None

    @classmethod
    def for_norm(cls, norm: NormSpec, K: int = 100, eta: float = 0.1,
                 r1_budget: int = 4, r2_budget: Optional[int] = None,
                 r3_reserve: Optional[int] = None, escort_radius_factor: float = 6.0,
                 k_pancyclic: Optional[int] = None) -> "BuilderConstants":
        sectors = sector_count_for(norm)
        degree_bound = tree_degree_bound_for(norm)
        consts = cls(
            K=K,
            eta=eta,
            escort_radius_factor=escort_radius_factor,
            sector_count=sectors,
            tree_degree_bound=degree_bound,
            r1_budget=r1_budget,
            r2_budget=degree_bound - 1 if r2_budget is None else r2_budget,
            r3_reserve=sectors + 1 if r3_reserve is None else r3_reserve,
            k_pancyclic=k_pancyclic,
        )
        consts.validate()
        return consts

    @classmethod
    def desk(cls, norm: NormSpec, K: int = 35, eta: float = 0.1, **kw) -> "BuilderConstants":
        return cls.for_norm(norm, K=K, eta=eta, **kw)

    def validate(self):
        if self.K < 1:
            raise ValueError("dense threshold must be >= 1")
        if not 0 < self.eta:
            raise ValueError("eta must be positive")
        if self.r3_reserve < 2:
            raise ValueError("clean-up needs at least two anchors")
        # the vertex standing in the cell when the clean-up starts is one
        # of the r3_reserve anchors, so only r3_reserve - 1 must be fresh
        need = self.r1_budget + self.r2_budget + self.r3_reserve - 1
        if self.K < need:
            raise ValueError(
                f"dense threshold K={self.K} below the rule budget "
                f"{self.r1_budget}+{self.r2_budget}+{self.r3_reserve}-1={need}"
            )
        if self.tree_degree_bound < 1 + self.r2_budget:
            raise ValueError("tree degree bound inconsistent with r2 budget")


def sector_count_for(norm: NormSpec) -> int:
    """Parts needed to split a ball into pieces of diameter <= its radius."""
    if norm.is_euclidean_plane:
        return 6  # six 60-degree sectors of a disk
    return (2 * math.ceil(norm.diam_factor)) ** norm.d


def tree_degree_bound_for(norm: NormSpec) -> int:
    """(2*ceil(d^(1/p)) + 1)^d + 1; equals 26 in the Euclidean plane."""
    return (2 * math.ceil(norm.diam_factor) + 1) ** norm.d + 1


class SectorPartition:
    """Partition of the ball B(center, radius) into parts of diameter <= radius."""

    def __init__(self, center, radius: float, norm: NormSpec):
        self.center = np.asarray(center, dtype=np.float64)
        self.radius = float(radius)
        self.norm = norm
        self.count = sector_count_for(norm)
        if norm.is_euclidean_plane:
            self._cells_per_axis = None
        else:
            self._cells_per_axis = 2 * math.ceil(norm.diam_factor)
            self._side = self.radius / math.ceil(norm.diam_factor)

    def assign(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64).reshape(-1, self.norm.d)
        rel = pts - self.center
        if self._cells_per_axis is None:
            ang = np.arctan2(rel[:, 1], rel[:, 0])  # [-pi, pi]
            sector = np.floor((ang + math.pi) / (math.pi / 3.0)).astype(np.int64)
            return np.clip(sector, 0, 5)
        idx = np.floor((rel + self.radius) / self._side).astype(np.int64)
        np.clip(idx, 0, self._cells_per_axis - 1, out=idx)
        flat = np.zeros(len(pts), dtype=np.int64)
        for a in range(self.norm.d):
            flat = flat * self._cells_per_axis + idx[:, a]
        return flat

    def __len__(self):
        return self.count

    def __getitem__(self, i):
        if not 0 <= i < self.count:
            raise IndexError(i)
        return lambda point: int(self.assign(np.asarray(point).reshape(1, -1))[0]) == i


def ball_sector_partition(center, r_prime: float, norm: NormSpec) -> SectorPartition:
    if not r_prime > 0:
        raise ValueError("partition radius must be positive")
    return SectorPartition(center, r_prime, norm)


@dataclass
class SpanningTreePlan:
    """Spanning tree over node indices 0..m-1 with a hard degree cap."""

    edges: list
    adjacency: list
    degrees: np.ndarray

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if len(self.degrees) else 0


def bounded_degree_spanning_tree(positions, norm: NormSpec, r: float) -> SpanningTreePlan:
    """Spanning tree of the geometric graph at threshold r with degree
    at most (2*ceil(d^(1/p)) + 1)^d + 1 (26 in the Euclidean plane).

    Nodes are bucketed into cells of side r/d^(1/p) (cliques), each cell
    keeps a path through its nodes plus at most one edge to each nearby
    cell, and a union-find sweep thins the result to a tree.
    """
    pos = np.asarray(positions, dtype=np.float64).reshape(-1, norm.d)
    m = len(pos)
    if m == 0:
        raise ValueError("empty node set")
    if m == 1:
        return SpanningTreePlan([], [[]], np.zeros(1, dtype=np.int64))
    side = r / norm.diam_factor
    cells = np.floor(pos / side).astype(np.int64)
    buckets = {}
    for i, key in enumerate(map(tuple, cells)):
        buckets.setdefault(key, []).append(i)

    candidate = []
    for key in sorted(buckets):
        nodes = buckets[key]
        candidate.extend(zip(nodes, nodes[1:]))  # in-cell path (clique)
    reach = math.ceil(norm.diam_factor)
    offsets = [off for off in np.ndindex(*(2 * reach + 1,) * norm.d)]
    for key in sorted(buckets):
        base = np.asarray(key)
        a_nodes = np.asarray(buckets[key])
        for off in offsets:
            nkey = tuple(base + np.asarray(off) - reach)
            if nkey <= key or nkey not in buckets:
                continue
            b_nodes = np.asarray(buckets[nkey])
            diff = np.abs(pos[a_nodes][:, None, :] - pos[b_nodes][None, :, :])
            if math.isinf(norm.p):
                d = diff.max(axis=2)
            elif norm.p == 2.0:
                d = np.sqrt((diff * diff).sum(axis=2))
            else:
                d = (diff ** norm.p).sum(axis=2) ** (1.0 / norm.p)
            ai, bi = np.nonzero(d <= r)
            if ai.size:
                pairs = np.sort(np.stack([a_nodes[ai], b_nodes[bi]], axis=1), axis=1)
                best = min(map(tuple, pairs))
                candidate.append((int(best[0]), int(best[1])))

    parent = list(range(m))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = []
    adjacency = [[] for _ in range(m)]
    for a, b in candidate:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            edges.append((a, b))
            adjacency[a].append(b)
            adjacency[b].append(a)
    if len(edges) != m - 1:
        raise ValueError("input graph is not connected at the given threshold")
    adjacency = [sorted(a) for a in adjacency]
    degrees = np.array([len(a) for a in adjacency], dtype=np.int64)
    return SpanningTreePlan(edges, adjacency, degrees)


def double_traversal_walk(plan: SpanningTreePlan, root: int) -> list:
    """Closed walk q_0..q_N (q_0 = q_N) using every tree edge twice."""
    m = len(plan.adjacency)
    if m == 1:
        return [root]
    walk = [root]
    parent = {root: -1}
    stack = [(root, iter(plan.adjacency[root]))]
    while stack:
        v, it = stack[-1]
        advanced = False
        for w in it:
            if w == parent[v]:
                continue
            parent[w] = v
            walk.append(w)
            stack.append((w, iter(plan.adjacency[w])))
            advanced = True
            break
        if not advanced:
            stack.pop()
            if stack:
                walk.append(stack[-1][0])
    return walk


@dataclass
class SmallComponent:
    """A non-giant dense component or a bad cluster, with its cell points."""

    index: int
    kind: str                 # "dense" or "bad"
    gids: np.ndarray
    vertices: np.ndarray      # sorted input point indices in its cells


@dataclass
class EscortBundle:
    comp: SmallComponent
    path1: list               # a1 -> ... -> b1, interior outside all components
    path2: list               # a2 -> ... -> b2
    anchor_gids: tuple        # cells of a1 and a2 in the giant
    connector: list           # dense-cell path between the anchors
    span: list = field(default_factory=list)  # cycle vertices of the excursion

    @property
    def a(self):
        return self.path1[0], self.path2[0]

    @property
    def b(self):
        return self.path1[-1], self.path2[-1]


@dataclass
class LabelAssignment:
    label_of: dict            # vertex -> dense gid within r' of its cell
    by_cell: dict             # dense gid -> sorted list of labelled vertices


@dataclass
class BuildFailure:
    stage: str
    reason: str
    witness: object = None


@dataclass
class BuildStats:
    n: int = 0
    dense_cells: int = 0
    small_components: int = 0
    bad_cells: int = 0
    labelled: int = 0
    tree_max_degree: int = 0
    walk_length: int = 0
    min_unvisited_at_cleanup: Optional[int] = None
    max_excursion_cell_use: int = 0
    max_cell_spent: int = 0   # rule-driven consumption, excluding clean-up drains
    seconds: float = 0.0


@dataclass
class BuildPlan:
    diss: Dissection
    sg: StructureGraphs
    comps: list
    bundles: list
    labels: LabelAssignment
    tree: SpanningTreePlan
    giant_gids: np.ndarray
    walk: list                # gid sequence
    root_gid: int
    rest_by_gid: dict         # gid -> clean-up remainder vertices, cycle order
    cell_sequence: dict       # gid -> giant-cell cycle vertices, cycle order


@dataclass
class BuildResult:
    cycle: Optional[list]
    failure: Optional[BuildFailure]
    stats: BuildStats
    plan: Optional[BuildPlan] = None
    trace: Optional[list] = None  # (tag, ref) per cycle position

    @property
    def success(self) -> bool:
        return self.cycle is not None


@dataclass
class CycleCheck:
    ok: bool
    reason: Optional[str] = None
    detail: object = None

    def __bool__(self):
        return self.ok


def verify_cycle(points, norm: NormSpec, rho: float, cycle) -> CycleCheck:
    """True iff cycle is a permutation of all points with every consecutive
    (and wraparound) pair within rho."""
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    cyc = list(cycle)
    if len(cyc) != n:
        return CycleCheck(False, "length", f"cycle has {len(cyc)} entries for {n} points")
    counts = np.bincount(np.asarray(cyc, dtype=np.int64), minlength=n)
    if counts.max(initial=0) > 1:
        dup = int(np.argmax(counts > 1))
        return CycleCheck(False, "duplicate", f"vertex {dup} appears {int(counts[dup])} times")
    if counts.min(initial=1) < 1:
        return CycleCheck(False, "missing", f"vertex {int(np.argmin(counts))} missing")
    ordered = pts[np.asarray(cyc, dtype=np.int64)]
    diff = np.abs(ordered - np.roll(ordered, -1, axis=0))
    if math.isinf(norm.p):
        lengths = diff.max(axis=1)
    elif norm.p == 2.0:
        lengths = np.sqrt((diff * diff).sum(axis=1))
    else:
        lengths = (diff ** norm.p).sum(axis=1) ** (1.0 / norm.p)
    bad = np.flatnonzero(lengths > rho)
    if bad.size:
        t = int(bad[0])
        return CycleCheck(
            False, "long-edge",
            f"step {t}: {cyc[t]}-{cyc[(t + 1) % n]} has length {float(lengths[t]):.6g} > rho={rho:.6g}",
        )
    return CycleCheck(True)


def cleanup_path(q_position, anchors, labelled, points, radius: float, norm: NormSpec,
                 cell_vertices=None) -> list:
    """Path from the first to the last anchor visiting exactly the labelled
    vertices and the anchors.

    The labelled vertices all lie within `radius` of the cell's lattice
    point; the ball is split into sector_count parts of diameter <= radius,
    each part is a clique, and anchors separate consecutive part runs.
    """
    anchors = [int(a) for a in anchors]
    if len(set(anchors)) != len(anchors):
        raise ValueError("anchors must be distinct")
    if cell_vertices is not None:
        cv = set(map(int, cell_vertices))
        if any(a not in cv for a in anchors):
            raise ValueError("anchors must belong to the cell's vertex set")
    part = SectorPartition(q_position, radius, norm)
    if len(anchors) != part.count + 1:
        raise ValueError(f"need {part.count + 1} anchors, got {len(anchors)}")
    labelled = sorted(int(v) for v in labelled)
    if labelled:
        pos = np.asarray(points, dtype=np.float64)[labelled]
        dist = lp_distances(pos, np.asarray(q_position, dtype=np.float64), norm)
        if float(dist.max()) > radius * (1 + 1e-12):
            raise ValueError("labelled vertex outside the clean-up ball")
        sectors = part.assign(pos)
    else:
        sectors = np.zeros(0, dtype=np.int64)
    path = [anchors[0]]
    for s in range(part.count):
        path.extend(v for v, sec in zip(labelled, sectors) if sec == s)
        path.append(anchors[s + 1])
    return path


# ---------------------------------------------------------------------------
# escorts
# ---------------------------------------------------------------------------


def _component_descriptors(diss, sg):
    comps = []
    for ci, comp_gids in enumerate(sg.dense_components):
        if ci == sg.giant:
            continue
        verts = np.sort(np.concatenate([diss.members(int(g)) for g in comp_gids]))
        comps.append(SmallComponent(len(comps) + 2, "dense", comp_gids, verts))
    for bi, comp_gids in enumerate(sg.bad_components):
        verts = [diss.members(int(g)) for g in comp_gids]
        verts = np.sort(np.concatenate(verts)) if verts else np.zeros(0, np.int64)
        if verts.size:
            comps.append(SmallComponent(len(comps) + 2, "bad", comp_gids, verts))
    return comps


def _local_graph(points, norm, rho, pool):
    """Geometric graph restricted to `pool` (original indices kept via map)."""
    sub = np.asarray(sorted(pool), dtype=np.int64)
    g = geometric_graph(points[sub], norm, rho)
    return g, sub


def escort_paths(points, norm, rho: float, diss: Dissection, sg: StructureGraphs,
                 comp: SmallComponent, giant_vertices, forbidden, audit_constants,
                 escort_radius_factor: float = 6.0) -> EscortBundle:
    """Two escort paths from the giant's cells into one small component plus
    the dense connector between their anchor cells.

    Paths are found by min-cost flow on a neighborhood of the component
    (retrying on the full graph if the local search is infeasible), trimmed
    so they meet the giant's and the component's vertex sets only at their
    endpoints, and the connector is a dense-cell path inside the locality
    ball.  Raises InfeasibleError when two disjoint paths do not exist.
    """
    pts = np.asarray(points, dtype=np.float64)
    comp_set = set(map(int, comp.vertices))
    giant_set = set(map(int, giant_vertices))
    center = diss.grid_position(comp.gids).mean(axis=0)

    mode = "share-one-endpoint" if len(comp_set) == 1 else "disjoint"
    pair = None
    for attempt, radius_cap in enumerate((escort_radius_factor * diss.r * 2.0, None)):
        if radius_cap is None:
            pool = set(range(len(pts))) - forbidden
        else:
            near = lp_distances(pts, center, norm) <= radius_cap
            pool = set(map(int, np.flatnonzero(near))) - forbidden
        if not (comp_set <= pool):
            continue
        A_local = pool & giant_set
        if not A_local:
            continue
        g_local, sub = _local_graph(pts, norm, rho, pool)
        inv = {int(v): i for i, v in enumerate(sub)}
        try:
            raw = two_disjoint_paths(
                g_local,
                {inv[v] for v in A_local},
                {inv[v] for v in comp_set},
                mode=mode,
            )
            pair = type(raw)(
                [int(sub[i]) for i in raw.first],
                [int(sub[i]) for i in raw.second],
            )
            break
        except InfeasibleError:
            if radius_cap is None:
                raise
    if pair is None:
        raise InfeasibleError(f"component {comp.index}: escort search found no feasible pool")

    # orient and trim to single giant / component endpoints (the flow route
    # already guarantees this; re-derive defensively)
    def trim(path):
        fb = next(i for i, v in enumerate(path) if v in comp_set)
        la = max(i for i, v in enumerate(path[: fb + 1]) if v in giant_set)
        return path[la:fb + 1]

    p1, p2 = trim(pair.first), trim(pair.second)
    a1, a2 = p1[0], p2[0]
    gid1 = int(diss.point_cell[a1])
    gid2 = int(diss.point_cell[a2])
    ball = audit_constants.locality * diss.r
    connector = sg.restricted_dense_path(gid1, gid2, diss.grid_position(gid1), ball)
    if connector is None:
        raise InfeasibleError(
            f"component {comp.index}: no dense connector {gid1}->{gid2} inside the locality ball"
        )
    return EscortBundle(comp, p1, p2, (gid1, gid2), connector)


def validate_escort_bundles(bundles, giant_vertices) -> list:
    """Disjointness audit across bundles; returns a list of issue strings."""
    issues = []
    giant_set = set(map(int, giant_vertices))
    all_comp = set()
    for b in bundles:
        all_comp |= set(map(int, b.comp.vertices))
    seen = {}
    for b in bundles:
        verts = set(b.path1) | set(b.path2)
        shared_b = set(b.path1) & set(b.path2)
        if len(b.comp.vertices) == 1:
            if shared_b - {int(b.comp.vertices[0])}:
                issues.append(f"component {b.comp.index}: escorts share interior vertices")
        elif shared_b:
            issues.append(f"component {b.comp.index}: escorts not vertex-disjoint")
        for p, name in ((b.path1, "first"), (b.path2, "second")):
            inner = p[1:-1]
            if any(v in giant_set or v in all_comp for v in inner):
                issues.append(f"component {b.comp.index}: {name} escort interior hits a component")
        for v in verts:
            if v in seen and seen[v] != b.comp.index:
                issues.append(f"vertex {v} shared by bundles {seen[v]} and {b.comp.index}")
            seen[v] = b.comp.index
    conn_seen = {}
    for b in bundles:
        for g in b.connector:
            if g in conn_seen and conn_seen[g] != b.comp.index:
                issues.append(f"connector cell {g} shared by bundles {conn_seen[g]} and {b.comp.index}")
            conn_seen[g] = b.comp.index
    return issues


# ---------------------------------------------------------------------------
# label assignment
# ---------------------------------------------------------------------------


def assign_labels(diss: Dissection, sg: StructureGraphs, excluded) -> LabelAssignment:
    """Attach every leftover vertex to a dense cell within r' of its own cell.

    Leftover = not in a dense cell, not in a bad cluster, not on an escort
    path.  The choice is the nearest dense lattice point (ties to the
    smallest id), so labelling is deterministic.
    """
    dense_flat = sg.dense_mask_flat
    bad_mask = np.zeros(diss.n_grid, dtype=bool)
    bad_mask[sg.bad_ids] = True
    offsets = diss.stencil(diss.r_prime)
    shape = np.asarray(diss.shape)
    label_of = {}
    by_cell = {}
    spacing = diss.spacing
    for gid in map(int, np.flatnonzero(diss.counts > 0)):
        if dense_flat[gid] or bad_mask[gid]:
            continue
        members = [int(v) for v in diss.members(gid) if v not in excluded]
        if not members:
            continue
        idx = np.array(np.unravel_index(gid, diss.shape))
        best = None
        for off in offsets:
            nidx = idx + off
            if np.any(nidx < 0) or np.any(nidx >= shape):
                continue
            ngid = int(np.ravel_multi_index(nidx, diss.shape))
            if dense_flat[ngid]:
                scaled = np.abs(off) * spacing
                if math.isinf(diss.norm.p):
                    dist = scaled.max()
                else:
                    dist = (scaled ** diss.norm.p).sum() ** (1.0 / diss.norm.p)
                key = (float(dist), ngid)
                if best is None or key < best:
                    best = key
        if best is None:
            raise AssertionError(f"cell {gid} is sparse and non-bad but has no dense cell in range")
        target = best[1]
        for v in members:
            label_of[v] = target
        by_cell.setdefault(target, []).extend(members)
    for tgt in by_cell:
        by_cell[tgt] = sorted(by_cell[tgt])
    return LabelAssignment(label_of, by_cell)


# ---------------------------------------------------------------------------
# the build itself
# ---------------------------------------------------------------------------


class _CellPools:
    """Per-cell stacks of spendable vertices (giant cells only)."""

    def __init__(self, diss, giant_gids, reserved):
        self.visited = np.zeros(len(diss.points), dtype=bool)
        self.pool = {}
        self.ptr = {}
        self.spent = {}   # rule-driven picks per cell, excluding the final drain
        for gid in map(int, giant_gids):
            members = [int(v) for v in diss.members(gid) if v not in reserved]
            self.pool[gid] = members
            self.ptr[gid] = 0
            self.spent[gid] = 0

    def pick(self, gid):
        lst = self.pool[gid]
        i = self.ptr[gid]
        while i < len(lst) and self.visited[lst[i]]:
            i += 1
        if i == len(lst):
            self.ptr[gid] = i
            return None
        self.ptr[gid] = i + 1
        v = lst[i]
        self.visited[v] = True
        self.spent[gid] += 1
        return v

    def unvisited_count(self, gid):
        return sum(1 for v in self.pool[gid][self.ptr[gid]:] if not self.visited[v])

    def drain(self, gid):
        lst = self.pool[gid]
        out = [v for v in lst[self.ptr[gid]:] if not self.visited[v]]
        for v in out:
            self.visited[v] = True
        self.ptr[gid] = len(lst)
        return out


def build_hamilton_cycle(points, norm: NormSpec, rho: float, consts: BuilderConstants,
                         r: float = None, audit_first: bool = False,
                         audit_constants: AuditConstants = None,
                         two_connected_check_limit: int = 300,
                         collect_trace: bool = True) -> BuildResult:
    """Run the staged construction; failure is a structured value.

    `r` is the dissection scale (default rho); the caller picks rho in
    [r, 2r] with the graph at rho 2-connected.  With audit_first the six
    structural properties are checked up front and the first violation is
    returned; otherwise only the structurally necessary facts are
    enforced and violations surface as staged failures.
    """
    t0 = time.perf_counter()
    pts = np.ascontiguousarray(points, dtype=np.float64)
    n = pts.shape[0]
    stats = BuildStats(n=n)

    def fail(stage, reason, witness=None):
        stats.seconds = time.perf_counter() - t0
        return BuildResult(None, BuildFailure(stage, reason, witness), stats)

    if n < 3:
        raise ValueError(f"need at least 3 points, got {n}")
    consts.validate()
    if r is None:
        r = rho
    if not r <= rho <= 2 * r:
        raise ValueError(f"need r <= rho <= 2r, got r={r}, rho={rho}")
    if consts.sector_count != sector_count_for(norm):
        raise ValueError("constants built for a different norm")

    diss = build_dissection(pts, norm, consts.eta, r, consts.K)
    sg = classify_and_extract(diss)
    auditc = audit_constants or AuditConstants.desk(r, norm)
    stats.dense_cells = len(sg.dense_ids)
    stats.bad_cells = len(sg.bad_ids)

    if audit_first:
        audit = audit_properties(sg, diss, auditc)
        if not audit.passed:
            v = audit.first_failure()
            return fail("audit", f"property {v.name} failed", v.witness)

    if len(sg.large_dense) != 1:
        return fail("structure", f"{len(sg.large_dense)} dense components of diameter >= r'",
                    sg.large_dense)
    for bi, dm in enumerate(sg.bad_diameters):
        # empty bad clusters are inert; nonempty ones must be cliques
        if dm.ge(diss.r_prime) and any(
                len(diss.members(int(g))) for g in sg.bad_components[bi]):
            return fail("structure", "populated bad cluster of diameter >= r'", bi)

    giant_gids = np.sort(sg.dense_components[sg.giant])
    giant_vertices = np.sort(np.concatenate([diss.members(int(g)) for g in giant_gids]))
    comps = _component_descriptors(diss, sg)
    stats.small_components = len(comps)

    if n <= two_connected_check_limit:
        if not is_biconnected(geometric_graph(pts, norm, rho)):
            return fail("connectivity", "graph at rho is not 2-connected")

    # escorts, one bundle per nonempty small component
    bundles = []
    forbidden_base = set()
    for comp in comps:
        forbidden_base |= set(map(int, comp.vertices))
    reserved = set()
    for comp in comps:
        forbidden = (forbidden_base - set(map(int, comp.vertices))) | reserved
        try:
            bundle = escort_paths(pts, norm, rho, diss, sg, comp, giant_vertices,
                                  forbidden, auditc, consts.escort_radius_factor)
        except InfeasibleError as exc:
            return fail("escort", str(exc), comp.index)
        bundles.append(bundle)
        reserved |= set(bundle.path1) | set(bundle.path2)
        # later connectors must not reuse these cells (pairwise disjointness)
        issues = validate_escort_bundles(bundles, giant_vertices)
        if issues:
            return fail("escort", "; ".join(issues), comp.index)

    labels = assign_labels(diss, sg, excluded=reserved | forbidden_base)
    stats.labelled = len(labels.label_of)

    # coverage partition check before assembly; the four path endpoints of
    # every bundle are counted both in their component/giant and on the path
    covered = len(giant_vertices) + sum(len(c.vertices) for c in comps)
    covered += sum(len(b.path1) + len(b.path2) for b in bundles)
    covered -= 4 * len(bundles)
    covered += len(labels.label_of)
    if covered != n:
        return fail("coverage", f"partition covers {covered} of {n} vertices")

    # spanning tree and walk on the giant's cells
    giant_pos = diss.grid_position(giant_gids)
    try:
        tree = bounded_degree_spanning_tree(giant_pos, norm, diss.r_prime)
    except ValueError as exc:
        return fail("structure", str(exc))
    stats.tree_max_degree = tree.max_degree
    if tree.max_degree > consts.r2_budget + 1:
        return fail("budget", f"tree degree {tree.max_degree} exceeds r2 budget + 1")
    walk_local = double_traversal_walk(tree, 0)
    walk = [int(giant_gids[i]) for i in walk_local]
    stats.walk_length = len(walk) - 1

    result = _assemble(pts, norm, rho, consts, diss, sg, comps, bundles, labels,
                       giant_gids, walk, reserved, stats, collect_trace)
    if result.failure is not None:
        stats.seconds = time.perf_counter() - t0
        return result
    result.plan = BuildPlan(diss, sg, comps, bundles, labels, tree, giant_gids, walk,
                            int(giant_gids[0]), result.plan.rest_by_gid,
                            result.plan.cell_sequence)
    stats.seconds = time.perf_counter() - t0
    return result


def _assemble(pts, norm, rho, consts, diss, sg, comps, bundles, labels,
              giant_gids, walk, reserved, stats, collect_trace):
    n = len(pts)
    pools = _CellPools(diss, giant_gids, reserved)
    visited = pools.visited
    cycle = []
    trace = [] if collect_trace else None
    rest_by_gid = {}
    cell_sequence = {int(g): [] for g in giant_gids}

    def fail(stage, reason, witness=None):
        return BuildResult(None, BuildFailure(stage, reason, witness), stats)

    def emit(v, tag, ref):
        cycle.append(v)
        if trace is not None:
            trace.append((tag, ref))
        if tag in (T_ARRIVAL, T_ANCHOR, T_REST):
            cell_sequence[ref].append(v)

    first_occ, last_occ = {}, {}
    for t, gid in enumerate(walk):
        first_occ.setdefault(gid, t)
        last_occ[gid] = t

    trigger_map = {}
    for b in bundles:
        trig = min(b.connector, key=lambda g: first_occ[g])
        if trig in trigger_map:
            return fail("escort", "two connectors trigger on the same cell", trig)
        trigger_map[trig] = b

    comp_label_sets = {}
    for b in bundles:
        comp_label_sets[id(b)] = {
            int(g): labels.by_cell.get(int(g), []) for g in b.comp.gids
        }

    sectors = consts.sector_count
    excursion_use = {}
    extra_spend = {}   # escort endpoints consumed outside the pools

    def excursion(bundle, q_gid, v_cur):
        """Extend the cycle from v_cur through the bundle, ending at a fresh
        vertex of V_q; returns that vertex or a failure reason string."""
        conn = bundle.connector
        j = conn.index(q_gid)
        span_start = len(cycle)
        use = {}

        def count_use(gid):
            use[gid] = use.get(gid, 0) + 1

        a1, a2 = bundle.a
        b1, b2 = bundle.b
        # descent to the first anchor cell (empty when the trigger is it)
        for idx in range(j - 1, 0, -1):
            w = pools.pick(conn[idx])
            if w is None:
                return f"cell {conn[idx]} exhausted during excursion descent"
            count_use(conn[idx])
            emit(w, T_EXC_OTHER, bundle.comp.index)
        visited[a1] = True
        count_use(conn[0])
        extra_spend[conn[0]] = extra_spend.get(conn[0], 0) + 1
        emit(a1, T_EXC_OTHER, bundle.comp.index)
        for w in bundle.path1[1:]:
            visited[w] = True
            tag = T_EXC_COMP if w == b1 else T_EXC_OTHER
            emit(w, tag, bundle.comp.index)
        comp_used = {b1}
        if len(bundle.comp.vertices) > 1:
            comp_set = [int(x) for x in bundle.comp.vertices]
            # clean-up paths for labelled cells of the component
            for gid, lab in sorted(comp_label_sets[id(bundle)].items()):
                if not lab:
                    continue
                cellv = [int(x) for x in diss.members(gid)
                         if x not in comp_used and x != b2 and not visited[x]]
                if len(cellv) < sectors + 1:
                    return f"component cell {gid} lacks clean-up anchors"
                anchors = cellv[: sectors + 1]
                seq = cleanup_path(diss.grid_position(gid), anchors, lab, pts, diss.r, norm)
                for w in seq:
                    visited[w] = True
                    comp_used.add(w)
                    emit(w, T_EXC_LABEL if w in labels.label_of else T_EXC_COMP,
                         bundle.comp.index)
            for w in comp_set:
                if w not in comp_used and w != b2 and not visited[w]:
                    visited[w] = True
                    comp_used.add(w)
                    emit(w, T_EXC_COMP, bundle.comp.index)
            visited[b2] = True
            emit(b2, T_EXC_COMP, bundle.comp.index)
        # return along the second escort
        for w in bundle.path2[-2::-1]:
            visited[w] = True
            emit(w, T_EXC_OTHER, bundle.comp.index)
        count_use(conn[-1])
        extra_spend[conn[-1]] = extra_spend.get(conn[-1], 0) + 1
        for idx in range(len(conn) - 2, j, -1):
            w = pools.pick(conn[idx])
            if w is None:
                return f"cell {conn[idx]} exhausted during excursion ascent"
            count_use(conn[idx])
            emit(w, T_EXC_OTHER, bundle.comp.index)
        w = pools.pick(q_gid)
        if w is None:
            return f"cell {q_gid} exhausted after excursion"
        count_use(q_gid)
        emit(w, T_EXC_OTHER, bundle.comp.index)
        bundle.span = cycle[span_start:]
        for gid, c in use.items():
            excursion_use[gid] = max(excursion_use.get(gid, 0), c)
        return w

    # start the cycle at the lowest spendable vertex of the root cell
    cur = pools.pick(walk[0])
    if cur is None:
        return fail("budget", f"root cell {walk[0]} has no spendable vertices")
    emit(cur, T_ARRIVAL, walk[0])

    N = len(walk) - 1
    min_unvisited = None
    for t, q in enumerate(walk):
        if t == first_occ[q] and q in trigger_map:
            out = excursion(trigger_map[q], q, cur)
            if isinstance(out, str):
                return fail("budget", out, q)
            cur = out
        if t < last_occ[q]:
            nxt = walk[t + 1]
            w = pools.pick(nxt)
            if w is None:
                return fail("budget", f"cell {nxt} exhausted", nxt)
            emit(w, T_ARRIVAL, nxt)
            cur = w
        else:
            avail = pools.unvisited_count(q)
            min_unvisited = avail if min_unvisited is None else min(min_unvisited, avail)
            if avail < sectors:
                return fail("budget", f"cell {q} lacks clean-up anchors ({avail} left)", q)
            fresh = [pools.pick(q) for _ in range(sectors)]
            lab = labels.by_cell.get(q, [])
            seq = cleanup_path(diss.grid_position(q), [cur] + fresh, lab, pts, diss.r, norm)
            for w in seq[1:]:
                visited[w] = True
                emit(w, T_LABEL if w in labels.label_of else T_ANCHOR, q)
            for w in pools.drain(q):
                emit(w, T_REST, q)
                rest_by_gid.setdefault(q, []).append(w)
            if t < N:
                w = pools.pick(walk[t + 1])
                if w is None:
                    return fail("budget", f"cell {walk[t + 1]} exhausted", walk[t + 1])
                emit(w, T_ARRIVAL, walk[t + 1])
                cur = w

    stats.min_unvisited_at_cleanup = min_unvisited
    stats.max_excursion_cell_use = max(excursion_use.values(), default=0)
    stats.max_cell_spent = max(
        (pools.spent[g] + extra_spend.get(g, 0) for g in pools.spent), default=0)
    if len(cycle) != n:
        return fail("coverage", f"cycle covers {len(cycle)} of {n} vertices")
    check = verify_cycle(pts, norm, rho, cycle)
    if not check:
        return fail("verify", check.reason or "", check.detail)
    plan = BuildPlan(diss, sg, comps, bundles, labels, None, giant_gids, walk,
                     int(giant_gids[0]), rest_by_gid, cell_sequence)
    return BuildResult(cycle, None, stats, plan, trace)
