"""Cycles of every length 3..n derived from one constructed Hamilton cycle.

The family is represented as the base cycle plus a shrinking schedule in
which every step removes net one vertex and is certified by checking the
single new adjacency it creates.  Shrink order: labelled vertices first,
then each small component down to its two escort endpoints, then (after
borrowing spare cell vertices to keep the count moving by one) the whole
excursion of that component in a single restore-and-remove step, and
finally the giant's cells leaf by leaf along the spanning tree.
"""

from collections.abc import Mapping
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .builder import BuilderConstants, BuildFailure, BuildResult, build_hamilton_cycle
from .geometry import NormSpec, lp_distance
from .graph import geometric_graph
from .oracles import CYCLE_SPECTRUM_MAX, find_cycle_of_length


class _ScheduleError(Exception):
    def __init__(self, target_length, reason):
        super().__init__(reason)
        self.target_length = target_length
        self.reason = reason


class _CycleEditor:
    """Doubly linked circular list over vertex ids with geometric checks."""

    def __init__(self, cycle, points, norm: NormSpec, rho: float):
        n = len(points)
        self.points = np.asarray(points, dtype=np.float64)
        self.norm = norm
        self.rho = rho
        self.next = np.full(n, -1, dtype=np.int64)
        self.prev = np.full(n, -1, dtype=np.int64)
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            self.next[a] = b
            self.prev[b] = a
        self.length = len(cycle)

    def present(self, v) -> bool:
        return self.next[v] != -1

    def _ok(self, u, w) -> bool:
        return lp_distance(self.points[u], self.points[w], self.norm) <= self.rho

    def remove(self, v, verify=True):
        if not self.present(v):
            raise _ScheduleError(self.length - 1, f"vertex {v} not on the cycle")
        if self.length <= 3:
            raise _ScheduleError(self.length - 1, "cycle cannot shrink below 3")
        pv, nv = int(self.prev[v]), int(self.next[v])
        if verify and not self._ok(pv, nv):
            raise _ScheduleError(self.length - 1, f"removing {v} leaves non-edge {pv}-{nv}")
        self.next[pv] = nv
        self.prev[nv] = pv
        self.next[v] = self.prev[v] = -1
        self.length -= 1
        return (int(v), pv, nv)

    def restore(self, v, pv, nv):
        self.next[pv] = v
        self.prev[v] = pv
        self.next[v] = nv
        self.prev[nv] = v
        self.length += 1

    def check_link(self, u) -> bool:
        return self._ok(int(u), int(self.next[u]))

    def extract(self) -> list:
        start = int(np.flatnonzero(self.next >= 0)[0])
        out = [start]
        v = int(self.next[start])
        while v != start:
            out.append(v)
            v = int(self.next[v])
        return out


def _build_schedule(result: BuildResult, points, norm, rho):
    """Shrink steps from n down to 3; each verified at construction time."""
    plan = result.plan
    ed = _CycleEditor(result.cycle, points, norm, rho)
    steps = []

    def rm(v):
        steps.append(("rm", ed.remove(int(v))))

    for v in sorted(plan.labels.label_of):
        rm(v)

    for b in plan.bundles:
        b1, b2 = b.b
        for v in sorted(set(map(int, b.comp.vertices)) - {b1, b2}):
            rm(v)
        span_alive = [v for v in b.span if ed.present(v)]
        k = len(span_alive) - 1
        borrows = _pick_borrows(plan, ed, b, k)
        if borrows is None:
            raise _ScheduleError(ed.length - 1, f"not enough spare cell vertices to shrink past component {b.comp.index}")
        recs = []
        for v in borrows:
            rec = ed.remove(v)
            recs.append(rec)
            steps.append(("rm", rec))
        # atomic step: put the borrowed vertices back, drop the excursion
        for rec in reversed(recs):
            ed.restore(*rec)
        entry = int(ed.prev[span_alive[0]])
        for v in span_alive:
            ed.remove(v, verify=False)
        if not ed.check_link(entry):
            raise _ScheduleError(ed.length, f"excursion removal leaves a long edge at {entry}")
        steps.append(("swap", list(reversed(recs)), span_alive))

    gid_of_local = {i: int(g) for i, g in enumerate(plan.giant_gids)}
    adj = {int(g): set() for g in plan.giant_gids}
    for a, b in plan.tree.edges:
        ga, gb = gid_of_local[a], gid_of_local[b]
        adj[ga].add(gb)
        adj[gb].add(ga)
    root = plan.root_gid
    alive = set(adj)
    while len(alive) > 1:
        leaf = min(g for g in alive if len(adj[g]) <= 1 and g != root)
        for v in reversed(plan.cell_sequence[leaf]):
            if ed.present(v):
                rm(v)
        for nb in adj[leaf]:
            adj[nb].discard(leaf)
        del adj[leaf]
        alive.remove(leaf)
    for v in reversed(plan.cell_sequence[root]):
        if ed.length <= 3:
            break
        if ed.present(v):
            rm(v)
    if ed.length != 3:
        raise _ScheduleError(3, f"drain stopped at length {ed.length}")
    return steps


def _pick_borrows(plan, ed, bundle, k):
    """k spare removable vertices, connector cells first, then any cell."""
    if k <= 0:
        return []
    out = []
    pools = [plan.rest_by_gid.get(g, []) for g in bundle.connector]
    pools += [plan.rest_by_gid[g] for g in sorted(plan.rest_by_gid) if g not in set(bundle.connector)]
    for pool in pools:
        for v in reversed(pool):
            if ed.present(v):
                out.append(v)
                if len(out) == k:
                    return out
    return None


class PancyclicFamily(Mapping):
    """Lazy map length -> verified cycle for every length in 3..n."""

    def __init__(self, points, norm, rho, base_cycle, steps=None, explicit=None):
        self.points = np.asarray(points, dtype=np.float64)
        self.norm = norm
        self.rho = rho
        self.base_cycle = list(base_cycle) if base_cycle is not None else None
        self.steps = steps
        self._explicit = explicit
        self.n = len(self.points)

    def __len__(self):
        return self.n - 2

    def __iter__(self):
        return iter(range(3, self.n + 1))

    def __contains__(self, L):
        return 3 <= L <= self.n

    def __getitem__(self, L) -> list:
        if not 3 <= L <= self.n:
            raise KeyError(L)
        if self._explicit is not None:
            return list(self._explicit[L])
        if L == self.n:
            return list(self.base_cycle)
        ed = _CycleEditor(self.base_cycle, self.points, self.norm, self.rho)
        self._replay(ed, self.n - L)
        return ed.extract()

    def _replay(self, ed, count):
        for kind, *payload in self.steps[:count]:
            if kind == "rm":
                (v, _, _) = payload[0]
                ed.remove(v, verify=False)
            else:
                restores, removed = payload
                for rec in restores:   # stored in application order
                    ed.restore(*rec)
                for v in removed:
                    ed.remove(v, verify=False)

    def iter_cycles(self):
        """(length, cycle) pairs from n down to 3 in one incremental pass."""
        if self._explicit is not None:
            for L in sorted(self._explicit, reverse=True):
                yield L, list(self._explicit[L])
            return
        ed = _CycleEditor(self.base_cycle, self.points, self.norm, self.rho)
        yield self.n, ed.extract()
        for step in self.steps:
            kind, *payload = step
            if kind == "rm":
                ed.remove(payload[0][0], verify=False)
            else:
                restores, removed = payload
                for rec in restores:   # stored in application order
                    ed.restore(*rec)
                for v in removed:
                    ed.remove(v, verify=False)
            yield ed.length, ed.extract()


@dataclass
class PancyclicResult:
    family: Optional[PancyclicFamily]
    failure: Optional[BuildFailure]
    build: Optional[BuildResult] = None

    @property
    def success(self) -> bool:
        return self.family is not None


def build_pancyclic_family(points, norm: NormSpec, rho: float, consts: BuilderConstants,
                           r: float = None, audit_first: bool = False,
                           audit_constants=None) -> PancyclicResult:
    """A verified cycle of every length 3..n, or a structured failure naming
    the first length that could not be produced.

    The constructive route shrinks a built Hamilton cycle step by step;
    when the build itself fails and the instance is small enough, the
    exact-oracle route produces the family directly.
    """
    pts = np.ascontiguousarray(points, dtype=np.float64)
    n = pts.shape[0]
    if consts.k_pancyclic is not None and consts.k_pancyclic != consts.K:
        consts = replace(consts, K=consts.k_pancyclic)
    result = build_hamilton_cycle(pts, norm, rho, consts, r=r, audit_first=audit_first,
                                  audit_constants=audit_constants, collect_trace=True)
    if result.success:
        try:
            steps = _build_schedule(result, pts, norm, rho)
        except _ScheduleError as exc:
            return PancyclicResult(
                None, BuildFailure("pancyclic", exc.reason, exc.target_length), result)
        return PancyclicResult(PancyclicFamily(pts, norm, rho, result.cycle, steps), None, result)

    if n <= CYCLE_SPECTRUM_MAX:
        g = geometric_graph(pts, norm, rho)
        explicit = {}
        for L in range(3, n + 1):
            cyc = find_cycle_of_length(g, L)
            if cyc is None:
                return PancyclicResult(
                    None, BuildFailure("pancyclic", f"no cycle of length {L} exists", L), result)
            explicit[L] = cyc
        return PancyclicResult(PancyclicFamily(pts, norm, rho, None, explicit=explicit),
                               None, result)
    return PancyclicResult(None, BuildFailure("pancyclic", result.failure.reason,
                                              result.failure.witness), result)
