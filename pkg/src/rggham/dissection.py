"""The grid dissection, dense/sparse/bad classification and its audit.

The unit cube is dissected into half-open cells of side eta*r anchored at
the lattice points of (eta*r)Z^d inside [0,1]^d.  A lattice point is dense
when its cell holds at least K input points, sparse otherwise, and bad when
every lattice point within the shrunken threshold r' = r(1 - eta*d^(1/p))
of it (itself included) is sparse.  Two cells whose lattice points are
within r' of each other have all their points pairwise within r, which is
what every construction downstream relies on.
"""

import csv
import math
from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CapacityError
from .geometry import NormSpec, lp_distances, rng_for_seed

_GRID_CAP = 20_000_000
_EXACT_DIAMETER_LIMIT = 2000


def entropy_H(x: float) -> float:
    """x ln x - x + 1, with the limit value 1 at x = 0."""
    if x < 0:
        raise ValueError(f"entropy argument must be >= 0, got {x}")
    if x == 0.0:
        return 1.0
    return x * math.log(x) - x + 1.0


def chernoff_upper_bound(n: int, p: float, k: float) -> float:
    """Upper bound on P(Binomial(n,p) <= k) for k <= np: exp(-np * H(k/np))."""
    if not 0 < p <= 1:
        raise ValueError(f"success probability must be in (0, 1], got {p}")
    mu = n * p
    if k < 0 or k > mu:
        raise ValueError(f"bound requires 0 <= k <= np (k={k}, np={mu})")
    return math.exp(-mu * entropy_H(k / mu))


class Dissection:
    """Grid of lattice points with per-cell membership of the input points."""

    def __init__(self, points, norm: NormSpec, eta: float, r: float, K: int):
        if not r > 0:
            raise ValueError(f"r must be positive, got {r}")
        if not 0 < eta < 1.0 / norm.diam_factor:
            raise ValueError(
                f"eta must lie in (0, {1.0 / norm.diam_factor:.6g}) for this norm, got {eta}"
            )
        if K < 1:
            raise ValueError(f"dense threshold must be >= 1, got {K}")
        self.norm = norm
        self.eta = float(eta)
        self.r = float(r)
        self.K = int(K)
        self.spacing = self.eta * self.r
        self.r_prime = self.r * (1.0 - self.eta * norm.diam_factor)
        per_axis = int(math.floor(1.0 / self.spacing + 1e-9)) + 1
        self.shape = (per_axis,) * norm.d
        self.n_grid = per_axis ** norm.d
        if self.n_grid > _GRID_CAP:
            raise CapacityError(f"grid of {self.n_grid} lattice points exceeds capacity")

        self.points = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, norm.d)
        n = self.points.shape[0]
        cells = np.floor(self.points / self.spacing).astype(np.int64)
        np.clip(cells, 0, per_axis - 1, out=cells)
        self.point_cell = np.ravel_multi_index(cells.T, self.shape) if n else np.zeros(0, np.int64)
        self.counts = np.bincount(self.point_cell, minlength=self.n_grid)
        self._order = np.argsort(self.point_cell, kind="stable")
        self._bounds = np.searchsorted(self.point_cell[self._order], np.arange(self.n_grid + 1))

    def members(self, gid: int) -> np.ndarray:
        """Input point indices lying in the cell of lattice point gid."""
        return self._order[self._bounds[gid]:self._bounds[gid + 1]]

    def grid_position(self, gids) -> np.ndarray:
        idx = np.unravel_index(np.asarray(gids), self.shape)
        return np.stack(idx, axis=-1) * self.spacing

    def stencil(self, threshold: float) -> np.ndarray:
        """Nonzero integer offsets whose scaled l_p norm is <= threshold."""
        reach = int(math.floor(threshold / self.spacing + 1e-12))
        rng = np.arange(-reach, reach + 1)
        grids = np.meshgrid(*([rng] * self.norm.d), indexing="ij")
        offs = np.stack([g.ravel() for g in grids], axis=1)
        offs = offs[np.any(offs != 0, axis=1)]
        scaled = np.abs(offs) * self.spacing
        if math.isinf(self.norm.p):
            norms = scaled.max(axis=1)
        else:
            norms = (scaled ** self.norm.p).sum(axis=1) ** (1.0 / self.norm.p)
        return offs[norms <= threshold]


def build_dissection(points, norm: NormSpec, eta: float, r: float, K: int) -> Dissection:
    return Dissection(points, norm, eta, r, K)


class _Diameter:
    """Geometric diameter of a point set with lazy exact evaluation.

    Small sets are measured exactly; larger ones get a double-sweep lower
    bound and a bounding-box upper bound, falling back to the exact chunked
    maximum only when a verdict straddles the interval.
    """

    def __init__(self, positions, norm):
        self.positions = positions
        self.norm = norm
        self._exact = None
        m = len(positions)
        if m <= 1:
            self._exact = 0.0
            self.lb = self.ub = 0.0
        elif m <= _EXACT_DIAMETER_LIMIT:
            self.lb = self.ub = self.exact()
        else:
            lb = 0.0
            x = positions[0]
            for _ in range(3):
                d = lp_distances(positions, x, norm)
                j = int(np.argmax(d))
                lb = max(lb, float(d[j]))
                x = positions[j]
            span = positions.max(axis=0) - positions.min(axis=0)
            if math.isinf(norm.p):
                ub = float(span.max())
            else:
                ub = float((span ** norm.p).sum() ** (1.0 / norm.p))
            self.lb, self.ub = lb, ub

    def exact(self) -> float:
        if self._exact is None:
            best = 0.0
            pos = self.positions
            for i in range(len(pos) - 1):
                d = lp_distances(pos[i + 1:], pos[i], self.norm)
                best = max(best, float(d.max()))
            self._exact = best
            self.lb = self.ub = best
        return self._exact

    def ge(self, t: float) -> bool:
        if self.lb >= t:
            return True
        if self.ub < t:
            return False
        return self.exact() >= t

    def gt(self, t: float) -> bool:
        if self.lb > t:
            return True
        if self.ub <= t:
            return False
        return self.exact() > t


def _grouped_adjacency(ids, mask, shape, offsets):
    """CSR-ish adjacency {gid: array of gids} under the offset stencil."""
    shape_arr = np.asarray(shape)
    srcs, dsts = [], []
    for off in offsets:
        src_lo = np.maximum(0, -off)
        src_hi = shape_arr - np.maximum(0, off)
        if np.any(src_hi <= src_lo):
            continue
        dst_lo = src_lo + off
        src = tuple(slice(a, b) for a, b in zip(src_lo, src_hi))
        dst = tuple(slice(a, b) for a, b in zip(dst_lo, dst_lo + (src_hi - src_lo)))
        both = mask[src] & mask[dst]
        if not both.any():
            continue
        where = np.nonzero(both)
        src_idx = np.stack(where, axis=0) + src_lo[:, None]
        dst_idx = src_idx + off[:, None]
        srcs.append(np.ravel_multi_index(src_idx, shape))
        dsts.append(np.ravel_multi_index(dst_idx, shape))
    adj = {int(g): np.zeros(0, dtype=np.int64) for g in ids}
    if srcs:
        src_all = np.concatenate(srcs)
        dst_all = np.concatenate(dsts)
        order = np.argsort(src_all, kind="stable")
        src_all, dst_all = src_all[order], dst_all[order]
        uniq, starts = np.unique(src_all, return_index=True)
        bounds = np.append(starts, len(src_all))
        for t, g in enumerate(uniq):
            nbrs = dst_all[bounds[t]:bounds[t + 1]]
            nbrs.sort()
            adj[int(g)] = nbrs
    return adj


class StructureGraphs:
    """Dense/sparse/bad classification plus components of D and B."""

    def __init__(self, diss: Dissection):
        self.diss = diss
        norm = diss.norm
        dense_mask = (diss.counts >= diss.K).reshape(diss.shape)
        self.dense_mask_flat = dense_mask.ravel().copy()
        self.dense_ids = np.flatnonzero(self.dense_mask_flat)
        self.sparse_ids = np.flatnonzero(~self.dense_mask_flat)

        offsets = diss.stencil(diss.r_prime)
        self._offsets = offsets
        # a sparse lattice point is bad iff no dense point lies within r'
        shape_arr = np.asarray(diss.shape)
        near_dense = dense_mask.copy()
        for off in offsets:
            src_lo = np.maximum(0, -off)
            src_hi = shape_arr - np.maximum(0, off)
            if np.any(src_hi <= src_lo):
                continue
            dst_lo = src_lo + off
            src = tuple(slice(a, b) for a, b in zip(src_lo, src_hi))
            dst = tuple(slice(a, b) for a, b in zip(dst_lo, dst_lo + (src_hi - src_lo)))
            near_dense[src] |= dense_mask[dst]
        bad_mask = (~dense_mask) & (~near_dense)
        self.bad_ids = np.flatnonzero(bad_mask.ravel())

        self.dense_adj = _grouped_adjacency(self.dense_ids, dense_mask, diss.shape, offsets)
        self._bad_adj = _grouped_adjacency(self.bad_ids, bad_mask, diss.shape, offsets)
        self.dense_components = self._components(self.dense_ids, self.dense_adj, dense_mask.ravel())
        self.bad_components = self._components(self.bad_ids, self._bad_adj, bad_mask.ravel())
        self.comp_of_dense = {}
        for ci, comp in enumerate(self.dense_components):
            for gid in comp:
                self.comp_of_dense[int(gid)] = ci

        self.dense_diameters = [
            _Diameter(diss.grid_position(comp), norm) for comp in self.dense_components
        ]
        self.bad_diameters = [
            _Diameter(diss.grid_position(comp), norm) for comp in self.bad_components
        ]
        large = [ci for ci, dm in enumerate(self.dense_diameters) if dm.ge(diss.r_prime)]
        self.large_dense = large
        self.giant: Optional[int] = large[0] if len(large) == 1 else None

    @staticmethod
    def _components(ids, adj, member_mask):
        comps = []
        seen = set()
        for start in map(int, ids):
            if start in seen:
                continue
            comp = []
            seen.add(start)
            q = deque([start])
            while q:
                gid = q.popleft()
                comp.append(gid)
                for ngid in adj[gid]:
                    ngid = int(ngid)
                    if member_mask[ngid] and ngid not in seen:
                        seen.add(ngid)
                        q.append(ngid)
            comps.append(np.array(sorted(comp), dtype=np.int64))
        return comps

    def restricted_dense_path(self, src: int, dst: int, center, ball_radius: float):
        """BFS path src -> dst through dense lattice points inside the ball.

        Returns the list of lattice ids or None; used both by the locality
        audit and by the connector search of the cycle builder.
        """
        diss = self.diss
        center = np.asarray(center, dtype=np.float64)
        pos = diss.grid_position(self.dense_ids)
        near = lp_distances(pos, center, diss.norm) <= ball_radius
        allowed = set(map(int, self.dense_ids[near]))
        if src not in allowed or dst not in allowed:
            return None
        prev = {src: -1}
        q = deque([src])
        while q:
            gid = q.popleft()
            if gid == dst:
                path = [gid]
                while prev[path[-1]] != -1:
                    path.append(prev[path[-1]])
                return path[::-1]
            for ngid in self.dense_adj[gid]:
                ngid = int(ngid)
                if ngid in allowed and ngid not in prev:
                    prev[ngid] = gid
                    q.append(ngid)
        return None


def classify_and_extract(diss: Dissection, norm: NormSpec = None) -> StructureGraphs:
    return StructureGraphs(diss)


@dataclass(frozen=True)
class AuditConstants:
    """Scale factors of the structural audit (multiples of r)."""

    separation: float = 1000.0
    locality: float = 100.0
    proximity: float = 25.0

    @classmethod
    def desk(cls, r: float, norm: NormSpec) -> "AuditConstants":
        """Scaled-down profile for feasible instance sizes.

        At desk scale the asymptotic separation constant exceeds the cube
        diameter, which would make the diameter dichotomy unsatisfiable, so
        the separation shrinks below the diameter a dense grid can actually
        span and the locality ball is left generous enough to cover the
        whole cube.
        """
        diam = norm.diam_factor
        sep = min(1000.0, 0.7 * diam / r)
        loc = min(100.0, 1.2 * diam / r)
        prox = min(25.0, sep)
        return cls(separation=sep, locality=loc, proximity=prox)


@dataclass
class PropertyVerdict:
    name: str
    passed: bool
    witness: Optional[str] = None


@dataclass
class PropertyAudit:
    constants: AuditConstants
    verdicts: dict

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts.values())

    def first_failure(self) -> Optional[PropertyVerdict]:
        for name in sorted(self.verdicts):
            if not self.verdicts[name].passed:
                return self.verdicts[name]
        return None

    def to_csv_rows(self):
        return [
            (name, "pass" if v.passed else "fail", v.witness or "")
            for name, v in sorted(self.verdicts.items())
        ]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["property", "pass", "witness"])
            for row in self.to_csv_rows():
                w.writerow(row)


def _min_cross_distance(pos_a, pos_b, norm):
    best = math.inf
    arg = (None, None)
    for i in range(len(pos_a)):
        d = lp_distances(pos_b, pos_a[i], norm)
        j = int(np.argmin(d))
        if d[j] < best:
            best = float(d[j])
            arg = (i, j)
    return best, arg


def audit_properties(sg: StructureGraphs, diss: Dissection, constants: AuditConstants,
                     p5_pairs=None, p5_samples=32, seed=0) -> PropertyAudit:
    """Check the six structural properties; failures carry concrete witnesses.

    P5 is audited only on the supplied pairs (the ones the builder will
    query) plus a deterministic random sample, not on all pairs.
    """
    norm = diss.norm
    S = constants.separation * diss.r
    L = constants.locality * diss.r
    M = constants.proximity * diss.r
    rp = diss.r_prime
    verdicts = {}

    small = [ci for ci, dm in enumerate(sg.dense_diameters) if not dm.ge(rp)]

    # P1: diameter dichotomy for components of D
    witness = None
    for ci, dm in enumerate(sg.dense_diameters):
        if not (not dm.ge(rp) or dm.gt(S)):
            witness = f"component {ci} has diameter {dm.exact():.6g} in [r', {constants.separation}r]"
            break
    verdicts["P1"] = PropertyVerdict("P1", witness is None, witness)

    # P2: small-small separation
    witness = None
    for ai in range(len(small)):
        for bi in range(ai + 1, len(small)):
            pa = diss.grid_position(sg.dense_components[small[ai]])
            pb = diss.grid_position(sg.dense_components[small[bi]])
            d, _ = _min_cross_distance(pa, pb, norm)
            if d <= S:
                witness = f"small components {small[ai]},{small[bi]} at distance {d:.6g}"
                break
        if witness:
            break
    verdicts["P2"] = PropertyVerdict("P2", witness is None, witness)

    # P3: small-to-bad separation
    witness = None
    if len(sg.bad_ids) and small:
        pb = diss.grid_position(sg.bad_ids)
        for ci in small:
            pa = diss.grid_position(sg.dense_components[ci])
            d, (_, j) = _min_cross_distance(pa, pb, norm)
            if d <= S:
                witness = f"small component {ci} within {d:.6g} of bad point {int(sg.bad_ids[j])}"
                break
    verdicts["P3"] = PropertyVerdict("P3", witness is None, witness)

    # P4: bad-bad dichotomy
    witness = None
    if len(sg.bad_ids) > 1:
        pb = diss.grid_position(sg.bad_ids)
        for i in range(len(pb) - 1):
            d = lp_distances(pb[i + 1:], pb[i], norm)
            viol = np.flatnonzero((d >= rp) & (d <= S))
            if viol.size:
                j = int(viol[0]) + i + 1
                witness = (
                    f"bad points {int(sg.bad_ids[i])},{int(sg.bad_ids[j])} at distance "
                    f"{float(lp_distances(pb[j:j + 1], pb[i], norm)[0]):.6g}"
                )
                break
    verdicts["P4"] = PropertyVerdict("P4", witness is None, witness)

    # P5: local connectivity inside D for nearby points of large components
    witness = None
    pairs = list(p5_pairs or [])
    large_ids = [gid for ci in sg.large_dense for gid in map(int, sg.dense_components[ci])]
    if p5_samples and len(large_ids) >= 2:
        rng = rng_for_seed(seed)
        pos = diss.grid_position(np.asarray(large_ids))
        for _ in range(p5_samples):
            a = int(rng.integers(len(large_ids)))
            d = lp_distances(pos, pos[a], norm)
            near = np.flatnonzero((d < M) & (np.arange(len(large_ids)) != a))
            if near.size == 0:
                continue
            b = int(near[int(rng.integers(near.size))])
            pairs.append((large_ids[a], large_ids[b]))
    for p1, p2 in pairs:
        center = diss.grid_position(p1)
        if sg.restricted_dense_path(int(p1), int(p2), center, L) is None:
            witness = f"no dense path {int(p1)} -> {int(p2)} inside the {constants.locality}r ball"
            break
    verdicts["P5"] = PropertyVerdict("P5", witness is None, witness)

    # P6: exactly one component of diameter >= r'
    count = len(sg.large_dense)
    witness = None if count == 1 else f"{count} components of diameter >= r' ({sg.large_dense})"
    verdicts["P6"] = PropertyVerdict("P6", count == 1, witness)

    return PropertyAudit(constants, verdicts)
