"""Pure numpy/Python implementations of the hot kernels.

These are the fallback used when the compiled extension is not built.
They implement exactly the same contracts as ``_native`` and are the
reference the extension is tested against.
"""

import math

import numpy as np

BACKEND_NAME = "pure"

_ORDER_CACHE = {}


def _popcount32(x):
    x = x - ((x >> np.uint32(1)) & np.uint32(0x55555555))
    x = (x & np.uint32(0x33333333)) + ((x >> np.uint32(2)) & np.uint32(0x33333333))
    x = (x + (x >> np.uint32(4))) & np.uint32(0x0F0F0F0F)
    return (x * np.uint32(0x01010101)) >> np.uint32(24)


def _layers(n):
    """Odd subsets of an n-bit universe grouped by popcount.

    Returns a list indexed by popcount k (1..n) of uint32 arrays.  Cached
    per n because the grouping is reused across many DP calls.
    """
    if n in _ORDER_CACHE:
        return _ORDER_CACHE[n]
    subsets = np.arange(1, 1 << n, 2, dtype=np.uint32)
    pc = _popcount32(subsets)
    layers = [subsets[pc == k] for k in range(n + 1)]
    _ORDER_CACHE[n] = layers
    return layers


def ham_path_dp(masks, n):
    """Subset DP over vertex sets anchored at vertex 0.

    dp[S] is the bitmask of endpoints v such that some simple path starts
    at 0, ends at v and visits exactly the vertex set S (bit 0 always set).
    """
    dp = np.zeros(1 << n, dtype=np.uint32)
    dp[1] = 1
    if n == 1:
        return dp
    layers = _layers(n)
    masks = np.asarray(masks, dtype=np.uint32)
    for k in range(1, n):
        S = layers[k]
        e = dp[S]
        live = e != 0
        if not live.any():
            continue
        S, e = S[live], e[live]
        for v in range(1, n):
            bit = np.uint32(1 << v)
            sel = ((S & bit) == 0) & ((e & masks[v]) != 0)
            if sel.any():
                tgt = S[sel] | bit
                dp[tgt] |= bit
    return dp


def cycle_length_mask(masks, n):
    """Bitmask of achievable simple-cycle lengths (bit L set, 3 <= L <= n).

    One anchored path DP per choice of minimum cycle vertex; a cycle of
    length L is found when a path from the anchor spanning L vertices ends
    next to the anchor.
    """
    out = 0
    masks = [int(m) for m in masks]
    for a in range(n - 2):
        m = n - a
        adj = [(masks[a + i] >> a) for i in range(m)]
        adj0 = adj[0]
        size = 1 << (m - 1)
        dp = [0] * size
        for v in range(1, m):
            if (adj0 >> v) & 1:
                dp[1 << (v - 1)] = 1 << v
        for S in range(1, size):
            e = dp[S]
            if not e:
                continue
            pc = S.bit_count()
            if pc >= 2 and e & adj0:
                out |= 1 << (pc + 1)
            for v in range(1, m):
                b = 1 << (v - 1)
                if S & b:
                    continue
                if adj[v] & e:
                    dp[S | b] |= 1 << v
    return out


def _lp_dist_rows(diff, p):
    if math.isinf(p):
        return np.abs(diff).max(axis=-1)
    if p == 2.0:
        return np.sqrt((diff * diff).sum(axis=-1))
    return (np.abs(diff) ** p).sum(axis=-1) ** (1.0 / p)


def kth_nearest_all(points, k, p, cell_side):
    """Distance from every point to its k-th nearest other point.

    Grid bucketing with per-cell batching: each cell's members are compared
    against candidates from an expanding box of cells until the k-th best
    distance is certified (all unexplored cells are further away than the
    current k-th best).
    """
    pts = np.ascontiguousarray(points, dtype=np.float64)
    n, d = pts.shape
    if not 1 <= k <= n - 1:
        raise ValueError(f"k={k} out of range for n={n}")
    cells = np.floor(pts / cell_side).astype(np.int64)
    lo = cells.min(axis=0)
    cells -= lo
    dims = cells.max(axis=0) + 1
    flat = np.ravel_multi_index(cells.T, dims)
    order = np.argsort(flat, kind="stable")
    sflat = flat[order]
    uniq, starts = np.unique(sflat, return_index=True)
    bounds = np.append(starts, n)
    cell_lookup = {int(c): i for i, c in enumerate(uniq)}
    uniq_idx = np.unravel_index(uniq, dims)
    uniq_idx = np.stack(uniq_idx, axis=1)

    out = np.empty(n, dtype=np.float64)
    max_ring = int(dims.max())
    for ci in range(len(uniq)):
        members = order[bounds[ci]:bounds[ci + 1]]
        base = uniq_idx[ci]
        ring = 1
        while True:
            cand = []
            for off in np.ndindex(*(2 * ring + 1,) * d):
                idx = base + np.asarray(off) - ring
                if np.any(idx < 0) or np.any(idx >= dims):
                    continue
                key = int(np.ravel_multi_index(idx, dims))
                j = cell_lookup.get(key)
                if j is not None:
                    cand.append(order[bounds[j]:bounds[j + 1]])
            cand = np.concatenate(cand)
            diff = pts[members][:, None, :] - pts[cand][None, :, :]
            dist = _lp_dist_rows(diff, p)
            dist[cand[None, :] == members[:, None]] = np.inf
            if dist.shape[1] >= k:
                kth = np.partition(dist, k - 1, axis=1)[:, k - 1]
            else:
                kth = np.full(len(members), np.inf)
            # unexplored cells are at index distance > ring, so any point
            # there is further than (ring) * cell_side in every l_p norm
            guarantee = ring * cell_side
            if np.all(kth <= guarantee) or ring >= max_ring:
                out[members] = kth
                break
            ring += 1
    return out
