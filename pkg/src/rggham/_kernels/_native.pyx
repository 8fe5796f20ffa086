# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled implementations of the hot kernels.

Same contracts as ``pure``: anchored subset DP for Hamilton paths, the
cycle-length spectrum DP, and grid-accelerated k-th nearest distances
(the latter for d == 2 only; the dispatcher falls back to pure for other
dimensions).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs, isinf, pow, sqrt

cnp.import_array()

BACKEND_NAME = "native"

cdef extern from *:
    int __builtin_ctz(unsigned int)
    int __builtin_popcount(unsigned int)


def ham_path_dp(masks, int n):
    cdef cnp.ndarray[cnp.uint32_t, ndim=1] masks_arr = np.ascontiguousarray(masks, dtype=np.uint32)
    cdef cnp.ndarray[cnp.uint32_t, ndim=1] dp_arr = np.zeros(1 << n, dtype=np.uint32)
    cdef unsigned int* adj = <unsigned int*> masks_arr.data
    cdef unsigned int* dp = <unsigned int*> dp_arr.data
    cdef unsigned long long S
    cdef unsigned long long full = (1ULL << n) - 1
    cdef unsigned int e, free, bit
    cdef int v
    dp[1] = 1
    if n == 1:
        return dp_arr
    for S in range(1, full + 1, 2):
        e = dp[S]
        if e == 0:
            continue
        free = <unsigned int> ((~S) & full)
        while free:
            bit = free & (~free + 1)
            free ^= bit
            v = __builtin_ctz(bit)
            if adj[v] & e:
                dp[S | bit] |= bit
    return dp_arr


def cycle_length_mask(masks, int n):
    cdef cnp.ndarray[cnp.uint32_t, ndim=1] masks_arr = np.ascontiguousarray(masks, dtype=np.uint32)
    cdef unsigned int* full_adj = <unsigned int*> masks_arr.data
    cdef unsigned long long out = 0
    cdef int a, m, v, pc
    cdef unsigned int S, size, e, adj0, free, bit
    cdef unsigned int adj[32]
    cdef cnp.ndarray[cnp.uint32_t, ndim=1] dp_arr
    cdef unsigned int* dp
    for a in range(n - 2):
        m = n - a
        for v in range(m):
            adj[v] = full_adj[a + v] >> a
        adj0 = adj[0]
        size = 1u << (m - 1)
        dp_arr = np.zeros(size, dtype=np.uint32)
        dp = <unsigned int*> dp_arr.data
        for v in range(1, m):
            if (adj0 >> v) & 1u:
                dp[1u << (v - 1)] = 1u << v
        for S in range(1, size):
            e = dp[S]
            if e == 0:
                continue
            pc = __builtin_popcount(S)
            if pc >= 2 and (e & adj0):
                out |= 1ULL << (pc + 1)
            free = ((size - 1) & (~S))
            while free:
                bit = free & (~free + 1)
                free ^= bit
                v = __builtin_ctz(bit) + 1
                if adj[v] & e:
                    dp[S | bit] |= 1u << v
    return int(out)


cdef inline double _dist2d(double dx, double dy, double p) noexcept nogil:
    dx = fabs(dx)
    dy = fabs(dy)
    if isinf(p):
        return dx if dx > dy else dy
    if p == 2.0:
        return sqrt(dx * dx + dy * dy)
    return pow(pow(dx, p) + pow(dy, p), 1.0 / p)


def kth_nearest_all(points, int k, double p, double cell_side):
    """k-th nearest distances for 2-d point sets (grid + expanding rings)."""
    pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef int n = pts.shape[0]
    if pts.shape[1] != 2:
        raise ValueError("native kth_nearest_all supports d == 2 only")
    if not 1 <= k <= n - 1:
        raise ValueError(f"k={k} out of range for n={n}")

    cells = np.floor(pts / cell_side).astype(np.int64)
    cells -= cells.min(axis=0)
    cdef long long gx = int(cells[:, 0].max()) + 1
    cdef long long gy = int(cells[:, 1].max()) + 1
    flat = cells[:, 0] * gy + cells[:, 1]
    order = np.argsort(flat, kind="stable").astype(np.int64)
    sflat = flat[order]
    # dense CSR over the full gx*gy grid
    counts = np.bincount(sflat, minlength=gx * gy)
    starts_arr = np.zeros(gx * gy + 1, dtype=np.int64)
    np.cumsum(counts, out=starts_arr[1:])

    cdef cnp.ndarray[cnp.float64_t, ndim=2] P = pts
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ord_arr = order
    cdef cnp.ndarray[cnp.int64_t, ndim=1] start = starts_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=2] C = np.ascontiguousarray(cells)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)

    cdef double best[64]
    cdef int i, j, t, nb
    cdef long long cx, cy, x0, x1, y0, y1, xx, yy, s, e
    cdef long long pj
    cdef int ring, max_ring
    cdef double dist, guarantee, xi, yi
    cdef bint on_edge

    if k > 64:
        raise ValueError("native kernel supports k <= 64")
    max_ring = <int> (gx if gx > gy else gy)

    with nogil:
        for i in range(n):
            xi = P[i, 0]
            yi = P[i, 1]
            cx = C[i, 0]
            cy = C[i, 1]
            nb = 0
            ring = 0
            while True:
                # visit cells whose Chebyshev index distance equals `ring`
                x0 = cx - ring
                x1 = cx + ring
                y0 = cy - ring
                y1 = cy + ring
                for xx in range(x0, x1 + 1):
                    if xx < 0 or xx >= gx:
                        continue
                    for yy in range(y0, y1 + 1):
                        if yy < 0 or yy >= gy:
                            continue
                        on_edge = (xx == x0 or xx == x1 or yy == y0 or yy == y1)
                        if not on_edge:
                            continue
                        s = start[xx * gy + yy]
                        e = start[xx * gy + yy + 1]
                        for t in range(<int> s, <int> e):
                            pj = ord_arr[t]
                            if pj == i:
                                continue
                            dist = _dist2d(P[pj, 0] - xi, P[pj, 1] - yi, p)
                            # insertion into the running top-k buffer
                            if nb < k:
                                j = nb
                                while j > 0 and best[j - 1] > dist:
                                    best[j] = best[j - 1]
                                    j -= 1
                                best[j] = dist
                                nb += 1
                            elif dist < best[k - 1]:
                                j = k - 1
                                while j > 0 and best[j - 1] > dist:
                                    best[j] = best[j - 1]
                                    j -= 1
                                best[j] = dist
                # all unexplored cells are at index distance > ring, hence
                # coordinate distance > ring * cell_side from point i's cell
                guarantee = ring * cell_side
                if (nb == k and best[k - 1] <= guarantee) or ring >= max_ring:
                    break
                ring += 1
            out[i] = best[k - 1] if nb == k else INFINITY
    return out
