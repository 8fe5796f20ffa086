"""Points in the unit cube, l_p norms, seeded sampling and the grid index.

Points are represented as numpy arrays: a single point is a length-d
vector, a point set an (n, d) array with every coordinate in [0, 1].
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInputError

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class NormSpec:
    """Ambient dimension d >= 2 and the l_p norm (1 < p <= inf) defining edges."""

    d: int = 2
    p: float = 2.0
    diam_factor: float = field(init=False)

    def __post_init__(self):
        if not (isinstance(self.d, int) and self.d >= 2):
            raise ValueError(f"dimension must be an integer >= 2, got {self.d}")
        if not self.p > 1:
            raise ValueError(f"norm exponent must satisfy p > 1, got {self.p}")
        # d**(1/p) with 1/inf == 0; equals the l_p diameter of the unit cube
        factor = 1.0 if math.isinf(self.p) else self.d ** (1.0 / self.p)
        object.__setattr__(self, "diam_factor", factor)

    @property
    def is_euclidean_plane(self):
        return self.d == 2 and self.p == 2.0


def lp_distance(a, b, norm: NormSpec) -> float:
    """l_p distance between two points; symmetric, zero iff equal."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != (norm.d,) or b.shape != (norm.d,):
        raise ValueError(f"expected points of dimension {norm.d}, got shapes {a.shape}, {b.shape}")
    diff = np.abs(a - b)
    if math.isinf(norm.p):
        return float(diff.max())
    if norm.p == 2.0:
        return float(math.sqrt(float((diff * diff).sum())))
    return float((diff ** norm.p).sum() ** (1.0 / norm.p))


def lp_distances(points, x, norm: NormSpec):
    """Vectorized l_p distances from every row of `points` to point `x`."""
    pts = np.asarray(points, dtype=np.float64)
    diff = np.abs(pts - np.asarray(x, dtype=np.float64))
    if math.isinf(norm.p):
        return diff.max(axis=1)
    if norm.p == 2.0:
        return np.sqrt((diff * diff).sum(axis=1))
    return (diff ** norm.p).sum(axis=1) ** (1.0 / norm.p)


def splitmix64(x: int) -> int:
    """One step of the SplitMix64 mixer (the documented seed-mixing primitive)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def mix_seed(master_seed: int, trial_index: int) -> int:
    """Derive the substream seed for one trial from (master_seed, trial_index).

    Trials are therefore order-independent: the stream for trial t depends
    only on the pair, never on how many trials ran before it.
    """
    return splitmix64((master_seed & _MASK64) ^ splitmix64(trial_index & _MASK64))


def rng_for_seed(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox) keyed by a 64-bit seed."""
    key = np.array([seed & _MASK64, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_uniform_points(n: int, norm: NormSpec, seed: int) -> np.ndarray:
    """n i.i.d. uniform points in [0,1]^d; bitwise reproducible per (n, norm, seed)."""
    if n < 1:
        raise EmptyInputError("cannot sample an empty point set")
    return rng_for_seed(seed).random((n, norm.d))


class GridIndex:
    """Uniform-grid spatial hash over a fixed point set.

    Every point index lives in exactly one bucket, keyed by the integer
    tuple floor(coords / cell_side).  Immutable after construction.
    """

    def __init__(self, points, cell_side: float):
        if not cell_side > 0:
            raise ValueError(f"cell_side must be positive, got {cell_side}")
        self.points = np.ascontiguousarray(points, dtype=np.float64)
        self.cell_side = float(cell_side)
        self.n = self.points.shape[0]
        cells = np.floor(self.points / self.cell_side).astype(np.int64)
        self._cells = cells
        buckets = {}
        for i, key in enumerate(map(tuple, cells)):
            buckets.setdefault(key, []).append(i)
        self.buckets = {k: np.asarray(v, dtype=np.int64) for k, v in buckets.items()}

    def neighbors(self, i: int, radius: float, norm: NormSpec) -> np.ndarray:
        """Exactly the indices j != i with lp_distance(x_i, x_j) <= radius."""
        if not 0 <= i < self.n:
            raise ValueError(f"unknown point index {i}")
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        reach = int(math.ceil(radius / self.cell_side)) if radius > 0 else 0
        base = self._cells[i]
        cand = []
        for off in np.ndindex(*(2 * reach + 1,) * self.points.shape[1]):
            key = tuple(base + np.asarray(off) - reach)
            hit = self.buckets.get(key)
            if hit is not None:
                cand.append(hit)
        cand = np.concatenate(cand)
        cand = cand[cand != i]
        if cand.size == 0:
            return cand
        dist = lp_distances(self.points[cand], self.points[i], norm)
        out = cand[dist <= radius]
        out.sort()
        return out


def grid_build(points, cell_side: float) -> GridIndex:
    return GridIndex(points, cell_side)


def grid_neighbors(idx: GridIndex, i: int, radius: float, norm: NormSpec) -> np.ndarray:
    return idx.neighbors(i, radius, norm)
