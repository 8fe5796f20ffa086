import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from rggham import NormSpec, geometric_graph  # noqa: E402
from rggham.geometry import rng_for_seed  # noqa: E402

NORM2 = NormSpec(2, 2.0)


@pytest.fixture
def norm2():
    return NORM2


@pytest.fixture
def triangle_345():
    """Right triangle with side lengths 0.3, 0.4, 0.5 inside the unit square."""
    return np.array([[0.0, 0.0], [0.3, 0.0], [0.3, 0.4]])


@pytest.fixture
def unit_square():
    return np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def random_graph(seed, n_lo=4, n_hi=10, r_lo=0.2, r_hi=0.9, norm=NORM2):
    rng = rng_for_seed(seed)
    n = int(rng.integers(n_lo, n_hi + 1))
    pts = rng.random((n, norm.d))
    radius = float(rng.uniform(r_lo, r_hi))
    return pts, geometric_graph(pts, norm, radius)


# planted escort fixture: dense block with a plus-shaped sparse hole around
# a 3-point clique, one bridge point in the west and east ring cells
PLANT_R = 0.12
PLANT_ETA = 0.41
PLANT_SP = PLANT_ETA * PLANT_R


def planted_instance(seed, block_w=8, block_h=6, occ=26, holes=((4, 3),), clique_size=3):
    """Dense block with one plus-shaped sparse hole per entry of `holes`;
    each hole hosts a small clique (a bad cell) flanked by one bridge
    point in its west and east ring cells."""
    rng = rng_for_seed(seed)
    sp = PLANT_SP
    carved = set()
    for (hx, hy) in holes:
        carved |= {(hx, hy), (hx - 1, hy), (hx + 1, hy), (hx, hy - 1), (hx, hy + 1)}
    pts = []
    for i in range(block_w):
        for j in range(block_h):
            if (i, j) in carved:
                continue
            base = np.array([i * sp, j * sp])
            pts.append(base + rng.random((occ, 2)) * sp * 0.98 + sp * 0.01)
    for (hx, hy) in holes:
        cx, cy = (hx + 0.5) * sp, (hy + 0.5) * sp
        clique = np.array([[cx - 0.004, cy - 0.003], [cx + 0.004, cy - 0.001],
                           [cx, cy + 0.004]])
        pts.append(clique[:clique_size])
        pts.append(np.array([[(hx - 0.5) * sp, cy]]))   # west bridge
        pts.append(np.array([[(hx + 1.5) * sp, cy]]))   # east bridge
    return np.concatenate(pts)
