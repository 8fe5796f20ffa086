import math

import numpy as np
import pytest

from conftest import random_graph
from rggham import _kernels as kernels
from rggham._kernels import pure
from rggham.geometry import rng_for_seed

try:
    from rggham._kernels import _native
except ImportError:
    _native = None

needs_native = pytest.mark.skipif(_native is None, reason="compiled kernels not built")


def test_backend_reported():
    assert kernels.backend_name() in ("native", "pure")


@needs_native
def test_ham_dp_parity():
    for seed in range(40):
        _, g = random_graph(8100 + seed, n_hi=12)
        masks = g.bitmasks()
        assert np.array_equal(_native.ham_path_dp(masks, g.n),
                              pure.ham_path_dp(masks, g.n))


@needs_native
def test_cycle_mask_parity():
    for seed in range(40):
        _, g = random_graph(8200 + seed, n_hi=11)
        masks = g.bitmasks()
        assert _native.cycle_length_mask(masks, g.n) == pure.cycle_length_mask(masks, g.n)


@pytest.mark.parametrize("p", [2.0, math.inf, 3.0])
def test_knn_vs_brute(p):
    rng = rng_for_seed(83)
    for _ in range(8):
        n = int(rng.integers(6, 300))
        pts = rng.random((n, 2))
        k = int(rng.integers(1, min(4, n - 1) + 1))
        diff = np.abs(pts[:, None, :] - pts[None, :, :])
        if math.isinf(p):
            d = diff.max(axis=2)
        else:
            d = (diff ** p).sum(axis=2) ** (1 / p)
        np.fill_diagonal(d, np.inf)
        brute = np.sort(d, axis=1)[:, k - 1]
        out = kernels.kth_nearest_all(pts, k, p)
        assert np.allclose(out, brute, atol=1e-12)
        assert np.allclose(pure.kth_nearest_all(pts, k, p, (3.0 / n) ** 0.5), brute, atol=1e-12)


@needs_native
def test_knn_parity_native(norm2):
    rng = rng_for_seed(84)
    pts = rng.random((5000, 2))
    a = _native.kth_nearest_all(pts, 2, 2.0, (3.0 / 5000) ** 0.5)
    b = pure.kth_nearest_all(pts, 2, 2.0, (3.0 / 5000) ** 0.5)
    assert np.allclose(a, b, atol=0)


def test_knn_errors():
    pts = rng_for_seed(85).random((10, 2))
    with pytest.raises(ValueError):
        kernels.kth_nearest_all(pts, 10, 2.0)


def test_witness_reconstruction():
    for seed in range(30):
        _, g = random_graph(8300 + seed)
        masks = g.bitmasks()
        dp = kernels.ham_path_dp(masks, g.n)
        cyc = kernels.hamilton_cycle_from_dp(dp, masks, g.n)
        if cyc is not None:
            assert sorted(cyc) == list(range(g.n))
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                assert g.has_edge(a, b)
