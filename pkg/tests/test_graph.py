import numpy as np
import pytest

from rggham import (build_edge_process, connected_components, graph_at_radius,
                    kth_nearest_distance, min_degree)
from rggham.errors import EmptyInputError
from rggham.geometry import rng_for_seed
from rggham.graph import graph_at_rank


def test_process_triangle(triangle_345, norm2):
    proc = build_edge_process(triangle_345, norm2)
    assert np.allclose(proc.lengths, [0.3, 0.4, 0.5])


def test_process_two_points(norm2):
    proc = build_edge_process(np.array([[0.1, 0.1], [0.4, 0.5]]), norm2)
    assert len(proc.lengths) == 1


def test_process_needs_two(norm2):
    with pytest.raises(EmptyInputError):
        build_edge_process(np.array([[0.5, 0.5]]), norm2)


def test_process_count_and_sorted(norm2):
    pts = rng_for_seed(11).random((100, 2))
    proc = build_edge_process(pts, norm2)
    assert len(proc.lengths) == 4950
    assert (np.diff(proc.lengths) >= 0).all()
    # lengths match recomputation
    i, j = proc.edges[1234]
    assert proc.lengths[1234] == pytest.approx(
        float(np.hypot(*(pts[i] - pts[j]))), abs=1e-15)


def test_graph_at_radius_edges(triangle_345, norm2):
    proc = build_edge_process(triangle_345, norm2)
    assert graph_at_radius(proc, 0.0).edge_count == 0
    g = graph_at_radius(proc, 0.4)
    assert g.edge_count == 2      # the 0.3 and 0.4 sides form a path
    assert min_degree(g) == 1
    assert connected_components(g).count == 1
    assert graph_at_radius(proc, 2.0).edge_count == 3


def test_graph_monotone_in_radius(norm2):
    pts = rng_for_seed(12).random((60, 2))
    proc = build_edge_process(pts, norm2)
    rng = rng_for_seed(13)
    for _ in range(100):
        r1, r2 = sorted(rng.uniform(0, 1.5, size=2))
        e1 = set(graph_at_radius(proc, r1).edges())
        e2 = set(graph_at_radius(proc, r2).edges())
        assert e1 <= e2


def test_components_and_degree_vs_naive(norm2):
    for seed in range(8):
        pts = rng_for_seed(100 + seed).random((30, 2))
        proc = build_edge_process(pts, norm2)
        g = graph_at_radius(proc, 0.25)
        nbrs = g.neighbor_sets()
        assert min_degree(g) == min(len(s) for s in nbrs)
        lab = connected_components(g)
        # naive reachability agreement
        for i in range(g.n):
            seen = {i}
            stack = [i]
            while stack:
                v = stack.pop()
                for w in nbrs[v]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            assert {j for j in range(g.n) if lab.labels[j] == lab.labels[i]} == seen
        assert sorted(set(lab.labels)) == list(range(lab.count))


def test_empty_and_complete_extremes(norm2):
    pts = rng_for_seed(14).random((12, 2))
    proc = build_edge_process(pts, norm2)
    empty = graph_at_radius(proc, 0.0)
    assert min_degree(empty) == 0
    assert connected_components(empty).count == 12
    comp = graph_at_radius(proc, 2.0)
    assert min_degree(comp) == 11
    assert connected_components(comp).count == 1


def test_kth_nearest_triangle(triangle_345, norm2):
    proc = build_edge_process(triangle_345, norm2)
    # vertex 0 has sides 0.3 (to 1) and 0.5 (to 2)
    assert kth_nearest_distance(proc, 0, 1) == pytest.approx(0.3)
    assert kth_nearest_distance(proc, 0, 2) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        kth_nearest_distance(proc, 0, 3)


def test_kth_nearest_equals_degree_evolution(norm2):
    pts = rng_for_seed(15).random((25, 2))
    proc = build_edge_process(pts, norm2)
    for i in range(25):
        for k in (1, 2, 3, 24):
            d = kth_nearest_distance(proc, i, k)
            assert len(graph_at_radius(proc, d).adjacency[i]) >= k
            assert len(graph_at_radius(proc, d * (1 - 1e-9)).adjacency[i]) < k


def test_graph_at_rank(norm2):
    pts = rng_for_seed(16).random((10, 2))
    proc = build_edge_process(pts, norm2)
    for m in (0, 1, 10, 45):
        assert graph_at_rank(proc, m).edge_count == m


def test_unmaterialized_process_grid_route(norm2):
    pts = rng_for_seed(17).random((120, 2))
    full = build_edge_process(pts, norm2)
    lazy = build_edge_process(pts, norm2, materialize_threshold=50)
    assert not lazy.materialized
    with pytest.raises(Exception):
        lazy.require_materialized()
    for radius in (0.1, 0.3):
        a = graph_at_radius(full, radius)
        b = graph_at_radius(lazy, radius)
        assert all(np.array_equal(x, y) for x, y in zip(a.adjacency, b.adjacency))


def test_coincident_points_lead_the_process(norm2):
    pts = np.array([[0.5, 0.5], [0.5, 0.5], [0.2, 0.9]])
    proc = build_edge_process(pts, norm2)
    assert proc.lengths[0] == 0.0
    assert tuple(proc.edges[0]) == (0, 1)
    g = graph_at_radius(proc, 0.0)
    assert g.edge_count == 1   # the zero-length edge is present at radius 0


def test_large_n_min_degree_route(norm2):
    from rggham.hitting import min_degree_hit, min_degree_radius_large

    pts = rng_for_seed(18).random((400, 2))
    proc = build_edge_process(pts, norm2)
    for k in (1, 2, 3):
        exact = min_degree_hit(proc, k).radius
        assert min_degree_radius_large(pts, norm2, k) == pytest.approx(exact, abs=1e-14)
