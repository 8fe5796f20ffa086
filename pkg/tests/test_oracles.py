import numpy as np
import pytest

from conftest import random_graph
from rggham import (GeometricGraph, is_hamiltonian_exact,
                    two_disjoint_paths, vertex_connectivity_at_least)
from rggham.errors import CapacityError, InfeasibleError
from rggham.graph import build_edge_process, graph_at_rank
from rggham.oracles import (brute_vertex_connectivity_at_least, cycle_length_spectrum,
                            cycle_lengths_by_enumeration, find_cycle_of_length,
                            hamiltonian_by_enumeration, has_cycle_of_length,
                            is_biconnected, validate_path_pair)


def graph_from_edges(n, edges):
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    return GeometricGraph(n, 1.0, [np.array(sorted(x)) for x in adj])


TRIANGLE = graph_from_edges(3, [(0, 1), (1, 2), (0, 2)])
STAR4 = graph_from_edges(4, [(0, 1), (0, 2), (0, 3)])
CYCLE4 = graph_from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
PATH3 = graph_from_edges(3, [(0, 1), (1, 2)])
K5 = graph_from_edges(5, [(i, j) for i in range(5) for j in range(i + 1, 5)])


def test_hamiltonian_triangle():
    flag, cycle = is_hamiltonian_exact(TRIANGLE)
    assert flag and len(cycle) == 3


def test_hamiltonian_star_false():
    flag, cycle = is_hamiltonian_exact(STAR4)
    assert not flag and cycle is None


def test_hamiltonian_capacity():
    with pytest.raises(CapacityError):
        is_hamiltonian_exact(graph_from_edges(2, [(0, 1)]))


def test_hamiltonian_vs_enumeration_sweep():
    for seed in range(60):
        _, g = random_graph(1000 + seed)
        flag, cycle = is_hamiltonian_exact(g)
        assert flag == hamiltonian_by_enumeration(g)
        if flag:
            assert sorted(cycle) == list(range(g.n))


def test_cycle_lengths_complete():
    assert cycle_length_spectrum(K5) == {3, 4, 5}
    assert has_cycle_of_length(K5, 3) and has_cycle_of_length(K5, 5)


def test_cycle_lengths_four_cycle():
    assert not has_cycle_of_length(CYCLE4, 3)
    assert has_cycle_of_length(CYCLE4, 4)
    with pytest.raises(CapacityError):
        has_cycle_of_length(CYCLE4, 5)


def test_cycle_spectrum_vs_enumeration():
    for seed in range(50):
        _, g = random_graph(2000 + seed, n_hi=9)
        assert cycle_length_spectrum(g) == cycle_lengths_by_enumeration(g)


def test_find_cycle_witnesses():
    for seed in range(25):
        _, g = random_graph(3000 + seed, n_hi=10)
        for length in cycle_length_spectrum(g):
            cyc = find_cycle_of_length(g, length)
            assert cyc is not None and len(cyc) == length
        missing = set(range(3, g.n + 1)) - cycle_length_spectrum(g)
        for length in missing:
            assert find_cycle_of_length(g, length) is None


def test_connectivity_examples():
    assert vertex_connectivity_at_least(CYCLE4, 2)
    assert not vertex_connectivity_at_least(PATH3, 2)
    assert vertex_connectivity_at_least(K5, 4)
    with pytest.raises(ValueError):
        vertex_connectivity_at_least(PATH3, 3)


def test_connectivity_vs_brute_sweep():
    for seed in range(60):
        _, g = random_graph(4000 + seed, n_hi=9)
        for k in (1, 2, 3):
            if g.n > k:
                assert vertex_connectivity_at_least(g, k) == \
                    brute_vertex_connectivity_at_least(g, k), (seed, k)


def test_two_connectivity_monotone_along_process(norm2):
    from rggham.geometry import rng_for_seed

    pts = rng_for_seed(55).random((12, 2))
    proc = build_edge_process(pts, norm2)
    states = [vertex_connectivity_at_least(graph_at_rank(proc, m), 2)
              for m in range(len(proc.lengths) + 1)]
    first = states.index(True)
    assert all(states[first:])


def test_biconnected_matches_flow():
    for seed in range(40):
        _, g = random_graph(5000 + seed, n_hi=10)
        if g.n > 2:
            assert is_biconnected(g) == vertex_connectivity_at_least(g, 2)


def test_two_disjoint_paths_four_cycle():
    pair = two_disjoint_paths(CYCLE4, {0}, {2}, mode="share-one-endpoint")
    assert sorted([tuple(pair.first), tuple(pair.second)]) == [(0, 1, 2), (0, 3, 2)]
    assert not validate_path_pair(CYCLE4, pair, {0}, {2}, "share-one-endpoint")


def test_two_disjoint_paths_complete():
    pair = two_disjoint_paths(K5, {0, 1}, {3, 4})
    assert len(pair.first) == 2 and len(pair.second) == 2
    assert not validate_path_pair(K5, pair, {0, 1}, {3, 4})


def test_two_disjoint_paths_infeasible():
    with pytest.raises(InfeasibleError):
        two_disjoint_paths(PATH3, {0}, {2}, mode="share-one-endpoint")


def test_two_disjoint_paths_minimize_total_length():
    # 6-cycle with a 0-2 chord: the chord shortens one route to 2 edges
    g = graph_from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 2)])
    pair = two_disjoint_paths(g, {0}, {3}, mode="share-one-endpoint")
    total = (len(pair.first) - 1) + (len(pair.second) - 1)
    assert total == 5
    assert sorted([tuple(pair.first), tuple(pair.second)]) == [(0, 2, 3), (0, 5, 4, 3)]


def test_two_disjoint_paths_random_2connected(norm2):
    found = 0
    for seed in range(200):
        pts, g = random_graph(6000 + seed, n_lo=6, n_hi=12, r_lo=0.45, r_hi=0.9)
        if not vertex_connectivity_at_least(g, 2):
            continue
        found += 1
        A, B = {0, 1}, {g.n - 1}
        if A & B:
            continue
        mode = "share-one-endpoint"
        pair = two_disjoint_paths(g, A, B, mode=mode)
        assert not validate_path_pair(g, pair, A, B, mode), (seed, pair)
    assert found >= 50
