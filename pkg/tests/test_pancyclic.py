import numpy as np

from conftest import PLANT_ETA, PLANT_R, planted_instance
from rggham import BuilderConstants, build_pancyclic_family, sample_uniform_points
from rggham.geometry import rng_for_seed
from rggham.graph import build_edge_process, graph_at_radius
from rggham.hitting import min_degree_hit
from rggham.oracles import cycle_length_spectrum


def _assert_cycle(pts, cyc, rho, norm):
    assert len(set(cyc)) == len(cyc)
    pos = pts[np.asarray(cyc)]
    d = np.sqrt(((pos - np.roll(pos, -1, axis=0)) ** 2).sum(1))
    assert d.max() <= rho + 1e-12


def test_triangle_family(norm2, triangle_345):
    consts = BuilderConstants.desk(norm2)
    res = build_pancyclic_family(triangle_345, norm2, 0.5, consts)
    assert res.success
    assert sorted(res.family[3]) == [0, 1, 2]
    assert list(res.family) == [3]


def test_dense_family_all_lengths(norm2):
    pts = sample_uniform_points(5000, norm2, 91)
    consts = BuilderConstants.desk(norm2, K=35, eta=1 / 3)
    res = build_pancyclic_family(pts, norm2, 0.3, consts)
    assert res.success, res.failure
    fam = res.family
    assert len(fam) == 4998
    seen = set()
    for length, cyc in fam.iter_cycles():
        assert len(cyc) == length
        seen.add(length)
        if length % 500 == 0 or length <= 6:
            _assert_cycle(pts, cyc, 0.3, norm2)
    assert seen == set(range(3, 5001))
    # random access agrees with the incremental pass
    assert len(fam[1234]) == 1234
    _assert_cycle(pts, fam[1234], 0.3, norm2)


def test_family_with_escorts(norm2):
    pts = planted_instance(3)
    consts = BuilderConstants.desk(norm2, K=24, eta=PLANT_ETA, r2_budget=8)
    res = build_pancyclic_family(pts, norm2, PLANT_R, consts)
    assert res.success, res.failure
    n = len(pts)
    for length, cyc in res.family.iter_cycles():
        assert len(cyc) == length
        if length % 97 == 0 or length in (3, 4, 5, n, n - 1):
            _assert_cycle(pts, cyc, PLANT_R, norm2)


def test_small_instances_match_oracle(norm2):
    full = 0
    for t in range(30):
        rng = rng_for_seed(7000 + t)
        n = int(rng.integers(6, 15))
        pts = rng.random((n, 2))
        proc = build_edge_process(pts, norm2)
        rho = min_degree_hit(proc, 2).radius
        g = graph_at_radius(proc, rho)
        spec = cycle_length_spectrum(g)
        res = build_pancyclic_family(pts, norm2, rho, BuilderConstants.desk(norm2))
        want = set(range(3, n + 1))
        if res.success:
            full += 1
            assert spec == want
            for length in want:
                cyc = res.family[length]
                assert len(cyc) == length
                for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                    assert g.has_edge(a, b)
        else:
            missing = sorted(want - spec)
            assert missing and res.failure.witness == missing[0]
    assert full >= 10
