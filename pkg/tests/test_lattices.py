import itertools
import math

import numpy as np
import pytest

from sphmc.lattices import (KISSING_SETS, IntegrityError, ParameterError, PointSet, PointSetFormatError,
                            antipodal_order, build_pointset, cap_decomposition_count,
                            expected_cardinality, golay_code, leech_monomial_sample, load_pointset,
                            min_distance, positive_half, reed_muller_1_4, save_pointset,
                            variance_upper_bound, verify_t_design)
from sphmc.randsrc import RandomStream
from sphmc.specfun import sphere_moment


def brute_min_distance(v):
    diff = v[:, None, :] - v[None, :, :]
    dist = np.sqrt((diff ** 2).sum(-1))
    dist[np.diag_indices(len(v))] = np.inf
    return dist.min()


@pytest.mark.parametrize("d", range(2, 9))
def test_kissing_sets(d):
    family, card, _ = KISSING_SETS[d]
    ps = build_pointset(family, d)
    assert len(ps) == card
    assert ps.dim == d
    assert ps.centrally_symmetric
    assert abs(ps.d_min - 1.0) <= 1e-12
    assert abs(brute_min_distance(ps.vectors) - 1.0) <= 1e-12
    assert np.max(np.abs(np.linalg.norm(ps.vectors, axis=1) - 1)) <= 1e-12
    # no duplicates
    assert len(np.unique(np.round(ps.vectors, 9), axis=0)) == card


@pytest.mark.parametrize("family,d", [("zd", 1), ("zd", 5), ("ad", 4), ("ad", 16),
                                      ("dd", 3), ("dd", 16), ("zd", 16)])
def test_classical_families(family, d):
    ps = build_pointset(family, d)
    assert len(ps) == expected_cardinality(family, d)
    assert ps.centrally_symmetric
    target = {"zd": math.sqrt(2) if d > 1 else 2.0}.get(family, 1.0)
    assert abs(ps.d_min - target) <= 1e-12
    assert abs(brute_min_distance(ps.vectors) - target) <= 1e-12


def test_a2_is_the_hexagon():
    ps = build_pointset("ad", 2)
    angles = np.sort(np.mod(np.degrees(np.arctan2(ps.vectors[:, 1], ps.vectors[:, 0])), 360))
    gaps = np.diff(np.append(angles, angles[0] + 360))
    np.testing.assert_allclose(gaps, 60.0, atol=1e-9)
    # a rotation maps it to {(+-sqrt3/2, +-1/2), (0, +-1)}
    ref = np.array([[s * math.sqrt(3) / 2, t * 0.5] for s in (1, -1) for t in (1, -1)] + [[0, 1], [0, -1]])
    rot = np.array([[ps.vectors[0, 1], -ps.vectors[0, 0]], [ps.vectors[0, 0], ps.vectors[0, 1]]])
    mapped = ps.vectors @ rot.T
    ang_ref = np.sort(np.mod(np.degrees(np.arctan2(ref[:, 1], ref[:, 0])), 360))
    ang_map = np.sort(np.mod(np.degrees(np.arctan2(mapped[:, 1], mapped[:, 0])), 360))
    np.testing.assert_allclose(ang_map, ang_ref, atol=1e-9)


def test_zd_vectors():
    ps = build_pointset("zd", 4)
    expected = np.concatenate([np.eye(4), -np.eye(4)])
    assert sorted(map(tuple, ps.vectors)) == sorted(map(tuple, expected))


def test_dimension_errors():
    with pytest.raises(ParameterError):
        build_pointset("e8", 7)
    with pytest.raises(ParameterError):
        build_pointset("ad", 1)
    with pytest.raises(ParameterError):
        build_pointset("dd")
    with pytest.raises(ParameterError):
        build_pointset("dd", 2)  # D_2 degenerates to a rotated Z_2
    with pytest.raises(ParameterError):
        build_pointset("nope", 3)


def test_bw16():
    ps = build_pointset("bw16")
    assert len(ps) == 4320 and ps.dim == 16
    assert ps.centrally_symmetric
    assert abs(ps.d_min - 1.0) <= 1e-12


def test_codes():
    rm = reed_muller_1_4()
    assert rm.shape == (32, 16)
    assert sorted(set(rm.sum(1).tolist())) == [0, 8, 16]
    g = golay_code()
    assert g.shape == (4096, 24)
    weights = np.bincount(g.sum(1))
    assert {w: c for w, c in enumerate(weights) if c} == {0: 1, 8: 759, 12: 2576, 16: 759, 24: 1}


def test_min_distance_small_sets():
    assert abs(min_distance(build_pointset("zd", 2)) - math.sqrt(2)) <= 1e-15
    assert abs(min_distance(build_pointset("ad", 2)) - 1.0) <= 1e-12
    with pytest.raises(ParameterError):
        min_distance(PointSet(np.array([[1.0, 0.0]])))


def test_min_distance_non_symmetric():
    rng = np.random.default_rng(4)
    v = rng.standard_normal((50, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    ps = PointSet(v)
    assert not ps.centrally_symmetric
    assert abs(min_distance(ps) - brute_min_distance(v)) < 1e-15


def test_rotation_preserves_d_min():
    ps = build_pointset("e8")
    t = RandomStream(31).haar(8)
    assert abs(ps.rotated(t).d_min - ps.d_min) <= 1e-10


def test_positive_half():
    z3 = positive_half(build_pointset("zd", 3))
    assert sorted(map(tuple, z3.vectors)) == sorted(map(tuple, np.eye(3)))
    assert len(positive_half(build_pointset("ad", 2))) == 3
    e8 = build_pointset("e8")
    half = positive_half(e8)
    assert len(half) == 120
    both = np.concatenate([half.vectors, -half.vectors])
    assert len(np.unique(np.round(both, 9), axis=0)) == 240
    with pytest.raises(ParameterError):
        positive_half(PointSet(np.array([[1.0, 0.0], [0.0, 1.0]])))


def test_antipodal_order_pairs():
    ps = build_pointset("e7")
    order = antipodal_order(ps)
    v = ps.vectors[order]
    half = len(ps) // 2
    np.testing.assert_allclose(v[:half], -v[half:], atol=1e-15)
    assert sorted(order.tolist()) == list(range(len(ps)))


@pytest.mark.parametrize("d", range(2, 9))
def test_t_design_at_tabulated_strength(d):
    family, _, t = KISSING_SETS[d]
    ps = build_pointset(family, d)
    assert verify_t_design(ps, t) <= 1e-10


@pytest.mark.parametrize("d", [2, 8])
def test_t_design_sharp(d):
    family, _, t = KISSING_SETS[d]
    assert verify_t_design(build_pointset(family, d), t + 1) > 1e-6


def test_zd_design_strength():
    ps = build_pointset("zd", 4)
    assert verify_t_design(ps, 3) <= 1e-10
    dev = verify_t_design(ps, 4)
    assert abs(dev - (1 / 4 - 3 / 24)) < 1e-12


def test_t_design_matches_explicit_monomials():
    ps = build_pointset("dd", 4)
    monos = [a for a in itertools.product(range(6), repeat=4) if sum(a) <= 5]
    assert verify_t_design(ps, 5, monomials=monos) <= 1e-10
    brute = max(abs(np.prod(ps.vectors ** np.array(a), axis=1).mean() - sphere_moment(a))
                for a in monos)
    assert abs(verify_t_design(ps, 5) - brute) < 1e-14
    with pytest.raises(ParameterError):
        verify_t_design(ps, 0)


def test_variance_upper_bound_examples():
    assert abs(variance_upper_bound(0.001, 1, 240) - (0.001 / 240 - 1e-6)) < 1e-18
    assert abs(variance_upper_bound(0.001, 1, 240) - 3.1667e-6) < 1e-9
    assert abs(variance_upper_bound(0.3, 24, 24) - (0.3 - 0.09)) < 1e-15
    assert variance_upper_bound(0.5, 2, 4) == 0.0
    with pytest.raises(ParameterError):
        variance_upper_bound(0.5, 0, 4)


def test_cap_decomposition_count():
    # a cap narrower than half the piece diameter is a single piece
    assert cap_decomposition_count(math.pi / 12, 8, 1.0) == 1
    n = [cap_decomposition_count(th, 3, 1.0) for th in (0.3, 0.6, 0.9, 1.2)]
    assert n == sorted(n) and n[-1] > n[0]
    # the count bounds the number of points of any rotated V in the cap:
    # each piece holds at most one point
    ps = build_pointset("ad", 3)
    theta = math.pi / 3
    big = cap_decomposition_count(theta, 3, ps.d_min)
    t = RandomStream(32).haar(3, 2000)
    hits = ((t @ ps.vectors.T)[:, 0, :] >= math.cos(theta)).sum(1)
    assert hits.max() <= big


def test_save_load_round_trip(tmp_path):
    for family, d in (("ad", 2), ("e8", None)):
        ps = build_pointset(family, d)
        path = tmp_path / f"{family}.pts"
        save_pointset(ps, path)
        back = load_pointset(path)
        assert np.max(np.abs(back.vectors - ps.vectors)) <= 1e-15
        lines = path.read_text().splitlines()
        assert lines[0] == f"{ps.dim} {len(ps)}" and len(lines) == len(ps) + 1


@pytest.mark.parametrize("text,match", [
    ("2 2\n0 0\n1 0\n", "norm"),
    ("3 2\n1 0\n0 1\n", "coordinates"),
    ("2 3\n1 0\n0 1\n", "rows"),
    ("", "empty"),
    ("2\n1 0\n", "header"),
    ("2 1\n1 x\n", "non-numeric"),
])
def test_load_rejects_malformed(tmp_path, text, match):
    path = tmp_path / "bad.pts"
    path.write_text(text)
    with pytest.raises(PointSetFormatError, match=match):
        load_pointset(path)


def test_load_renormalizes_near_unit(tmp_path):
    path = tmp_path / "near.pts"
    path.write_text("2 2\n1.0000000001 0\n0 -0.9999999999\n")
    ps = load_pointset(path)
    np.testing.assert_allclose(np.linalg.norm(ps.vectors, axis=1), 1.0, atol=1e-15)
    path.write_text("2 1\n1.001 0\n")
    with pytest.raises(PointSetFormatError):
        load_pointset(path)


def test_non_unit_vectors_rejected():
    with pytest.raises(IntegrityError):
        PointSet(np.array([[1.0, 1.0]]))


@pytest.mark.slow
def test_leech():
    ps = build_pointset("leech")
    assert len(ps) == 196560 and ps.dim == 24
    assert ps.centrally_symmetric
    assert abs(ps.d_min - 1.0) <= 1e-12
    monos = leech_monomial_sample(11)
    assert verify_t_design(ps, 11, monomials=monos) <= 1e-10
    # degree-12 sharpness on a single coordinate: far outside the pass tolerance
    assert verify_t_design(ps, 12, monomials=[(12,) + (0,) * 23]) > 1e-8
