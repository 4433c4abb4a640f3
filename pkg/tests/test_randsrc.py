import numpy as np
import pytest
from scipy import stats

from sphmc.randsrc import (GENERATOR_NAME, RandomStream, sample_chi, sample_haar_orthogonal,
                           sample_normal, sample_sphere, stable_key)
from sphmc.specfun import chi_cdf


def test_replay_is_identical():
    a = RandomStream(1, 0)
    b = RandomStream(1, 0)
    assert [sample_normal(a) for _ in range(5)] == [sample_normal(b) for _ in range(5)]
    np.testing.assert_array_equal(RandomStream(1, (2, 3)).haar(4, 3), RandomStream(1, (2, 3)).haar(4, 3))


def test_distinct_streams_differ():
    x = RandomStream(1, 0).normal(1000)
    y = RandomStream(1, 1).normal(1000)
    z = RandomStream(2, 0).normal(1000)
    assert not np.array_equal(x, y) and not np.array_equal(x, z)
    assert abs(np.corrcoef(x, y)[0, 1]) < 0.15


def test_substream_matches_extended_id():
    s = RandomStream(9, (4,))
    np.testing.assert_array_equal(s.substream(7).normal(10), RandomStream(9, (4, 7)).normal(10))
    assert s.metadata == {"generator": GENERATOR_NAME, "seed": 9, "stream_id": [4]}


def test_stable_key_is_fixed():
    # frozen so that cell streams never change silently between versions
    assert stable_key("d=2|cov=identity|region=R1") == stable_key("d=2|cov=identity|region=R1")
    assert stable_key("abc") == int.from_bytes(
        bytes.fromhex("ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad")[:8], "little")


def test_normal_moments():
    z = RandomStream(11).normal(1_000_000)
    assert abs(z.mean()) < 0.004
    assert abs(z.var() - 1.0) < 0.006


def test_chi_moments():
    s = RandomStream(12)
    r2 = s.chi(2, 1_000_000)
    assert abs(r2.mean() - np.sqrt(np.pi / 2)) < 0.003
    assert abs(np.mean(r2 <= 1.0) - (1 - np.exp(-0.5))) < 0.002
    r5 = s.chi(5, 1_000_000)
    assert abs(np.mean(r5 ** 2) - 5) < 0.02
    assert sample_chi(s, 3) >= 0
    with pytest.raises(ValueError):
        s.chi(0)


@pytest.mark.parametrize("d", [1, 3, 8])
def test_chi_matches_cdf_within_dkw_band(d):
    n = 1_000_000
    r = np.sort(RandomStream(13, d).chi(d, n))
    ecdf = np.arange(1, n + 1) / n
    gap = np.max(np.abs(ecdf - chi_cdf(r, d)))
    # DKW: P(sup gap > eps) <= 2 exp(-2 n eps^2); eps for alpha = 1e-6
    assert gap < np.sqrt(np.log(2 / 1e-6) / (2 * n))


def test_sphere_vectors():
    s = RandomStream(14)
    u = s.sphere(4, 1_000_000)
    assert np.max(np.abs(np.linalg.norm(u, axis=1) - 1)) <= 1e-14
    assert abs(u[:, 0].mean()) < 0.004
    assert abs(np.mean(u[:, 0] ** 2) - 0.25) < 0.002
    assert sample_sphere(s, 3).shape == (3,)


def test_haar_orthogonal_and_uniform():
    s = RandomStream(15)
    t = s.haar(3, 100_000)
    assert np.abs(np.einsum("bji,bjk->bik", t, t) - np.eye(3)).max() <= 1e-10
    first = t[:, :, 0]  # T e1
    assert abs(np.mean(first[:, 0] ** 2) - 1 / 3) < 0.005
    big = s.haar(3, 1_000_000)[:, 0, 0]
    assert abs(np.mean(big > 0.9) - 0.05) < 0.001
    assert sample_haar_orthogonal(s, 5).shape == (5, 5)


def test_rotated_point_matches_uniform_sphere():
    # KS of (T v1) . e1 against the first coordinate of a uniform sphere vector
    s = RandomStream(16)
    v = np.array([0.6, 0.8, 0.0, 0.0])
    x = (s.haar(4, 100_000) @ v)[:, 0]
    y = s.sphere(4, 100_000)[:, 0]
    assert stats.ks_2samp(x, y).pvalue > 1e-4


def test_haar_resamples_degenerate_draws():
    s = RandomStream(17)
    real = s.rng

    class FirstDrawDegenerate:
        calls = 0

        def standard_normal(self, size=None):
            FirstDrawDegenerate.calls += 1
            if FirstDrawDegenerate.calls == 1:
                return np.zeros(size)
            return real.standard_normal(size)

    s.rng = FirstDrawDegenerate()
    t = s.haar(3, 4)
    assert FirstDrawDegenerate.calls >= 2
    assert np.abs(np.einsum("bji,bjk->bik", t, t) - np.eye(3)).max() <= 1e-12
