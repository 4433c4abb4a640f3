import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from sphmc.randsrc import RandomStream
from sphmc.specfun import cap_measure, chi_cdf, chi_pdf, reg_lower_gamma, sphere_moment


def test_reg_lower_gamma_examples():
    assert abs(reg_lower_gamma(1, 1) - (1 - math.exp(-1))) < 1e-12
    assert abs(reg_lower_gamma(1, 1) - 0.6321205588) < 1e-10
    assert reg_lower_gamma(2.5, 0) == 0.0
    assert abs(reg_lower_gamma(0.5, 2) - math.erf(math.sqrt(2))) < 1e-12
    assert abs(reg_lower_gamma(0.5, 2) - 0.9544997361) < 1e-10
    assert reg_lower_gamma(3, math.inf) == 1.0


def test_reg_lower_gamma_domain():
    with pytest.raises(ValueError):
        reg_lower_gamma(0, 1)
    with pytest.raises(ValueError):
        reg_lower_gamma(1, -1)


@given(st.floats(0.5, 30), st.floats(0, 200))
def test_reg_lower_gamma_matches_scipy(a, x):
    assert abs(reg_lower_gamma(a, x) - special.gammainc(a, x)) <= 1e-12


def test_reg_lower_gamma_vectorized_over_both_branches():
    a = np.array([0.5, 1, 4, 12, 12])
    x = np.array([0.1, 5.0, 4.9, 13.1, 40.0])
    np.testing.assert_allclose(reg_lower_gamma(a, x), special.gammainc(a, x), rtol=0, atol=1e-13)


def test_chi_cdf_examples():
    r = np.arange(1, 51) / 10
    np.testing.assert_allclose(chi_cdf(r, 2), 1 - np.exp(-r ** 2 / 2), rtol=0, atol=1e-12)
    assert chi_cdf(0.0, 5) == 0.0
    assert chi_cdf(math.inf, 5) == 1.0
    assert abs(chi_cdf(1.0, 3) - 0.19875) < 5e-6
    with pytest.raises(ValueError):
        chi_cdf(-1.0, 2)


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5, 6, 7, 8, 16, 24])
def test_chi_cdf_matches_trapezoid(d):
    for r in (0.5, 1.0, 2.0, 3.5, 6.0):
        grid = np.linspace(0, r, 1_000_001)
        pdf = chi_pdf(grid, d) if d > 1 else math.sqrt(2 / math.pi) * np.exp(-grid ** 2 / 2)
        assert abs(integrate.trapezoid(pdf, grid) - chi_cdf(r, d)) < 1e-8


@given(st.integers(1, 24), st.floats(0, 10), st.floats(0, 10))
def test_chi_cdf_monotone(d, r1, r2):
    lo, hi = sorted((r1, r2))
    assert chi_cdf(lo, d) <= chi_cdf(hi, d) + 1e-15


def test_cap_measure_examples():
    for d in (2, 3, 5, 8):
        assert abs(cap_measure(math.pi / 2, d) - 0.5) < 1e-15
        assert cap_measure(math.pi, d) == 1.0
        assert cap_measure(0.0, d) == 0.0
    assert abs(cap_measure(math.pi / 3, 3) - 0.25) < 1e-14
    assert abs(cap_measure(math.pi / 12, 2) - 1 / 12) < 1e-14
    with pytest.raises(ValueError):
        cap_measure(1.0, 1)
    with pytest.raises(ValueError):
        cap_measure(4.0, 3)


@given(st.integers(2, 24), st.floats(0, math.pi), st.floats(0, math.pi))
def test_cap_measure_monotone_and_complementary(d, a, b):
    lo, hi = sorted((a, b))
    assert cap_measure(lo, d) <= cap_measure(hi, d) + 1e-15
    assert abs(cap_measure(a, d) + cap_measure(math.pi - a, d) - 1) <= 1e-12


def test_cap_measure_against_sampling():
    u = RandomStream(21).sphere(6, 400_000)
    emp = np.mean(u[:, 0] >= math.cos(0.7))
    p = cap_measure(0.7, 6)
    assert abs(emp - p) < 4 * math.sqrt(p * (1 - p) / u.shape[0])


def test_sphere_moment_examples():
    assert sphere_moment((1, 0, 0)) == 0.0
    for d in (2, 3, 7, 24):
        assert abs(sphere_moment((2,) + (0,) * (d - 1)) - 1 / d) < 1e-15
    assert abs(sphere_moment((4, 0, 0, 0)) - 3 / 24) < 1e-15
    assert abs(sphere_moment((2, 2, 0, 0)) - 1 / 24) < 1e-15


def test_sphere_moment_2200_by_monte_carlo():
    # independent oracle for E[u1^2 u2^2] on S^3; separates 1/24 from 1/48 by ~300 SE
    u = RandomStream(22).sphere(4, 2_000_000)
    vals = u[:, 0] ** 2 * u[:, 1] ** 2
    se = vals.std() / math.sqrt(vals.size)
    assert abs(vals.mean() - 1 / 24) < 4 * se
    assert abs(vals.mean() - 1 / 48) > 100 * se


@given(st.integers(2, 24))
def test_sphere_moment_normalization(d):
    total = sum(sphere_moment(tuple(2 if j == i else 0 for j in range(d))) for i in range(d))
    assert abs(total - 1.0) < 1e-13


def test_sphere_moment_high_degree_is_finite():
    alpha = (4, 4, 2, 1) + (0,) * 20
    assert sphere_moment(alpha) == 0.0
    alpha = (4, 4, 2) + (0,) * 21
    assert 0 < sphere_moment(alpha) < 1


def test_sphere_moment_errors():
    with pytest.raises(ValueError):
        sphere_moment((2, 0), 3)
    with pytest.raises(ValueError):
        sphere_moment((-2, 0))
