"""Special functions: chi(d) CDF, spherical cap measure, sphere moments."""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np
from scipy.special import betainc, gammaln

SERIES_TOL = 1e-14
MAX_ITER = 500
_FPMIN = 1e-300


def _gamma_series(a, x):
    # P(a, x) by the power series; caller guarantees 0 < x < a + 1.
    # Terms keep shrinking once converged, so all elements iterate together.
    term = 1.0 / a
    total = term.copy()
    for n in range(1, MAX_ITER + 1):
        term *= x / (a + n)
        total += term
        if n % 4 == 0 and np.all(term <= total * SERIES_TOL):
            break
    return total * np.exp(-x + a * np.log(x) - gammaln(a))


def _gamma_contfrac(a, x):
    # Q(a, x) by the modified Lentz continued fraction; x >= a + 1
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / _FPMIN)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        d[np.abs(d) < _FPMIN] = _FPMIN
        c = b + an / c
        c[np.abs(c) < _FPMIN] = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if np.all(np.abs(delta - 1.0) <= SERIES_TOL):
            break
    return np.exp(-x + a * np.log(x) - gammaln(a)) * h


def reg_lower_gamma(a, x):
    """Regularized lower incomplete gamma P(a, x), elementwise.

    Series below ``x = a + 1``, continued fraction above. ``x = inf`` gives 1.
    """
    a_arr, x_arr = np.broadcast_arrays(np.asarray(a, dtype=float),
                                       np.asarray(x, dtype=float))
    if np.any(a_arr <= 0):
        raise ValueError("a must be positive")
    if np.any(x_arr < 0) or np.any(np.isnan(x_arr)):
        raise ValueError("x must be non-negative")
    out = np.zeros(a_arr.shape)
    out[np.isposinf(x_arr)] = 1.0
    finite = (x_arr > 0) & np.isfinite(x_arr)
    low = finite & (x_arr < a_arr + 1.0)
    high = finite & ~low
    if low.any():
        out[low] = _gamma_series(a_arr[low], x_arr[low])
    if high.any():
        out[high] = 1.0 - _gamma_contfrac(a_arr[high], x_arr[high])
    out = np.clip(out, 0.0, 1.0)
    return out if out.ndim else float(out)


def chi_cdf(r, d: int):
    """K_d(r) = P(d/2, r^2/2); accepts ``r = inf``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be non-negative")
    with np.errstate(over="ignore"):
        return reg_lower_gamma(d / 2.0, 0.5 * r * r)


def chi_pdf(r, d: int):
    r = np.asarray(r, dtype=float)
    log_norm = (d / 2.0 - 1.0) * math.log(2.0) + gammaln(d / 2.0)
    return r ** (d - 1) * np.exp(-0.5 * r * r - log_norm)


def cap_measure(theta: float, d: int) -> float:
    """Normalized surface measure of ``{u : u.v >= cos(theta)}`` on S^{d-1}."""
    if d < 2:
        raise ValueError("cap_measure needs d >= 2")
    if not 0.0 <= theta <= math.pi:
        raise ValueError("theta must lie in [0, pi]")
    if theta > math.pi / 2:
        return 1.0 - cap_measure(math.pi - theta, d)
    s2 = math.sin(theta) ** 2
    return 0.5 * float(betainc((d - 1) / 2.0, 0.5, s2))


def sphere_moment(alpha: Sequence[int], d: int | None = None) -> float:
    """E[prod u_i^alpha_i] for u uniform on S^{d-1}.

    From z = r u with r independent of u:
    E[u^alpha] = Gamma(d/2) prod Gamma((alpha_i+1)/2) / (pi^{d/2} Gamma((d+|alpha|)/2)).
    """
    alpha = [int(k) for k in alpha]
    if d is None:
        d = len(alpha)
    if len(alpha) != d:
        raise ValueError("multi-index length must equal d")
    if any(k < 0 for k in alpha):
        raise ValueError("exponents must be non-negative")
    if any(k % 2 for k in alpha):
        return 0.0
    deg = sum(alpha)
    log_m = (sum(math.lgamma((k + 1) / 2.0) for k in alpha)
             - 0.5 * d * math.log(math.pi)
             + math.lgamma(d / 2.0) - math.lgamma((d + deg) / 2.0))
    return math.exp(log_m)
