"""Monte Carlo estimators of P{X in A} for X ~ N_d(mu, Sigma).

Five estimators share one calling convention::

    estimate(problem, M, stream)                 # crude, crude_at
    estimate(problem, V, M, stream)              # spherical, spherical_at, spherical_star

Replicates are generated in fixed-size blocks; block ``k`` draws from
``stream.substream(k)``. The block size depends only on the estimator's
memory footprint (d and |V|), never on M or on the number of workers, so
results are identical for serial and parallel execution.

Within a block the draw order is fixed so that estimators can be paired on
one stream: crude and crude_at both start with the Gaussian vectors; the
spherical family starts with the rotations, followed (for the radius-based
estimators) by radii laid out point-major with V+ first.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .lattices import PointSet, antipodal_order
from .linalg import CovarianceModel, ParameterError, build_covariance, cholesky
from .randsrc import RandomStream
from .regions import IndicatorRegion, Region, UnsupportedRegionError, radial_probabilities

KINDS = ("crude", "crude_at", "spherical", "spherical_at", "spherical_star")
CLI_NAMES = {"crude": "crude", "crude-at": "crude_at", "sph": "spherical",
             "sph-at": "spherical_at", "sph-star": "spherical_star"}
SPHERICAL_KINDS = ("spherical", "spherical_at", "spherical_star")

# floats per block for the largest intermediate array
BLOCK_BUDGET = 1_500_000


def canonical_kind(name: str) -> str:
    name = name.strip()
    if name in KINDS:
        return name
    if name in CLI_NAMES:
        return CLI_NAMES[name]
    raise ParameterError(f"unknown estimator {name!r}")


@dataclass(frozen=True, eq=False)
class Problem:
    mu: np.ndarray
    sigma: np.ndarray
    region: Region
    gamma: np.ndarray = None

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).reshape(-1)
        sigma = np.asarray(self.sigma, dtype=float)
        if sigma.shape != (mu.size, mu.size) or self.region.dim != mu.size:
            raise ParameterError("mu, sigma and region dimensions disagree")
        gamma = cholesky(sigma) if self.gamma is None else np.asarray(self.gamma, dtype=float)
        if np.max(np.abs(gamma @ gamma.T - sigma)) > 1e-12 * np.max(np.abs(sigma)):
            raise ParameterError("gamma is not a Cholesky factor of sigma")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "gamma", gamma)

    @property
    def dim(self) -> int:
        return self.mu.size

    @classmethod
    def standard(cls, region: Region, model: CovarianceModel | None = None, mu=None):
        d = region.dim
        sigma = build_covariance(model or CovarianceModel(), d)
        return cls(np.zeros(d) if mu is None else mu, sigma, region)


@dataclass(eq=False)
class EstimateResult:
    kind: str
    estimate: float
    sample_variance: float
    replicates: int
    cost_per_replicate: int
    cost_counts_chi_cdf: bool = True
    seed: dict = field(default_factory=dict)
    wall_time: float = 0.0
    values: np.ndarray = field(default=None, repr=False)
    point_set: str | None = None

    @property
    def std_error(self) -> float:
        return float(np.sqrt(self.sample_variance / self.replicates))

    @property
    def zero_variance(self) -> bool:
        return self.sample_variance == 0.0

    def variance_std_error(self) -> float:
        """Delta-method standard error of ``sample_variance``."""
        return variance_std_error(self.values)


def variance_std_error(values) -> float:
    x = np.asarray(values, dtype=float)
    m = x.size
    c = x - x.mean()
    m2 = np.mean(c ** 2)
    m4 = np.mean(c ** 4)
    return float(np.sqrt(max(m4 - m2 ** 2, 0.0) / m))


def replicate_cost(kind: str, d: int, card_v: int | None = None) -> int:
    """Random numbers per replicate, with the rotation counted at (d+2)(d-1)/2."""
    kind = canonical_kind(kind)
    if kind in ("crude", "crude_at"):
        return d
    rotation = (d + 2) * (d - 1) // 2
    if kind == "spherical_star":
        return rotation
    if card_v is None:
        raise ParameterError(f"{kind} cost needs |V|")
    if kind == "spherical":
        return rotation + card_v
    if card_v % 2:
        raise ParameterError("spherical_at needs an even |V|")
    return rotation + card_v // 2


def variance_ratio(target: EstimateResult, baseline: EstimateResult, penalized: bool = False) -> float:
    """Baseline variance over target variance (each times its cost if penalized).

    A zero-variance target gives ``inf``; check ``target.zero_variance``.
    """
    if not baseline.sample_variance > 0:
        raise ParameterError("baseline variance must be positive")
    num = baseline.sample_variance
    den = target.sample_variance
    if penalized:
        num *= baseline.cost_per_replicate
        den *= target.cost_per_replicate
    if den == 0:
        return float("inf")
    return float(num / den)


# ---------------------------------------------------------------------------
# block driver


def _block_size(footprint: int) -> int:
    return max(1, BLOCK_BUDGET // max(footprint, 1))


def _run_blocks(m: int, block: int, stream: RandomStream, fn, workers: int = 1) -> np.ndarray:
    if m < 2:
        raise ParameterError("M must be >= 2")
    spans = [(k, min(block, m - k * block)) for k in range((m + block - 1) // block)]

    def task(span):
        k, n = span
        return fn(stream.substream(k), n)

    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(task, spans))
    else:
        parts = [task(span) for span in spans]
    return np.concatenate(parts)


def _result(kind, values, cost, stream, t0, *, counts_chi=True, point_set=None):
    values = np.asarray(values, dtype=float)
    return EstimateResult(
        kind=kind,
        estimate=float(values.mean()),
        sample_variance=float(values.var(ddof=1)),
        replicates=values.size,
        cost_per_replicate=cost,
        cost_counts_chi_cdf=counts_chi,
        seed=stream.metadata,
        wall_time=time.perf_counter() - t0,
        values=values,
        point_set=point_set,
    )


def _check_pointset(p: Problem, v: PointSet):
    if v.dim != p.dim:
        raise ParameterError(f"point set dimension {v.dim} != problem dimension {p.dim}")


def _spherical_order(v: PointSet) -> np.ndarray:
    if v.centrally_symmetric:
        return v.vectors[antipodal_order(v)]
    return v.vectors


def _rotated_directions(p: Problem, t: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Gamma T v for every rotation in ``t`` and row of ``vecs``: shape (B, m, d)."""
    gt = np.matmul(p.gamma, t)
    return np.matmul(vecs, gt.transpose(0, 2, 1))


# ---------------------------------------------------------------------------
# estimators


def estimate_crude(p: Problem, M: int, s: RandomStream, *, workers: int = 1) -> EstimateResult:
    t0 = time.perf_counter()
    d = p.dim

    def block(sub, n):
        z = sub.normal((n, d))
        return p.region.contains(p.mu + z @ p.gamma.T).astype(float)

    values = _run_blocks(M, _block_size(d), s, block, workers)
    return _result("crude", values, replicate_cost("crude", d), s, t0)


def estimate_crude_at(p: Problem, M: int, s: RandomStream, *, workers: int = 1) -> EstimateResult:
    t0 = time.perf_counter()
    d = p.dim

    def block(sub, n):
        gz = sub.normal((n, d)) @ p.gamma.T
        plus = p.region.contains(p.mu + gz)
        minus = p.region.contains(p.mu - gz)
        return 0.5 * (plus.astype(float) + minus)

    values = _run_blocks(M, _block_size(2 * d), s, block, workers)
    return _result("crude_at", values, replicate_cost("crude_at", d), s, t0)


def estimate_spherical(p: Problem, V: PointSet, M: int, s: RandomStream, *,
                       workers: int = 1) -> EstimateResult:
    """Average of I_A over |V| rotated directions, each with its own chi radius."""
    t0 = time.perf_counter()
    _check_pointset(p, V)
    d, vecs = p.dim, _spherical_order(V)
    m = len(vecs)

    def block(sub, n):
        t = sub.haar(d, n)
        r = sub.chi(d, (m, n)).T
        x = p.mu + r[:, :, None] * _rotated_directions(p, t, vecs)
        return p.region.contains(x).mean(axis=1)

    values = _run_blocks(M, _block_size(m * d), s, block, workers)
    return _result("spherical", values, replicate_cost("spherical", d, m), s, t0,
                   point_set=V.name)


def _at_indicators(p: Problem, V: PointSet, sub: RandomStream, n: int):
    d = p.dim
    # same ordering as the V+ block of _spherical_order
    plus = V.vectors[antipodal_order(V)[: len(V) // 2]]
    t = sub.haar(d, n)
    r = sub.chi(d, (len(plus), n)).T
    w = r[:, :, None] * _rotated_directions(p, t, plus)
    return p.region.contains(p.mu + w), p.region.contains(p.mu - w)


def estimate_spherical_at(p: Problem, V: PointSet, M: int, s: RandomStream, *,
                          workers: int = 1) -> EstimateResult:
    """Antithetic version: one radius per antipodal pair {Tv, -Tv}."""
    t0 = time.perf_counter()
    _check_pointset(p, V)
    if not V.centrally_symmetric:
        raise ParameterError("spherical_at needs a centrally symmetric point set")
    m = len(V)

    def block(sub, n):
        plus, minus = _at_indicators(p, V, sub, n)
        return (plus.sum(axis=1) + minus.sum(axis=1)) / m

    values = _run_blocks(M, _block_size(m * p.dim), s, block, workers)
    return _result("spherical_at", values, replicate_cost("spherical_at", p.dim, m), s, t0,
                   point_set=V.name)


def at_pair_sums(p: Problem, V: PointSet, M: int, s: RandomStream) -> np.ndarray:
    """I_A(r, Tv) + I_A(r, -Tv) for every antipodal pair and replicate, shape (M, |V|/2)."""
    _check_pointset(p, V)
    parts = []
    m = len(V)
    block = _block_size(m * p.dim)
    for k in range((M + block - 1) // block):
        n = min(block, M - k * block)
        plus, minus = _at_indicators(p, V, s.substream(k), n)
        parts.append(plus.astype(int) + minus)
    return np.concatenate(parts)


def estimate_spherical_star(p: Problem, V: PointSet, M: int, s: RandomStream, *,
                            workers: int = 1) -> EstimateResult:
    """Average of the closed-form radial probability over rotated directions.

    No radii are drawn; the chi-CDF evaluations are not part of the cost.
    """
    t0 = time.perf_counter()
    _check_pointset(p, V)
    if isinstance(p.region, IndicatorRegion):
        raise UnsupportedRegionError("spherical_star needs a region with a closed-form radial integral")
    d, vecs = p.dim, _spherical_order(V)
    m = len(vecs)

    def block(sub, n):
        t = sub.haar(d, n)
        w = _rotated_directions(p, t, vecs).reshape(-1, d)
        return radial_probabilities(p.region, p.mu, w).reshape(n, m).mean(axis=1)

    values = _run_blocks(M, _block_size(4 * m * d), s, block, workers)
    return _result("spherical_star", values, replicate_cost("spherical_star", d), s, t0,
                   counts_chi=False, point_set=V.name)


def estimate_g_sphere_region(V: PointSet, cap_axis, theta: float, M: int, s: RandomStream, *,
                             workers: int = 1) -> EstimateResult:
    """Fraction of the rotated set TV inside the cap {u : u . axis >= cos(theta)}."""
    t0 = time.perf_counter()
    if not 0 < theta <= np.pi:
        raise ParameterError("theta must lie in (0, pi]")
    axis = np.asarray(cap_axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    d = V.dim
    cos_t = np.cos(theta)

    def block(sub, n):
        t = sub.haar(d, n)
        # (T v) . a = v . (T' a)
        y = np.einsum("bji,j->bi", t, axis)
        return np.mean(y @ V.vectors.T >= cos_t, axis=1)

    values = _run_blocks(M, _block_size(len(V) + d * d), s, block, workers)
    return _result("g_cap", values, replicate_cost("spherical_star", d), s, t0, point_set=V.name)


def run_estimator(kind: str, p: Problem, M: int, s: RandomStream, V: PointSet | None = None,
                  *, workers: int = 1) -> EstimateResult:
    kind = canonical_kind(kind)
    if kind == "crude":
        return estimate_crude(p, M, s, workers=workers)
    if kind == "crude_at":
        return estimate_crude_at(p, M, s, workers=workers)
    if V is None:
        raise ParameterError(f"{kind} needs a point set")
    fn = {"spherical": estimate_spherical, "spherical_at": estimate_spherical_at,
          "spherical_star": estimate_spherical_star}[kind]
    return fn(p, V, M, s, workers=workers)
