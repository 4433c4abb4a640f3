"""Spherical Monte Carlo estimators for multivariate normal probabilities,
using rotated shortest-vector sets of lattices as integration points."""

from .estimators import (EstimateResult, Problem, estimate_crude, estimate_crude_at,
                         estimate_g_sphere_region, estimate_spherical, estimate_spherical_at,
                         estimate_spherical_star, replicate_cost, run_estimator, variance_ratio)
from .lattices import PointSet, build_pointset, load_pointset, save_pointset, verify_t_design
from .linalg import CovarianceModel, build_covariance, cholesky
from .randsrc import RandomStream
from .regions import parse_region, standard_region

__all__ = [
    "CovarianceModel", "EstimateResult", "PointSet", "Problem", "RandomStream",
    "build_covariance", "build_pointset", "cholesky", "estimate_crude", "estimate_crude_at",
    "estimate_g_sphere_region", "estimate_spherical", "estimate_spherical_at",
    "estimate_spherical_star", "load_pointset", "parse_region", "replicate_cost",
    "run_estimator", "save_pointset", "standard_region", "variance_ratio", "verify_t_design",
]
