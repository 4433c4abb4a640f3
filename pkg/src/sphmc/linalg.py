"""Dense linear algebra: covariance models, Cholesky, Gram-Schmidt."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ParameterError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class FactorizationError(ArithmeticError):
    """Raised when a matrix is not numerically positive definite."""


class DegeneracyError(ArithmeticError):
    """Raised when Gram-Schmidt meets a (numerically) dependent column."""


CHOLESKY_PIVOT_TOL = 1e-12
GRAM_SCHMIDT_TOL = 1e-12


@dataclass(frozen=True)
class CovarianceModel:
    kind: str = "identity"
    rho: float | None = None

    def __post_init__(self):
        if self.kind not in ("identity", "one_factor", "ar1"):
            raise ParameterError(f"unknown covariance kind {self.kind!r}")
        if self.kind != "identity" and self.rho is None:
            raise ParameterError(f"{self.kind} needs rho")

    @property
    def label(self) -> str:
        if self.kind == "identity":
            return "identity"
        return f"{self.kind.replace('_', '-')}:{self.rho:g}"

    @classmethod
    def parse(cls, text: str) -> "CovarianceModel":
        """Parse ``identity``, ``one-factor:0.3`` or ``ar1:-0.1``."""
        text = text.strip()
        if text == "identity":
            return cls("identity")
        kind, sep, rho = text.partition(":")
        if not sep:
            raise ParameterError(f"bad covariance spec {text!r}")
        kind = kind.strip().replace("-", "_")
        try:
            value = float(rho)
        except ValueError:
            raise ParameterError(f"bad rho in {text!r}") from None
        return cls(kind, value)


def build_covariance(model: CovarianceModel, d: int) -> np.ndarray:
    if d < 1:
        raise ParameterError("d must be >= 1")
    if model.kind == "identity":
        return np.eye(d)
    rho = float(model.rho)
    if model.kind == "one_factor":
        lower = -1.0 / (d - 1) if d > 1 else -np.inf
        if not (lower < rho < 1.0):
            raise ParameterError(f"one-factor rho={rho} outside ({lower}, 1) for d={d}")
        sigma = np.full((d, d), rho)
        np.fill_diagonal(sigma, 1.0)
        return sigma
    if not abs(rho) < 1.0:
        raise ParameterError(f"ar1 rho={rho} must satisfy |rho| < 1")
    idx = np.arange(d)
    return rho ** np.abs(idx[:, None] - idx[None, :]).astype(float)


def cholesky(sigma) -> np.ndarray:
    """Lower-triangular ``G`` with ``G @ G.T == sigma``.

    Plain Cholesky-Banachiewicz; a pivot below ``1e-12 * max(diag(sigma))``
    raises :class:`FactorizationError`.
    """
    a = np.asarray(sigma, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError("sigma must be square")
    if not np.all(np.isfinite(a)):
        raise ParameterError("sigma has non-finite entries")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * np.max(np.abs(a))):
        raise ParameterError("sigma is not symmetric")
    n = a.shape[0]
    tol = CHOLESKY_PIVOT_TOL * np.max(np.diag(a))
    g = np.zeros_like(a)
    for j in range(n):
        pivot = a[j, j] - g[j, :j] @ g[j, :j]
        if not pivot > tol:
            raise FactorizationError(f"non-positive pivot {pivot:.3e} at column {j}")
        g[j, j] = np.sqrt(pivot)
        g[j + 1:, j] = (a[j + 1:, j] - g[j + 1:, :j] @ g[j, :j]) / g[j, j]
    return g


def gram_schmidt(m) -> np.ndarray:
    """Orthonormalize the columns of a square matrix.

    Modified Gram-Schmidt with one re-orthogonalization pass. Each column's
    coefficient on its own normalized direction is positive, so the result
    equals the Q of the QR factorization with positive diagonal R.
    """
    q = np.array(m, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ParameterError("gram_schmidt expects a square matrix")
    return gram_schmidt_batch(q[None])[0]


def gram_schmidt_batch(m: np.ndarray, *, raise_on_degenerate: bool = True):
    """Column-wise Gram-Schmidt on a stack of square matrices, shape (B, d, d).

    With ``raise_on_degenerate=False`` returns ``(q, ok)`` where ``ok`` marks
    the matrices that stayed above tolerance.
    """
    q = np.array(m, dtype=float)
    b, d, _ = q.shape
    scale = np.maximum(np.linalg.norm(q, axis=1).max(axis=1), np.finfo(float).tiny)
    ok = np.ones(b, dtype=bool)
    for j in range(d):
        col = q[:, :, j]
        for _ in range(2):
            for k in range(j):
                prev = q[:, :, k]
                col -= np.einsum("bi,bi->b", prev, col)[:, None] * prev
        norm = np.linalg.norm(col, axis=1)
        bad = norm <= GRAM_SCHMIDT_TOL * scale
        if bad.any():
            if raise_on_degenerate:
                raise DegeneracyError(f"column {j} is numerically dependent")
            ok &= ~bad
            norm = np.where(bad, 1.0, norm)
        q[:, :, j] = col / norm[:, None]
    if raise_on_degenerate:
        return q
    return q, ok
