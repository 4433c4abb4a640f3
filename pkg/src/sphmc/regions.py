"""Integration regions: membership, ray intervals, radial chi integrals.

Regions live in the original coordinates of X ~ N(mu, Sigma). A ray
``mu + r * w`` with ``w = Gamma u`` corresponds to the standardized ray
``r * u``, so the radial probability of a direction ``u`` is the chi(d)
mass of ``{r >= 0 : mu + r w in A}``.

All regions are closed. Zero-length pieces of a ray are dropped since they
carry no probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .linalg import ParameterError
from .specfun import chi_cdf


class UnsupportedRegionError(TypeError):
    """The region has no closed-form radial integral or exact symmetry test."""


IntervalList = list[tuple[float, float]]


def merge_intervals(intervals) -> IntervalList:
    pieces = sorted((float(a), float(b)) for a, b in intervals if b > a)
    out: IntervalList = []
    for a, b in pieces:
        if out and a <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


@dataclass(frozen=True)
class Box:
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    label: str = ""

    def __post_init__(self):
        lo = tuple(float(x) for x in self.lo)
        hi = tuple(float(x) for x in self.hi)
        if len(lo) != len(hi) or not lo:
            raise ParameterError("box bounds must be non-empty and of equal length")
        for a, b in zip(lo, hi):
            if math.isnan(a) or math.isnan(b) or a == math.inf or b == -math.inf or not a < b:
                raise ParameterError(f"bad box bounds [{a}, {b}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.all((x >= np.array(self.lo)) & (x <= np.array(self.hi)), axis=-1)

    def ray_bounds(self, mu, w):
        """Per-direction feasible [r_lo, r_hi] for rays ``mu + r w``; w has
        shape (n, d). Rows with r_lo >= r_hi are empty."""
        lo = np.array(self.lo) - mu
        hi = np.array(self.hi) - mu
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = lo / w
            t2 = hi / w
        a = np.minimum(t1, t2)
        b = np.maximum(t1, t2)
        flat = w == 0.0
        if flat.any():
            inside = (lo <= 0.0) & (hi >= 0.0)
            inside = np.broadcast_to(inside, w.shape)
            a = np.where(flat, np.where(inside, -np.inf, np.inf), a)
            b = np.where(flat, np.where(inside, np.inf, -np.inf), b)
        r_lo = np.maximum(a.max(axis=-1), 0.0)
        r_hi = b.min(axis=-1)
        return r_lo, r_hi

    def negated(self) -> "Box":
        return Box(tuple(-h for h in self.hi), tuple(-l for l in self.lo))


@dataclass(frozen=True)
class Ellipsoid:
    """Ball ``(x - b)'(x - b) <= c^2``."""

    center: tuple[float, ...]
    radius: float = 1.0
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(x) for x in self.center))
        if not self.radius > 0:
            raise ParameterError("radius must be positive")

    @property
    def dim(self) -> int:
        return len(self.center)

    def contains(self, x) -> np.ndarray:
        diff = np.asarray(x, dtype=float) - np.array(self.center)
        return np.einsum("...i,...i->...", diff, diff) <= self.radius ** 2

    def ray_bounds(self, mu, w):
        # |mu - b + r w|^2 <= c^2  ->  A r^2 + 2 B r + C <= 0
        p = np.asarray(mu, dtype=float) - np.array(self.center)
        qa = np.einsum("ij,ij->i", w, w)
        qb = w @ p
        qc = p @ p - self.radius ** 2
        disc = qb * qb - qa * qc
        root = np.sqrt(np.maximum(disc, 0.0))
        # numerically stable roots
        q = -(qb + np.copysign(root, qb))
        with np.errstate(divide="ignore", invalid="ignore"):
            r1 = np.where(q != 0, qc / q, 0.0)
            r2 = q / qa
        a = np.minimum(r1, r2)
        b = np.maximum(r1, r2)
        empty = disc <= 0.0
        a = np.where(empty, np.inf, np.maximum(a, 0.0))
        b = np.where(empty, -np.inf, b)
        return a, b


@dataclass(frozen=True)
class BoxUnion:
    """Union of boxes with pairwise disjoint interiors."""

    boxes: tuple[Box, ...]
    label: str = ""

    def __post_init__(self):
        boxes = tuple(self.boxes)
        if not boxes:
            raise ParameterError("empty box union")
        if len({b.dim for b in boxes}) != 1:
            raise ParameterError("box union members differ in dimension")
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                if _interiors_overlap(boxes[i], boxes[j]):
                    raise ParameterError(f"box union members {i} and {j} overlap")
        object.__setattr__(self, "boxes", boxes)

    @property
    def dim(self) -> int:
        return self.boxes[0].dim

    def contains(self, x) -> np.ndarray:
        out = self.boxes[0].contains(x)
        for b in self.boxes[1:]:
            out = out | b.contains(x)
        return out


@dataclass(frozen=True)
class IndicatorRegion:
    """User region given only by a membership test on arrays of shape (..., d)."""

    dim: int
    indicator: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    label: str = "custom"

    def contains(self, x) -> np.ndarray:
        return np.asarray(self.indicator(np.asarray(x, dtype=float)), dtype=bool)


Region = Box | Ellipsoid | BoxUnion | IndicatorRegion


def _interiors_overlap(a: Box, b: Box) -> bool:
    return all(max(l1, l2) < min(h1, h2)
               for l1, h1, l2, h2 in zip(a.lo, a.hi, b.lo, b.hi))


# ---------------------------------------------------------------------------

STANDARD_LABELS = ("E1", "E2", "E3", "O1", "O2", "O3", "R1", "R2", "R3", "S")


def region_type(label: str) -> str:
    """'E', 'O', 'R' or 'S' for the standard labels, else 'X'."""
    head = label[:1].upper()
    return head if label.upper() in STANDARD_LABELS else "X"


def standard_region(label: str, d: int) -> Region:
    label = label.upper()
    if d < 1:
        raise ParameterError("d must be >= 1")
    inf = math.inf
    if label in ("E1", "E2", "E3"):
        if label == "E1":
            b = [1.0] + [0.0] * (d - 1)
        elif label == "E2":
            b = [0.5] + [0.0] * (d - 1)
        else:
            b = [1.0] * d
        return Ellipsoid(tuple(b), 1.0, label=label)
    if label in ("O1", "O2", "O3"):
        top = {"O1": 0.0, "O2": 1.0, "O3": -1.0}[label]
        return Box((-inf,) * d, (top,) * d, label=label)
    if label in ("R1", "R2", "R3"):
        lo, hi = {"R1": (-1.0, 1.0), "R2": (0.0, 2.0), "R3": (0.5, 1.5)}[label]
        return Box((lo,) * d, (hi,) * d, label=label)
    if label == "S":
        if d < 2:
            raise ParameterError("region S needs d >= 2")
        rest_lo, rest_hi = (-1.0,) * (d - 1), (1.0,) * (d - 1)
        return BoxUnion((Box((-1.0,) + rest_lo, (-0.5,) + rest_hi),
                         Box((0.0,) + rest_lo, (0.5,) + rest_hi)), label="S")
    raise ParameterError(f"unknown region label {label!r}")


def parse_region(text: str, d: int | None = None) -> Region:
    """Parse a label (``O1``) or ``box:lo,hi;...``, ``ell:c1,...,cd;r``,
    ``union:box:...|box:...``."""
    text = text.strip()
    if text.upper() in STANDARD_LABELS:
        if d is None:
            raise ParameterError("a dimension is needed for a named region")
        return standard_region(text, d)
    kind, sep, body = text.partition(":")
    if not sep:
        raise ParameterError(f"cannot parse region {text!r}")
    try:
        if kind == "box":
            lo, hi = [], []
            for axis in body.split(";"):
                a, b = axis.split(",")
                lo.append(float(a))
                hi.append(float(b))
            region = Box(tuple(lo), tuple(hi), label=text)
        elif kind == "ell":
            center, radius = body.split(";")
            region = Ellipsoid(tuple(float(c) for c in center.split(",")),
                               float(radius), label=text)
        elif kind == "union":
            members = [parse_region(part) for part in body.split("|")]
            if not all(isinstance(m, Box) for m in members):
                raise ParameterError("union members must be boxes")
            region = BoxUnion(tuple(members), label=text)
        else:
            raise ParameterError(f"unknown region kind {kind!r}")
    except ValueError as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ParameterError(f"cannot parse region {text!r}: {exc}") from None
    if d is not None and region.dim != d:
        raise ParameterError(f"region has dimension {region.dim}, expected {d}")
    return region


# ---------------------------------------------------------------------------


def contains(region: Region, x) -> bool | np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != region.dim:
        raise ParameterError(f"point dimension {x.shape[-1]} != region dimension {region.dim}")
    out = region.contains(x)
    return bool(out) if np.ndim(out) == 0 else out


def _members(region: Region):
    if isinstance(region, BoxUnion):
        return region.boxes
    if isinstance(region, (Box, Ellipsoid)):
        return (region,)
    raise UnsupportedRegionError(f"{type(region).__name__} has no ray intersection")


def ray_intervals(region: Region, mu, w) -> IntervalList:
    """``{r >= 0 : mu + r w in region}`` as merged closed intervals."""
    w = np.asarray(w, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if not np.any(w != 0.0):
        raise ParameterError("ray direction must be non-zero")
    if w.shape != (region.dim,) or mu.shape != (region.dim,):
        raise ParameterError("dimension mismatch")
    pieces = []
    for member in _members(region):
        a, b = member.ray_bounds(mu, w[None])
        pieces.append((a[0], b[0]))
    return merge_intervals(pieces)


def radial_probabilities(region: Region, mu, w: np.ndarray) -> np.ndarray:
    """Vectorized f_A for rows of ``w`` (directions already mapped by Gamma).

    Union members have disjoint interiors, so their chi masses add.
    """
    w = np.atleast_2d(np.asarray(w, dtype=float))
    d = w.shape[1]
    total = np.zeros(w.shape[0])
    for member in _members(region):
        a, b = member.ray_bounds(np.asarray(mu, dtype=float), w)
        hit = b > a
        if hit.any():
            total[hit] += chi_cdf(b[hit], d) - chi_cdf(a[hit], d)
    return np.clip(total, 0.0, 1.0)


def radial_integral(region: Region, mu, gamma, u) -> float:
    """Probability mass of the region along direction ``u`` (unit, standardized)."""
    u = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(u) - 1.0) > 1e-10:
        raise ParameterError("u must be a unit vector")
    w = np.asarray(gamma, dtype=float) @ u
    d = u.shape[0]
    total = 0.0
    for a, b in ray_intervals(region, mu, w):
        total += float(chi_cdf(b, d)) - float(chi_cdf(a, d))
    return min(max(total, 0.0), 1.0)


def is_centrally_antisymmetric(region: Region) -> bool:
    """Whether the interiors of A and -A are disjoint (standardized frame, mu = 0)."""
    if isinstance(region, Box):
        return not _interiors_overlap(region, region.negated())
    if isinstance(region, Ellipsoid):
        return math.hypot(*region.center) >= region.radius
    if isinstance(region, BoxUnion):
        return not any(_interiors_overlap(a, b.negated())
                       for a in region.boxes for b in region.boxes)
    raise UnsupportedRegionError(f"no exact antisymmetry test for {type(region).__name__}")


def ray_antisymmetry_diagnostic(region: Region, mu, gamma, n_dirs: int, s) -> int:
    """Count sampled directions u whose rays along +Gamma u and -Gamma u both
    meet the region in a set of positive length."""
    if n_dirs < 1:
        raise ParameterError("n_dirs must be >= 1")
    d = region.dim
    u = s.sphere(d, n_dirs)
    w = u @ np.asarray(gamma, dtype=float).T
    mu = np.asarray(mu, dtype=float)
    return int(np.count_nonzero(_ray_hits(region, mu, w) & _ray_hits(region, mu, -w)))


def _ray_hits(region, mu, w):
    hit = np.zeros(w.shape[0], dtype=bool)
    for member in _members(region):
        a, b = member.ray_bounds(mu, w)
        hit |= b > a
    return hit
