"""Normalized shortest-vector sets of classical lattices.

Every builder returns a :class:`PointSet` of unit vectors. The raw vectors
are produced with integer (or half-integer) coordinates, self-checked for
cardinality, common norm and minimal distance, then normalized.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np

from .linalg import ParameterError, gram_schmidt
from .specfun import sphere_moment


class IntegrityError(RuntimeError):
    """A constructed or loaded point set failed its self-check."""


class PointSetFormatError(ValueError):
    pass


UNIT_TOL = 1e-12
ZERO_COORD_TOL = 1e-12
LOAD_RENORM_TOL = 1e-9

FAMILIES = ("zd", "ad", "dd", "e6", "e7", "e8", "bw16", "leech")
FIXED_DIM = {"e6": 6, "e7": 7, "e8": 8, "bw16": 16, "leech": 24}
# family -> (dimension, cardinality, t-design strength) for the maximal-kissing choices
KISSING_SETS = {
    2: ("ad", 6, 5), 3: ("ad", 12, 3), 4: ("dd", 24, 5), 5: ("dd", 40, 3),
    6: ("e6", 72, 5), 7: ("e7", 126, 5), 8: ("e8", 240, 7),
    16: ("bw16", 4320, 7), 24: ("leech", 196560, 11),
}


def expected_cardinality(family: str, d: int) -> int:
    return {
        "zd": 2 * d, "ad": d * (d + 1), "dd": 2 * d * (d - 1),
        "e6": 72, "e7": 126, "e8": 240, "bw16": 4320, "leech": 196560,
    }[family]


@dataclass(frozen=True, eq=False)
class PointSet:
    vectors: np.ndarray
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        v = np.array(self.vectors, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1:
            raise ParameterError("vectors must be a non-empty (m, d) array")
        if np.any(np.abs(np.linalg.norm(v, axis=1) - 1.0) > UNIT_TOL):
            raise IntegrityError("point set vectors must have unit norm")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    def __len__(self):
        return self.vectors.shape[0]

    def __repr__(self):
        return f"PointSet(name={self.name!r}, dim={self.dim}, size={len(self)})"

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def d_min(self) -> float:
        if "d_min" not in self._cache:
            self._cache["d_min"] = min_distance(self)
        return self._cache["d_min"]

    @cached_property
    def antipode_index(self) -> np.ndarray | None:
        """``idx`` with ``vectors[idx[i]] == -vectors[i]``, or None."""
        return _antipodes(self.vectors)

    @property
    def centrally_symmetric(self) -> bool:
        return self.antipode_index is not None

    def rotated(self, t: np.ndarray) -> "PointSet":
        return PointSet(self.vectors @ np.asarray(t).T, name=self.name)


def _antipodes(v: np.ndarray):
    # hash rounded coordinates, then confirm the match at full precision
    keys = np.round(v, 9) + 0.0
    lookup = {row.tobytes(): i for i, row in enumerate(keys)}
    neg = np.round(-v, 9) + 0.0
    idx = np.empty(len(v), dtype=np.int64)
    for i, row in enumerate(neg):
        j = lookup.get(row.tobytes())
        if j is None:
            return None
        idx[i] = j
    if np.max(np.abs(v[idx] + v)) > UNIT_TOL:
        return None
    return idx


# ---------------------------------------------------------------------------
# raw constructions (unnormalized, exact small-integer coordinates)


def _signed_pairs(d: int) -> np.ndarray:
    out = []
    for i, j in itertools.combinations(range(d), 2):
        for si, sj in itertools.product((1, -1), repeat=2):
            v = np.zeros(d)
            v[i], v[j] = si, sj
            out.append(v)
    return np.array(out)


def _raw_zd(d):
    eye = np.eye(d)
    return np.vstack([eye, -eye])


def _raw_dd(d):
    return _signed_pairs(d)


def _hyperplane_basis(d: int) -> np.ndarray:
    """Orthonormal basis (rows) of {x in R^{d+1}: sum x = 0}.

    Gram-Schmidt on e_1 - e_2, ..., e_d - e_{d+1}.
    """
    m = np.zeros((d + 1, d + 1))
    for i in range(d):
        m[i, i], m[i + 1, i] = 1.0, -1.0
    m[:, d] = 1.0  # completes the basis; orthogonal to the hyperplane
    q = gram_schmidt(m)
    return q[:, :d].T


def _raw_ad(d):
    roots = []
    for i, j in itertools.permutations(range(d + 1), 2):
        v = np.zeros(d + 1)
        v[i], v[j] = 1.0, -1.0
        roots.append(v)
    return np.array(roots) @ _hyperplane_basis(d).T


def _raw_e8():
    d8 = _signed_pairs(8)
    halves = np.array([s for s in itertools.product((0.5, -0.5), repeat=8)
                       if sum(x < 0 for x in s) % 2 == 0])
    return np.vstack([d8, halves])


def _subspace_coordinates(vectors: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """Express vectors lying in the orthogonal complement of ``normals`` in an
    orthonormal basis of that complement (Gram-Schmidt completion)."""
    n = vectors.shape[1]
    k = normals.shape[0]
    m = np.zeros((n, n))
    m[:, :k] = normals.T
    # complete with coordinate vectors, picking those that keep m invertible
    col = k
    for i in range(n):
        if col == n:
            break
        trial = m.copy()
        trial[i, col] = 1.0
        if np.linalg.matrix_rank(trial[:, :col + 1], tol=1e-9) == col + 1:
            m = trial
            col += 1
    q = gram_schmidt(m)
    basis = q[:, k:]
    return vectors @ basis


def _raw_e7():
    e8 = _raw_e8()
    a = np.zeros(8)
    a[0], a[1] = 1.0, 1.0
    keep = np.abs(e8 @ a) < 1e-12
    return _subspace_coordinates(e8[keep], a[None])


def _raw_e6():
    e8 = _raw_e8()
    a = np.zeros(8)
    a[0], a[1] = 1.0, 1.0
    b = np.zeros(8)
    b[1], b[2] = -1.0, 1.0  # <a, b> = -1: a and b span an A2 root system
    keep = (np.abs(e8 @ a) < 1e-12) & (np.abs(e8 @ b) < 1e-12)
    return _subspace_coordinates(e8[keep], np.vstack([a, b]))


def reed_muller_1_4() -> np.ndarray:
    """First-order Reed-Muller code RM(1, 4): 32 words of length 16."""
    points = np.array(list(itertools.product((0, 1), repeat=4)))
    words = []
    for coeffs in itertools.product((0, 1), repeat=5):
        words.append((coeffs[0] + points @ np.array(coeffs[1:])) % 2)
    return np.array(words, dtype=np.int64)


def _raw_bw16():
    # {x in Z^16 : x mod 2 in RM(1,4), sum(x) = 0 mod 4}; minimal norm 8
    pairs = 2.0 * _signed_pairs(16)
    code = reed_muller_1_4()
    octads = code[code.sum(axis=1) == 8]
    signs = np.array([s for s in itertools.product((1, -1), repeat=8)
                      if sum(x < 0 for x in s) % 2 == 0], dtype=float)
    odd = []
    for word in octads:
        support = np.flatnonzero(word)
        block = np.zeros((len(signs), 16))
        block[:, support] = signs
        odd.append(block)
    return np.vstack([pairs] + odd)


def golay_code() -> np.ndarray:
    """Extended binary Golay code (4096 words of length 24).

    Cyclic [23, 12] code with generator x^11+x^10+x^6+x^5+x^4+x^2+1, extended
    by an overall parity bit.
    """
    g = np.zeros(23, dtype=np.int64)
    g[[0, 2, 4, 5, 6, 10, 11]] = 1
    gen = np.array([np.roll(g, i) for i in range(12)])
    msgs = np.array(list(itertools.product((0, 1), repeat=12)), dtype=np.int64)
    words = msgs @ gen % 2
    parity = words.sum(axis=1) % 2
    return np.hstack([words, parity[:, None]])


def _raw_leech():
    # Leech lattice scaled so minimal vectors have norm 32
    code = golay_code()
    weights = code.sum(axis=1)
    shape_44 = 4.0 * _signed_pairs(24)
    octads = code[weights == 8]
    signs = np.array([s for s in itertools.product((1, -1), repeat=8)
                      if sum(x < 0 for x in s) % 2 == 0], dtype=float)
    shape_2 = np.zeros((len(octads) * len(signs), 24))
    for k, word in enumerate(octads):
        support = np.flatnonzero(word)
        shape_2[k * len(signs):(k + 1) * len(signs)][:, support] = 2.0 * signs
    # (-3, 1^23) with signs flipped on a Golay codeword
    flips = 1.0 - 2.0 * code  # +1 / -1 per coordinate
    shape_3 = np.empty((24 * len(code), 24))
    for i in range(24):
        base = np.ones(24)
        base[i] = -3.0
        shape_3[i * len(code):(i + 1) * len(code)] = base * flips
    return np.vstack([shape_44, shape_2, shape_3])


_RAW = {
    "zd": _raw_zd, "ad": _raw_ad, "dd": _raw_dd,
    "e6": lambda d: _raw_e6(), "e7": lambda d: _raw_e7(), "e8": lambda d: _raw_e8(),
    "bw16": lambda d: _raw_bw16(), "leech": lambda d: _raw_leech(),
}

_BUILD_CACHE: dict[tuple[str, int], PointSet] = {}


def build_pointset(family: str, d: int | None = None, *, check: bool = True) -> PointSet:
    """Normalized shortest vectors of a lattice family in dimension ``d``."""
    family = family.lower()
    if family not in FAMILIES:
        raise ParameterError(f"unknown lattice family {family!r}")
    if family in FIXED_DIM:
        if d is not None and d != FIXED_DIM[family]:
            raise ParameterError(f"{family} only exists in dimension {FIXED_DIM[family]}")
        d = FIXED_DIM[family]
    if d is None or d < {"zd": 1, "dd": 3}.get(family, 2):
        raise ParameterError(f"invalid dimension {d} for {family}")
    key = (family, d)
    if key in _BUILD_CACHE:
        return _BUILD_CACHE[key]
    raw = np.asarray(_RAW[family](d), dtype=float)
    norms = np.linalg.norm(raw, axis=1)
    if np.ptp(norms) > 1e-9 * norms.max():
        raise IntegrityError(f"{family}: shortest vectors do not share a norm")
    ps = PointSet(raw / norms[:, None], name=f"{family}{d}" if family in ("zd", "ad", "dd") else family)
    if check:
        if len(ps) != expected_cardinality(family, d):
            raise IntegrityError(f"{family}: got {len(ps)} vectors, "
                                 f"expected {expected_cardinality(family, d)}")
        if len(ps) > 1:
            exact = _integer_min_distance(raw, ps)
            if exact is not None:
                ps._cache["d_min"] = exact
            target = 1.0
            if family == "zd":
                target = 2.0 if d == 1 else math.sqrt(2.0)
            if abs(ps.d_min - target) > 1e-12:
                raise IntegrityError(f"{family}: d_min = {ps.d_min!r}, expected {target}")
        if not ps.centrally_symmetric:
            raise IntegrityError(f"{family}: not centrally symmetric")
    _BUILD_CACHE[key] = ps
    return ps


def _scan_rows(ps: PointSet) -> np.ndarray:
    # <v, w> = <-v, -w>, so rows from V+ cover every pair of a symmetric set
    if ps.centrally_symmetric:
        return np.flatnonzero(positive_half_mask(ps.vectors))
    return np.arange(len(ps))


def min_distance(ps: PointSet) -> float:
    """Exact minimum pairwise Euclidean distance (blocked O(m^2) scan)."""
    v = ps.vectors
    m = len(v)
    if m < 2:
        raise ParameterError("min_distance needs at least two points")
    block = max(16, int(4_000_000 // m))
    rows_all = _scan_rows(ps)
    best_dot = -np.inf
    best = np.inf
    for start in range(0, len(rows_all), block):
        rows = rows_all[start:start + block]
        g = v[rows] @ v.T
        g[np.arange(len(rows)), rows] = -np.inf
        top = float(g.max())
        if top < best_dot - 1e-9:
            continue
        best_dot = max(best_dot, top)
        # distances recomputed from coordinates for the near-maximal dot products
        i, j = np.nonzero(g >= top - 1e-9)
        diff = v[rows[i]] - v[j]
        best = min(best, float(np.sqrt(np.min(np.einsum("ij,ij->i", diff, diff)))))
    return best


def _integer_min_distance(raw: np.ndarray, ps: PointSet) -> float | None:
    """d_min of the normalized set from exact integer dot products.

    Applies when the raw vectors (times 1 or 2) are small integers of equal
    norm; float32 products of such integers are exact below 2**24.
    """
    for scale in (1.0, 2.0):
        ints = raw * scale
        if np.all(ints == np.round(ints)) and np.abs(ints).max() < 64:
            break
    else:
        return None
    norm2 = float(np.sum(ints[0] ** 2))
    if norm2 >= 2 ** 24:
        return None
    a = ints.astype(np.float32)
    rows_all = _scan_rows(ps)
    block = max(16, int(50_000_000 // len(a)))
    best = -np.inf
    for start in range(0, len(rows_all), block):
        rows = rows_all[start:start + block]
        g = a[rows] @ a.T
        g[np.arange(len(rows)), rows] = -np.inf
        best = max(best, float(g.max()))
    return math.sqrt(2.0 - 2.0 * best / norm2)


def positive_half(ps: PointSet) -> PointSet:
    """Vectors whose first coordinate above 1e-12 in magnitude is positive."""
    if not ps.centrally_symmetric:
        raise ParameterError("positive_half needs a centrally symmetric set")
    mask = positive_half_mask(ps.vectors)
    return PointSet(ps.vectors[mask], name=ps.name + "+")


def positive_half_mask(v: np.ndarray) -> np.ndarray:
    nonzero = np.abs(v) > ZERO_COORD_TOL
    first = np.argmax(nonzero, axis=1)
    lead = v[np.arange(len(v)), first]
    return lead > 0


def antipodal_order(ps: PointSet) -> np.ndarray:
    """Permutation listing V+ first, then the antipodes in matching order."""
    idx = ps.antipode_index
    if idx is None:
        raise ParameterError("point set is not centrally symmetric")
    plus = np.flatnonzero(positive_half_mask(ps.vectors))
    return np.concatenate([plus, idx[plus]])


# ---------------------------------------------------------------------------
# t-design verification


def verify_t_design(ps: PointSet, t: int, *, monomials=None) -> float:
    """Largest |mean over V of u^alpha - E[u^alpha]| over monomials of degree <= t.

    By default every monomial is checked, by depth-first traversal that
    extends a product vector one variable at a time. ``monomials`` restricts
    the check to an explicit list of exponent tuples.
    """
    if t < 1:
        raise ParameterError("t must be >= 1")
    v = ps.vectors
    d = ps.dim
    if monomials is not None:
        worst = 0.0
        for alpha in monomials:
            alpha = tuple(alpha)
            if len(alpha) != d or sum(alpha) > t:
                raise ParameterError(f"bad monomial {alpha}")
            prod = np.prod(v ** np.asarray(alpha), axis=1)
            worst = max(worst, abs(prod.mean() - sphere_moment(alpha, d)))
        return worst

    moment_cache: dict[tuple, float] = {}

    def exact(alpha):
        key = tuple(sorted(alpha))
        if key not in moment_cache:
            moment_cache[key] = sphere_moment(alpha, d)
        return moment_cache[key]

    worst = 0.0
    # stack entries: (product vector, exponent list, smallest allowed next variable)
    stack = [(np.ones(len(v)), [0] * d, 0)]
    while stack:
        prod, alpha, start = stack.pop()
        deg = sum(alpha)
        if deg == t:
            continue
        children = prod[:, None] * v[:, start:]
        means = children.mean(axis=0)
        for offset, mean in enumerate(means):
            i = start + offset
            child_alpha = alpha.copy()
            child_alpha[i] += 1
            worst = max(worst, abs(mean - exact(child_alpha)))
            if deg + 1 < t:
                stack.append((children[:, offset], child_alpha, i))
    return worst


def leech_monomial_sample(t: int = 11) -> list[tuple[int, ...]]:
    """Fixed list of monomials used for the sampled Leech design check.

    All monomials of degree <= t in the first three coordinates, plus
    products spread over further coordinates.
    """
    out = []
    for a, b, c in itertools.product(range(t + 1), repeat=3):
        if a + b + c <= t:
            alpha = [0] * 24
            alpha[0], alpha[1], alpha[2] = a, b, c
            out.append(tuple(alpha))
    spread = [
        {0: 2, 5: 2, 11: 2, 17: 2, 23: 2},
        {3: 4, 8: 4, 20: 2},
        {1: 2, 2: 2, 4: 2, 7: 2, 13: 2},
        {6: 6, 9: 4},
        {0: 1, 1: 1, 2: 1, 3: 1, 4: 1, 5: 1, 6: 1, 7: 1},
        {10: 8, 12: 2},
        {14: 2, 15: 2, 16: 2, 18: 2, 19: 2, 21: 1},
        {22: 10},
        {0: 3, 9: 3, 18: 3},
        {4: 2, 12: 4, 19: 4},
    ]
    for pattern in spread:
        alpha = [0] * 24
        for i, k in pattern.items():
            alpha[i] = k
        out.append(tuple(alpha))
    return out


# ---------------------------------------------------------------------------
# variance bound for rotated point sets


def variance_upper_bound(pi_a: float, n_pieces: int, card_v: int) -> float:
    """pi - pi^2 + (N/|V| - 1) pi for a region split into N pieces,
    each of diameter below d_min(V)."""
    if n_pieces < 1 or card_v < 1:
        raise ParameterError("N and |V| must be >= 1")
    return pi_a - pi_a ** 2 + (n_pieces / card_v - 1.0) * pi_a


def _sphere_pieces(k: int, delta: float) -> int:
    """Pieces in an explicit partition of the unit sphere S^k into sets of
    geodesic diameter < delta (polar caps plus latitude bands, recursively).

    delta is first rounded down onto a 1% log grid so sub-partitions repeat
    and can be cached; smaller pieces keep the partition valid.
    """
    return _sphere_pieces_grid(k, math.floor(math.log(delta) * 100.0))


@lru_cache(maxsize=1 << 16)
def _sphere_pieces_grid(k: int, step: int) -> int:
    delta = math.exp(step / 100.0)
    if k == 0:
        return 2
    if k == 1:
        return int(math.floor(2 * math.pi / delta)) + 1
    if delta > math.pi:
        # a hemisphere has geodesic diameter pi
        return 2
    return _cap_pieces(k, math.pi, delta, full=True)


def _cap_pieces(k: int, theta: float, delta: float, full: bool = False) -> int:
    """Pieces for the cap {polar angle <= theta} on S^k, k >= 1.

    The polar cap of angular radius < delta/2 is one piece. Each latitude
    band [a, b] is split into cells over S^{k-1}; a cell's geodesic diameter
    is at most (b - a) + max(sin) * diam(cross-section cell).
    """
    if k == 1:
        # arc of length 2 theta
        if theta >= math.pi:
            return _sphere_pieces(1, delta)
        return int(math.floor(2 * theta / delta)) + 1
    alpha = 0.45 * delta
    if theta <= alpha:
        return 1
    total = 1
    end = theta - alpha if full else theta
    if full:
        total += 1  # opposite polar cap
    width = 0.5 * delta
    lo = alpha
    while lo < end - 1e-15:
        hi = min(lo + width, end)
        smax = 1.0 if lo <= math.pi / 2 <= hi else max(math.sin(lo), math.sin(hi))
        inner = (0.9 * delta - (hi - lo)) / smax
        total += _sphere_pieces(k - 1, inner)
        lo = hi
    return total


def cap_decomposition_count(theta: float, d: int, d_min: float) -> int:
    """N for an explicit partition of the cap of angular radius ``theta`` on
    S^{d-1} into pieces whose chordal diameter is below ``d_min``."""
    if d < 2:
        raise ParameterError("d must be >= 2")
    if not 0 < d_min <= 2:
        raise ParameterError("d_min must lie in (0, 2]")
    # chord < d_min  <=>  geodesic < 2 asin(d_min / 2)
    delta = 2.0 * math.asin(d_min / 2.0) * (1.0 - 1e-9)
    return _cap_pieces(d - 1, theta, delta)


# ---------------------------------------------------------------------------
# point set files


def format_pointset(ps: PointSet) -> str:
    """Header ``d m`` then one vector per line, round-trip precision."""
    lines = [f"{ps.dim} {len(ps)}"]
    for row in ps.vectors:
        lines.append(" ".join(format(x, ".17g") for x in row))
    return "\n".join(lines) + "\n"


def save_pointset(ps: PointSet, path) -> None:
    Path(path).write_text(format_pointset(ps))


def load_pointset(path, name: str | None = None) -> PointSet:
    path = Path(path)
    try:
        lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    except OSError as exc:
        raise PointSetFormatError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise PointSetFormatError("empty point-set file")
    header = lines[0].split()
    if len(header) != 2:
        raise PointSetFormatError("header must be 'd m'")
    try:
        d, m = int(header[0]), int(header[1])
    except ValueError:
        raise PointSetFormatError("header must hold two integers") from None
    if d < 1 or m < 1:
        raise PointSetFormatError("dimension and count must be positive")
    if len(lines) - 1 != m:
        raise PointSetFormatError(f"header announces {m} rows, found {len(lines) - 1}")
    rows = []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        if len(parts) != d:
            raise PointSetFormatError(f"line {lineno}: expected {d} coordinates, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise PointSetFormatError(f"line {lineno}: non-numeric coordinate") from None
    v = np.array(rows)
    if not np.all(np.isfinite(v)):
        raise PointSetFormatError("non-finite coordinate")
    norms = np.linalg.norm(v, axis=1)
    off = np.abs(norms - 1.0)
    if np.any(off > LOAD_RENORM_TOL):
        bad = int(np.argmax(off))
        raise PointSetFormatError(f"row {bad + 1} has norm {norms[bad]!r}, not unit")
    needs = off > 0
    v[needs] /= norms[needs, None]
    return PointSet(v, name=name or path.stem)
