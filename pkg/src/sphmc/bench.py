"""Benchmark grid: dimensions x covariances x regions x estimators.

Every cell (d, covariance, region, macro replicate) owns one random stream
keyed by its labels. All estimators of a cell, and the crude baseline that
their variance ratios are taken against, consume that same stream, so the
comparison is paired and a sub-grid reproduces the rows of the full grid.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .estimators import KINDS, SPHERICAL_KINDS, Problem, canonical_kind, run_estimator
from .lattices import FIXED_DIM, KISSING_SETS, PointSet, build_pointset, load_pointset
from .linalg import CovarianceModel, ParameterError
from .randsrc import RandomStream, stable_key
from .regions import (STANDARD_LABELS, UnsupportedRegionError, is_centrally_antisymmetric,
                      parse_region, region_type)

DEFAULT_DIMS = (2, 3, 4, 5, 6, 7, 8)
DEFAULT_RHOS = (-0.1, 0.1, 0.2, 0.3)
DEFAULT_COVARIANCES = (CovarianceModel(),) + tuple(
    CovarianceModel(kind, rho) for kind in ("one_factor", "ar1") for rho in DEFAULT_RHOS)
DEFAULT_REGIONS = tuple(label for label in STANDARD_LABELS if label != "S")
ANTISYMMETRIC_REGIONS = ("R2", "O1", "O3", "E2")


def default_lattice(d: int) -> str:
    """Maximal-kissing family for the tabulated dimensions, D_d otherwise."""
    if d in KISSING_SETS:
        return KISSING_SETS[d][0]
    return "dd" if d >= 3 else "ad"


@dataclass(frozen=True)
class GridConfig:
    dims: tuple[int, ...] = DEFAULT_DIMS
    estimators: tuple[str, ...] = KINDS
    covariances: tuple[CovarianceModel, ...] = DEFAULT_COVARIANCES
    regions: tuple[str, ...] = DEFAULT_REGIONS
    M: int = 10_000
    macro_replications: int = 1
    seed: int = 20240101
    # d -> lattice families or point-set files; unlisted d use default_lattice
    lattices: dict = field(default_factory=dict, compare=False)
    format: str = "csv"
    out: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "estimators", tuple(canonical_kind(k) for k in self.estimators))
        object.__setattr__(self, "regions", tuple(self.regions))
        object.__setattr__(self, "lattices",
                           {int(d): tuple(v) for d, v in dict(self.lattices).items()})
        if self.M < 2:
            raise ParameterError("M must be >= 2")
        if self.macro_replications < 1:
            raise ParameterError("macro_replications must be >= 1")
        if not (self.dims and self.estimators and self.covariances and self.regions):
            raise ParameterError("dims, estimators, covariances and regions must be non-empty")
        if self.format not in ("csv", "markdown", "md"):
            raise ParameterError(f"unknown format {self.format!r}")
        for d in self.dims:
            if d < 1:
                raise ParameterError("dimensions must be positive")
            for label in self.regions:
                parse_region(label, d)

    def lattices_for(self, d: int) -> tuple[str, ...]:
        return self.lattices.get(d, (default_lattice(d),))

    @property
    def n_cells(self) -> int:
        per_lattice = sum(1 for k in self.estimators if k in SPHERICAL_KINDS)
        plain = len(self.estimators) - per_lattice
        per_dim = [plain + per_lattice * len(self.lattices_for(d)) for d in self.dims]
        return sum(per_dim) * len(self.covariances) * len(self.regions) * self.macro_replications


def _split(value: str) -> list[str]:
    return [part.strip() for part in value.replace(";", ",").split(",") if part.strip()]


def parse_config(text: str) -> GridConfig:
    """Read ``key = value`` lines. Lists are comma separated; ``lattice.<d>``
    selects the families (or point-set files) used at dimension d."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[grid]\n" + text)
    except configparser.Error as exc:
        raise ParameterError(f"bad config: {exc}") from None
    kw: dict = {}
    lattices = {}
    for key, value in parser["grid"].items():
        try:
            if key == "dims":
                kw["dims"] = tuple(int(x) for x in _split(value))
            elif key == "estimators":
                kw["estimators"] = tuple(_split(value))
            elif key == "covariances":
                kw["covariances"] = tuple(CovarianceModel.parse(x) for x in _split(value))
            elif key == "regions":
                kw["regions"] = tuple(_split(value))
            elif key in ("M", "samples"):
                kw["M"] = int(float(value))
            elif key in ("macro_replications", "macro"):
                kw["macro_replications"] = int(value)
            elif key == "seed":
                kw["seed"] = int(value)
            elif key.startswith("lattice."):
                lattices[int(key.split(".", 1)[1])] = tuple(_split(value))
            elif key in ("format", "out"):
                kw[key] = value.strip()
            else:
                raise ParameterError(f"unknown config key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ParameterError):
                raise
            raise ParameterError(f"bad value for {key!r}: {value!r}") from None
    return GridConfig(lattices=lattices, **kw)


def load_config(path) -> GridConfig:
    return parse_config(Path(path).read_text())


def resolve_lattice(spec: str, d: int) -> PointSet:
    """Family name (built for dimension d) or path to a point-set file."""
    if spec in FIXED_DIM or spec in ("zd", "ad", "dd"):
        return build_pointset(spec, d)
    ps = load_pointset(spec)
    if ps.dim != d:
        raise ParameterError(f"point set {spec!r} has dimension {ps.dim}, expected {d}")
    return ps


# ---------------------------------------------------------------------------


@dataclass
class BenchRow:
    d: int
    covariance: str
    region: str
    region_type: str
    estimator: str
    lattice: str
    macro: int
    M: int
    estimate: float = math.nan
    variance: float = math.nan
    crude_variance: float = math.nan
    vr: float = math.nan
    pvr: float = math.nan
    cost: int = 0
    antisymmetric: str = ""
    zero_variance: bool = False
    baseline_zero: bool = False
    error: str = ""
    wall_time: float = field(default=0.0, compare=False)


# wall time varies run to run, so it stays out of the deterministic CSV
CSV_COLUMNS = tuple(f.name for f in fields(BenchRow) if f.name != "wall_time")


def cell_stream(cfg: GridConfig, d: int, cov: CovarianceModel, region: str, macro: int) -> RandomStream:
    return RandomStream(cfg.seed, (stable_key(f"d={d}|cov={cov.label}|region={region}"), macro))


def _antisymmetry_flag(region) -> str:
    try:
        return "yes" if is_centrally_antisymmetric(region) else "no"
    except UnsupportedRegionError:
        return ""


def run_cell(cfg: GridConfig, d: int, cov: CovarianceModel, label: str, macro: int) -> list[BenchRow]:
    """All estimator rows of one cell, paired with one crude baseline."""
    def row(kind, lattice=""):
        return BenchRow(d=d, covariance=cov.label, region=label, region_type=region_type(label),
                        estimator=kind, lattice=lattice, macro=macro, M=cfg.M)

    jobs = []
    for kind in cfg.estimators:
        if kind in SPHERICAL_KINDS:
            jobs += [(kind, lat) for lat in cfg.lattices_for(d)]
        else:
            jobs.append((kind, ""))
    try:
        region = parse_region(label, d)
        problem = Problem.standard(region, cov)
        baseline = run_estimator("crude", problem, cfg.M, cell_stream(cfg, d, cov, label, macro))
    except Exception as exc:  # recorded in every row of the cell
        out = [row(kind, lat) for kind, lat in jobs]
        for r in out:
            r.error = f"{type(exc).__name__}: {exc}"
        return out
    flag = _antisymmetry_flag(region)
    out = []
    for kind, lat in jobs:
        r = row(kind, lat)
        r.antisymmetric = flag
        r.crude_variance = baseline.sample_variance
        r.baseline_zero = baseline.sample_variance == 0.0
        try:
            if kind == "crude":
                res = baseline
            else:
                ps = resolve_lattice(lat, d) if lat else None
                res = run_estimator(kind, problem, cfg.M, cell_stream(cfg, d, cov, label, macro), ps)
        except Exception as exc:
            r.error = f"{type(exc).__name__}: {exc}"
            out.append(r)
            continue
        r.estimate = res.estimate
        r.variance = res.sample_variance
        r.cost = res.cost_per_replicate
        r.zero_variance = res.zero_variance
        r.wall_time = res.wall_time
        if not r.baseline_zero:
            base = baseline.sample_variance
            r.vr = math.inf if res.zero_variance else base / res.sample_variance
            if res.cost_counts_chi_cdf:
                r.pvr = (math.inf if res.zero_variance
                         else base * baseline.cost_per_replicate / (res.sample_variance * res.cost_per_replicate))
        out.append(r)
    return out


def run_grid(cfg: GridConfig, *, workers: int = 1, progress=None) -> list[BenchRow]:
    """Rows ordered by (d, covariance, region, macro), then estimator and lattice.

    ``progress``, if given, is called with each finished cell's rows.
    """
    cells = [(d, cov, label, macro)
             for d in cfg.dims for cov in cfg.covariances
             for label in cfg.regions for macro in range(cfg.macro_replications)]
    for d in cfg.dims:  # build point sets once, outside the pool
        for kind in cfg.estimators:
            if kind in SPHERICAL_KINDS:
                for lat in cfg.lattices_for(d):
                    resolve_lattice(lat, d)

    def task(cell):
        rows = run_cell(cfg, *cell)
        if progress is not None:
            progress(rows)
        return rows

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(task, cells))
    else:
        parts = [task(c) for c in cells]
    return [r for part in parts for r in part]


# ---------------------------------------------------------------------------


@dataclass
class AggregateRow:
    key: dict
    vr: float
    vr_se: float
    pvr: float
    pvr_se: float
    cells: int
    macro_replications: int
    excluded: int


def _mean_se(values):
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return math.nan, math.nan
    mean = float(v.mean())
    if v.size < 2 or not np.all(np.isfinite(v)):
        return mean, math.nan
    return mean, float(v.std(ddof=1) / math.sqrt(v.size))


def aggregate(rows, group_by=("region_type", "d", "estimator"), *, regions=None) -> list[AggregateRow]:
    """Mean VR and PVR per group, with a standard error over macro replicates.

    Within each macro replicate the cells of a group are averaged; the mean and
    standard error are then taken across replicates. Cells whose crude baseline
    has zero variance (or that failed) have no VR and are left out of the
    average; ``excluded`` counts them.
    """
    rows = [r for r in rows if regions is None or r.region in regions]
    if not rows:
        raise ParameterError("no rows to aggregate")
    groups: dict = {}
    for r in rows:
        key = tuple(getattr(r, g) for g in group_by)
        groups.setdefault(key, []).append(r)
    out = []
    for key in sorted(groups, key=lambda k: tuple((str(type(x)), x) for x in k)):
        members = groups[key]
        usable = [r for r in members if not math.isnan(r.vr)]
        if not usable:
            warnings.warn(f"group {dict(zip(group_by, key))} has no usable rows; omitted")
            continue
        by_macro: dict = {}
        for r in usable:
            by_macro.setdefault(r.macro, []).append(r)
        vr_means = [np.mean([r.vr for r in rs]) for _, rs in sorted(by_macro.items())]
        pvr_vals = [[r.pvr for r in rs] for _, rs in sorted(by_macro.items())]
        pvr_means = [np.mean(p) for p in pvr_vals if not any(math.isnan(x) for x in p)]
        vr, vr_se = _mean_se(vr_means)
        pvr, pvr_se = _mean_se(pvr_means)
        out.append(AggregateRow(dict(zip(group_by, key)), vr, vr_se, pvr, pvr_se,
                                cells=len(usable), macro_replications=len(by_macro),
                                excluded=len(members) - len(usable)))
    return out


def find_aggregate(aggs, **key) -> AggregateRow:
    for a in aggs:
        if all(a.key.get(k) == v for k, v in key.items()):
            return a
    raise KeyError(key)


# ---------------------------------------------------------------------------


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return format(v, ".17g")
    return str(v)


def emit(rows, fmt: str = "csv") -> str:
    """Raw rows as CSV (17 significant digits) or a markdown table."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow([_format_value(getattr(r, c)) for c in CSV_COLUMNS])
        return buf.getvalue()
    if fmt in ("markdown", "md"):
        lines = ["| " + " | ".join(CSV_COLUMNS) + " |",
                 "|" + "---|" * len(CSV_COLUMNS)]
        for r in rows:
            lines.append("| " + " | ".join(_format_value(getattr(r, c)) for c in CSV_COLUMNS) + " |")
        return "\n".join(lines) + "\n"
    raise ParameterError(f"unknown format {fmt!r}")


def parse_csv(text: str) -> list[BenchRow]:
    types = {f.name: f.type for f in fields(BenchRow)}
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        kw = {}
        for name, raw in rec.items():
            t = types[name]
            if t == "int":
                kw[name] = int(raw)
            elif t == "float":
                kw[name] = float(raw) if raw else math.nan
            elif t == "bool":
                kw[name] = raw == "1"
            else:
                kw[name] = raw
        out.append(BenchRow(**kw))
    return out


_SHORT = {"crude": "crude", "crude_at": "p_AT", "spherical": "p^V",
          "spherical_at": "p^V_AT", "spherical_star": "p^V_*"}


def _cell(value, se, fmt) -> str:
    if math.isnan(value):
        return ""
    text = f"{value:.2f}"
    if not math.isnan(se):
        text += f" ± {se:.2f}"
    return text


def emit_table(aggs, fmt: str = "markdown", *, row_keys=("d", "region_type")) -> str:
    """Aggregates laid out with one line per ``row_keys`` value, VR columns
    for each estimator, then PVR columns (none for the star estimator)."""
    estimators = [k for k in KINDS if any(a.key.get("estimator") == k for a in aggs)]
    estimators = [k for k in estimators if k != "crude"]
    pvr_estimators = [k for k in estimators if k != "spherical_star"]
    lines = {}
    for a in aggs:
        lines.setdefault(tuple(a.key.get(k) for k in row_keys), {})[a.key.get("estimator")] = a
    header = list(row_keys) + [f"VR {_SHORT[k]}" for k in estimators] \
        + [f"PVR {_SHORT[k]}" for k in pvr_estimators]
    body = []
    for key in sorted(lines, key=lambda k: tuple(str(x).zfill(4) for x in k)):
        got = lines[key]
        vals = [str(x) for x in key]
        vals += [_cell(got[k].vr, got[k].vr_se, fmt) if k in got else "" for k in estimators]
        vals += [_cell(got[k].pvr, got[k].pvr_se, fmt) if k in got else "" for k in pvr_estimators]
        body.append(vals)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(body)
        return buf.getvalue()
    out = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    out += ["| " + " | ".join(v) + " |" for v in body]
    return "\n".join(out) + "\n"

