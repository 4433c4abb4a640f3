"""Command-line entry point.

    sphmc lattice-build  --family e8 --out e8.pts
    sphmc lattice-verify --lattice e8
    sphmc estimate --region O1 --cov identity --dim 3 --estimator crude --samples 100000 --seed 1
    sphmc bench --config configs/grid_full.cfg --out grid.csv
    sphmc cap-test --family e8 --theta pi/12 --samples 100000 --seed 1

Exit status: 0 success, 1 usage error, 2 numerical or integrity failure.
Results go to standard output; warnings and timings to standard error.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
import threading
import time
from dataclasses import replace

import numpy as np

from . import bench
from .estimators import CLI_NAMES, Problem, canonical_kind, estimate_g_sphere_region, run_estimator
from .lattices import (FAMILIES, FIXED_DIM, KISSING_SETS, IntegrityError, PointSetFormatError,
                       build_pointset, cap_decomposition_count, expected_cardinality, format_pointset,
                       leech_monomial_sample, load_pointset, save_pointset, variance_upper_bound,
                       verify_t_design)
from .linalg import CovarianceModel, ParameterError
from .randsrc import RandomStream
from .regions import UnsupportedRegionError, parse_region
from .specfun import cap_measure

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
T_DESIGN_TOL = 1e-10


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _num(x: float) -> str:
    return repr(float(x))


def parse_angle(text: str) -> float:
    """Radians as a number, ``pi``, ``pi/12``, ``2pi/3`` or ``15deg``."""
    t = text.strip().lower().replace(" ", "")
    if t.endswith("deg"):
        return math.radians(parse_angle(t[:-3]))
    m = re.fullmatch(r"(\d*\.?\d*)\*?pi(?:/(\d*\.?\d+))?", t)
    if m:
        coef = float(m.group(1)) if m.group(1) else 1.0
        return coef * math.pi / (float(m.group(2)) if m.group(2) else 1.0)
    try:
        return float(t)
    except ValueError:
        raise UsageError(f"cannot parse angle {text!r}") from None


def _pointset(spec: str, dim: int | None):
    if spec in FAMILIES:
        d = FIXED_DIM.get(spec, dim)
        if d is None:
            raise UsageError(f"--dim is required for family {spec}")
        if dim is not None and dim != d:
            raise UsageError(f"family {spec} has dimension {d}, not {dim}")
        return build_pointset(spec, d)
    if not os.path.exists(spec):
        raise UsageError(f"{spec!r} is neither a lattice family nor a point-set file")
    ps = load_pointset(spec)
    if dim is not None and ps.dim != dim:
        raise UsageError(f"point set has dimension {ps.dim}, not {dim}")
    return ps


def _write(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------


def cmd_lattice_build(args) -> int:
    ps = _pointset(args.family, args.dim)
    if args.out:
        save_pointset(ps, args.out)
        print(f"wrote {ps.name}: {len(ps)} vectors in dimension {ps.dim} to {args.out}")
    else:
        sys.stdout.write(format_pointset(ps))
    return EXIT_OK


def cmd_lattice_verify(args) -> int:
    ps = _pointset(args.lattice, args.dim)
    d = ps.dim
    ok = True
    print(f"name={ps.name}")
    print(f"dim={d}")
    print(f"cardinality={len(ps)}")
    expected = None
    if args.lattice in FAMILIES:
        expected = expected_cardinality(args.lattice, d)
    elif d in KISSING_SETS:
        expected = KISSING_SETS[d][1]
    if expected is not None:
        good = len(ps) == expected
        ok &= good
        print(f"cardinality_expected={expected} {'pass' if good else 'FAIL'}")
    dmin = ps.d_min
    print(f"d_min={_num(dmin)}")
    sym = ps.centrally_symmetric
    ok &= sym
    print(f"centrally_symmetric={'pass' if sym else 'FAIL'}")
    t = args.t
    if t is None and d in KISSING_SETS and len(ps) == KISSING_SETS[d][1]:
        t = KISSING_SETS[d][2]
    if t is not None:
        monos = leech_monomial_sample(t) if d == 24 and not args.all_monomials else None
        dev = verify_t_design(ps, t, monomials=monos)
        good = dev <= T_DESIGN_TOL
        ok &= good
        scope = "sampled monomials" if monos is not None else "all monomials"
        print(f"t_design t={t} max_deviation={_num(dev)} ({scope}) {'pass' if good else 'FAIL'}")
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_estimate(args) -> int:
    kind = canonical_kind(args.estimator)
    region = parse_region(args.region, args.dim)
    d = region.dim
    problem = Problem.standard(region, CovarianceModel.parse(args.cov))
    ps = None
    if kind.startswith("spherical"):
        ps = _pointset(args.lattice or bench.default_lattice(d), d)
    res = run_estimator(kind, problem, args.samples, RandomStream(args.seed), ps,
                        workers=args.threads)
    print(f"estimator={kind}")
    print(f"region={args.region}")
    print(f"covariance={problem_label(args.cov)}")
    print(f"dim={d}")
    if ps is not None:
        print(f"point_set={ps.name} ({len(ps)} vectors)")
    print(f"estimate={_num(res.estimate)}")
    print(f"std_error={_num(res.std_error)}")
    print(f"sample_variance={_num(res.sample_variance)}")
    print(f"replicates={res.replicates}")
    print(f"cost_per_replicate={res.cost_per_replicate}")
    if not res.cost_counts_chi_cdf:
        print("cost_note=chi-CDF evaluations are not counted")
    if kind.startswith("spherical"):
        print(f"rotation_normals_drawn={d * d} (cost counts {(d + 2) * (d - 1) // 2})")
    print(f"zero_variance={res.zero_variance}")
    print(f"seed={args.seed}")
    print(f"wall_time={res.wall_time:.3f}s", file=sys.stderr)
    return EXIT_OK


def problem_label(text: str) -> str:
    return CovarianceModel.parse(text).label


def cmd_bench(args) -> int:
    cfg = bench.load_config(args.config) if args.config else bench.GridConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.macro is not None:
        overrides["macro_replications"] = args.macro
    if args.samples is not None:
        overrides["M"] = args.samples
    if overrides:
        cfg = replace(cfg, **overrides)
    fmt = args.format or cfg.format
    out = args.out or cfg.out
    total = len(cfg.dims) * len(cfg.covariances) * len(cfg.regions) * cfg.macro_replications
    done = [0]
    lock = threading.Lock()

    def progress(_rows):
        with lock:
            done[0] += 1
            if not args.quiet and (done[0] % 10 == 0 or done[0] == total):
                print(f"cells {done[0]}/{total}", file=sys.stderr)

    t0 = time.perf_counter()
    rows = bench.run_grid(cfg, workers=args.threads, progress=progress)
    failed = sum(1 for r in rows if r.error)
    if fmt == "csv":
        text = bench.emit(rows, "csv")
    else:
        text = bench.emit_table(bench.aggregate(rows), "markdown")
    _write(text, out)
    print(f"{len(rows)} rows, {failed} failed, {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    return EXIT_OK


def cmd_cap_test(args) -> int:
    ps = _pointset(args.lattice or args.family, args.dim)
    d = ps.dim
    theta = parse_angle(args.theta)
    if not 0 < theta <= math.pi:
        raise UsageError("theta must lie in (0, pi]")
    axis = np.zeros(d)
    axis[0] = 1.0
    res = estimate_g_sphere_region(ps, axis, theta, args.samples, RandomStream(args.seed),
                                   workers=args.threads)
    pi_a = cap_measure(theta, d) if d >= 2 else 0.5
    var = res.sample_variance
    se = res.variance_std_error()
    diameter = 2 * math.sin(theta) if theta <= math.pi / 2 else 2.0
    dmin = ps.d_min
    print(f"point_set={ps.name} ({len(ps)} vectors, d_min={_num(dmin)})")
    print(f"theta={_num(theta)}")
    print(f"cap_measure={_num(pi_a)}")
    print(f"estimate={_num(res.estimate)}")
    print(f"empirical_variance={_num(var)}")
    print(f"variance_std_error={_num(se)}")
    if diameter < dmin:
        exact = pi_a / len(ps) - pi_a ** 2
        passed = abs(var - exact) <= 3 * se
        print("regime=single-point")
        print(f"exact_variance={_num(exact)}")
    else:
        print(f"warning: cap diameter {diameter:.6g} >= d_min {dmin:.6g}; "
              "checking the decomposition bound instead", file=sys.stderr)
        n = args.pieces if args.pieces is not None else cap_decomposition_count(theta, d, dmin)
        bound = variance_upper_bound(pi_a, n, len(ps))
        passed = var <= bound + 3 * se
        print("regime=decomposition")
        print(f"pieces={n}")
        print(f"variance_bound={_num(bound)}")
    print(f"result={'pass' if passed else 'fail'}")
    return EXIT_OK if passed else EXIT_NUMERIC


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    threads = os.cpu_count() or 1
    p = _Parser(prog="sphmc", description="Spherical Monte Carlo for multivariate normal probabilities.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    b = sub.add_parser("lattice-build", help="build a shortest-vector point set and write it out")
    b.add_argument("--family", required=True, choices=FAMILIES, help="lattice family")
    b.add_argument("--dim", type=int, help="dimension (required for zd, ad, dd)")
    b.add_argument("--out", help="output file (default: standard output)")
    b.set_defaults(func=cmd_lattice_build)

    v = sub.add_parser("lattice-verify", help="check cardinality, d_min, symmetry and t-design strength")
    v.add_argument("--lattice", "--in", dest="lattice", required=True,
                   help="lattice family or point-set file")
    v.add_argument("--dim", type=int, help="dimension (required for zd, ad, dd)")
    v.add_argument("--t", type=int, help="design strength to test (default: tabulated value)")
    v.add_argument("--all-monomials", action="store_true",
                   help="in dimension 24, test every monomial instead of the fixed sample")
    v.set_defaults(func=cmd_lattice_verify)

    e = sub.add_parser("estimate", help="estimate one probability P{X in A}")
    e.add_argument("--region", required=True,
                   help="label (E1..E3, O1..O3, R1..R3, S) or box:/ell:/union: spec")
    e.add_argument("--cov", default="identity", help="identity, one-factor:RHO or ar1:RHO")
    e.add_argument("--dim", type=int, help="dimension (required for labelled regions)")
    e.add_argument("--estimator", required=True, choices=sorted(CLI_NAMES), help="estimator")
    e.add_argument("--lattice", help="family or point-set file for the spherical estimators")
    e.add_argument("--samples", type=int, default=10_000, help="replicates M")
    e.add_argument("--seed", type=int, default=0, help="experiment seed")
    e.add_argument("--threads", type=int, default=threads, help="worker threads")
    e.set_defaults(func=cmd_estimate)

    g = sub.add_parser("bench", help="run a benchmark grid")
    g.add_argument("--config", help="key-value grid config (default: the full grid)")
    g.add_argument("--out", help="output file (default: config value or standard output)")
    g.add_argument("--format", choices=("csv", "md"),
                   help="csv: one row per cell; md: averaged table")
    g.add_argument("--samples", type=int, help="override M")
    g.add_argument("--macro", type=int, help="override macro replications")
    g.add_argument("--seed", type=int, help="override seed")
    g.add_argument("--threads", type=int, default=threads, help="worker threads")
    g.add_argument("--quiet", action="store_true", help="no progress on standard error")
    g.set_defaults(func=cmd_bench)

    c = sub.add_parser("cap-test", help="compare Var(g) for a spherical cap with its exact value or bound")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--family", choices=FAMILIES, help="lattice family")
    src.add_argument("--lattice", help="point-set file")
    c.add_argument("--dim", type=int, help="dimension (required for zd, ad, dd)")
    c.add_argument("--theta", required=True, help="cap angle: radians, pi/12, 15deg")
    c.add_argument("--pieces", type=int,
                   help="piece count N for the bound (default: explicit band decomposition)")
    c.add_argument("--samples", type=int, default=100_000, help="rotations M")
    c.add_argument("--seed", type=int, default=0, help="experiment seed")
    c.add_argument("--threads", type=int, default=threads, help="worker threads")
    c.set_defaults(func=cmd_cap_test)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if len(argv) >= 2 and argv[0] == "lattice" and argv[1] in ("build", "verify"):
        argv = [f"lattice-{argv[1]}"] + argv[2:]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "threads", 1) < 1:
        print("sphmc: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ParameterError, UnsupportedRegionError, FileNotFoundError) as exc:
        print(f"sphmc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IntegrityError, PointSetFormatError, ArithmeticError) as exc:
        print(f"sphmc: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
