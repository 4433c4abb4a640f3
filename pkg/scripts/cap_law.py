"""Variance of the rotated-point-set cap estimator against the exact law and the piece-count bound.

    python scripts/cap_law.py --samples 100000
"""

import argparse
import math

import numpy as np

from sphmc.estimators import estimate_g_sphere_region
from sphmc.lattices import KISSING_SETS, build_pointset, cap_decomposition_count, variance_upper_bound
from sphmc.randsrc import RandomStream
from sphmc.specfun import cap_measure


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    thetas = [math.pi / 12, math.pi / 8, math.pi / 6, math.pi / 4, math.pi / 3]
    print("| set | theta | pi(A) | Var(g) | se | exact | bound (N) | ok |")
    print("|---|---|---|---|---|---|---|---|")
    for d in range(2, 9):
        ps = build_pointset(KISSING_SETS[d][0], d)
        axis = np.eye(d)[0]
        for theta in thetas:
            s = RandomStream(args.seed, (d, round(theta * 1e6)))
            res = estimate_g_sphere_region(ps, axis, theta, args.samples, s)
            pi_a = cap_measure(theta, d)
            var, se = res.sample_variance, res.variance_std_error()
            n = cap_decomposition_count(theta, d, ps.d_min)
            bound = variance_upper_bound(pi_a, n, len(ps))
            if 2 * math.sin(theta) < ps.d_min:
                exact = pi_a / len(ps) - pi_a ** 2
                ok = abs(var - exact) <= 3 * se
                exact_txt = f"{exact:.4g}"
            else:
                ok = var <= bound + 3 * se
                exact_txt = ""
            print(f"| {ps.name} | {theta:.4f} | {pi_a:.4g} | {var:.4g} | {se:.2g} | {exact_txt} "
                  f"| {bound:.4g} ({n}) | {'yes' if ok else 'NO'} |")


if __name__ == "__main__":
    main()
