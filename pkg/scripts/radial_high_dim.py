"""VR of the closed-form radial estimator on O2 in dimension 16 (and 24) for several point sets.

    python scripts/radial_high_dim.py --out-dir results/ [--leech]
"""

import argparse
from pathlib import Path

from sphmc import bench


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="configs/radial_dim16.cfg")
    ap.add_argument("--leech", action="store_true", help="also run configs/radial_leech.cfg")
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    configs = [args.config] + (["configs/radial_leech.cfg"] if args.leech else [])
    rows = []
    for path in configs:
        rows += bench.run_grid(bench.load_config(path), workers=args.threads)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "radial_rows.csv").write_text(bench.emit(rows, "csv"))
    aggs = bench.aggregate(rows, group_by=("d", "lattice", "estimator"))
    text = bench.emit_table(aggs, "markdown", row_keys=("d", "lattice"))
    (out / "radial.md").write_text(text)
    print(text)


if __name__ == "__main__":
    main()
