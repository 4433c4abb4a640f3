"""VR/PVR of the spherical estimator with and without antithetic pairs on region S.

    python scripts/region_s.py --config configs/region_s.cfg --out-dir results/
"""

import argparse
from pathlib import Path

from sphmc import bench


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="configs/region_s.cfg")
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    cfg = bench.load_config(args.config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = bench.run_grid(cfg, workers=args.threads)
    (out / "region_s_rows.csv").write_text(bench.emit(rows, "csv"))
    aggs = bench.aggregate(rows, group_by=("d", "estimator"))
    text = bench.emit_table(aggs, "markdown", row_keys=("d",))
    (out / "region_s.md").write_text(text)
    print(text)


if __name__ == "__main__":
    main()
