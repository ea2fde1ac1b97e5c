#!/usr/bin/env python3
"""End-to-end policy comparison on a synthetic clustered instance.

Generates the instance, runs the requested policies over a seed batch,
writes the usual run artifacts (curves.csv, auc.csv, yardstick.csv,
stats.csv, manifest.txt) and prints the report summary.

Example:
    python scripts/compare_policies.py --n 400 --c-b 20 --c-g 22 \\
        --policies uromm,oomm,ismile --t-factor 2.0 --seeds 5 --out runs/s2022
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from matchlab.cli import ExperimentConfig, cmd_run
from matchlab.cli import main as cli_main


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=400)
    ap.add_argument("--c-b", type=int, default=20)
    ap.add_argument("--c-g", type=int, default=22)
    ap.add_argument("--flip", type=float, default=None, help="default 1/(2 ln n)")
    ap.add_argument("--policies", default="uromm,oomm,ismile")
    ap.add_argument("--t-factor", type=float, default=2.0, help="T = t_factor * n^2")
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--instance-seed", type=int, default=0)
    ap.add_argument("--curve-stride", type=int, default=100)
    ap.add_argument("--out", default="runs/compare")
    return ap.parse_args()


def main():
    args = parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    instance = out / "instance.txt"

    gen_cmd = [
        "gen", "clustered", "--n", str(args.n), "--c-b", str(args.c_b),
        "--c-g", str(args.c_g), "--seed", str(args.instance_seed),
        "--out", str(instance),
    ]
    if args.flip is not None:
        gen_cmd += ["--flip", str(args.flip)]
    rc = cli_main(gen_cmd)
    if rc != 0:
        return rc

    config = ExperimentConfig(
        instance=instance,
        policies=[p.strip() for p in args.policies.split(",") if p.strip()],
        T=int(args.t_factor * args.n * args.n),
        seeds=list(range(args.seeds)),
        out=out,
        curve_stride=args.curve_stride,
    )
    rc = cmd_run(config)
    if rc != 0:
        return rc
    return cli_main(["report", str(out)])


if __name__ == "__main__":
    sys.exit(main())
