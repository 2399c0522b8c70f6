"""Sweep alpha in the vacant regime and write mean arc-set dimension against 1 - alpha.

Writes a CSV (alpha, lambda, depth, survival, dimension_mean, dimension_stderr,
target); plotting is left to whatever tool reads it.

    python3 scripts/plot_dimension_vs_alpha.py --alphas 0.2 0.3 0.5 0.7 --depth 10 --survivors 200
"""

import argparse
import csv
import math
import sys

from hypvis.config import ExperimentConfig
from hypvis.harness import exp_visibility_dim


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--alphas", type=float, nargs="+", default=[0.2, 0.3, 0.5, 0.7])
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--depth", type=float, default=10.0)
    p.add_argument("--survivors", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="-")
    args = p.parse_args()

    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["alpha", "lambda", "depth", "survival", "dimension_mean", "dimension_stderr", "target"])
    for alpha in args.alphas:
        cfg = ExperimentConfig()
        cfg.model.lam = alpha / (2 * math.sinh(args.radius))
        cfg.model.radius.params = [args.radius]
        cfg.probe.depths = [args.depth]
        cfg.mc.replicates = max(100, args.survivors)
        cfg.mc.survivors = args.survivors
        cfg.mc.max_replicates = 200 * args.survivors
        cfg.mc.batch_size = 50
        cfg.mc.seed, cfg.mc.workers = args.seed, args.workers
        row = exp_visibility_dim(cfg).rows[0]
        w.writerow([alpha, cfg.model.lam, args.depth, row["survival"], row["dimension_mean"],
                    row["dimension_stderr"], 1 - alpha])
        fh.flush()


if __name__ == "__main__":
    main()
