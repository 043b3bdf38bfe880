#!/usr/bin/env python3
"""Online learning curve of the flip-metric perturbation parameter.

Runs the learned flip decoder with training enabled and writes the
per-update theta / top-1 accuracy trajectory next to the FER summary.

Example:
    python3 scripts/train_theta.py --code 512,256 --crc-bits 24 \
        --ebno 2.0 --frames 200000 --updates 50 --out results/train
"""

import argparse
import sys

from polarflip.cli import parse_code
from polarflip.harness import (SimConfig, ThetaTrajectory, run_fer,
                               write_results, write_theta_trajectory)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--code", type=parse_code, required=True, metavar="N,K")
    p.add_argument("--crc-bits", type=int, default=24)
    p.add_argument("--list", type=int, default=4, dest="L")
    p.add_argument("--flips", type=int, default=50, dest="m")
    p.add_argument("--ebno", type=float, default=2.0)
    p.add_argument("--frames", type=int, default=200_000)
    p.add_argument("--updates", type=int, default=50)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--lr-shift", type=int, default=9)
    p.add_argument("--theta0", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output prefix; omit to print")
    args = p.parse_args(argv)

    N, K = args.code
    cfg = SimConfig(N=N, K=K, C=args.crc_bits, decoder="fast-sclf",
                    L=args.L, m=args.m, ebno_db=(args.ebno,),
                    max_frames=args.frames, max_errors=10**9,
                    seed=args.seed, train=True, train_cap=args.updates,
                    batch=args.batch, lr_shift=args.lr_shift,
                    theta0=args.theta0, chunk=4096)
    traj = ThetaTrajectory()
    rows = run_fer(cfg, traj)
    row = rows[0]
    print(f"theta: {traj.rows[0][1] if traj.rows else row.theta:.4f} "
          f"(first update) -> {row.theta:.4f} after {len(traj.rows)} "
          f"updates; top-1 accuracy {row.train_acc:.3f}; "
          f"FER {row.fer:.3e} over {row.frames} frames")
    if args.out:
        write_results(f"{args.out}.fer.csv", rows)
        write_theta_trajectory(f"{args.out}.theta.csv", traj)
        print(f"wrote {args.out}.fer.csv and {args.out}.theta.csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
