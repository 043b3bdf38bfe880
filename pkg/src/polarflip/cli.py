"""Command-line front end for the simulation harness."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .harness import (DECODERS, RESULT_FIELDS, SimConfig, ThetaTrajectory,
                      run_fer, write_results, write_theta_trajectory)


def parse_code(text: str) -> tuple[int, int]:
    try:
        n, k = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected --code N,K")
    return n, k


def parse_ebno(text: str) -> tuple:
    """A single value or an inclusive A:B:STEP range in dB."""
    parts = text.split(":")
    try:
        vals = [float(v) for v in parts]
    except ValueError:
        raise argparse.ArgumentTypeError("expected --ebno A:B:STEP")
    if len(vals) == 1:
        return (vals[0],)
    if len(vals) != 3:
        raise argparse.ArgumentTypeError("expected --ebno A:B:STEP")
    a, b, step = vals
    if step <= 0 or b < a:
        raise argparse.ArgumentTypeError("need B >= A and STEP > 0")
    return tuple(np.arange(a, b + step / 2, step).round(10))


def build_parser() -> argparse.ArgumentParser:
    # allow_abbrev off so a mistyped flag fails loudly instead of
    # prefix-matching (e.g. --theta silently binding to --theta-out).
    p = argparse.ArgumentParser(
        prog="polarflip",
        description="Polar-code list decoding with learned bit flipping.",
        allow_abbrev=False)
    p.add_argument("--code", type=parse_code, required=True,
                   metavar="N,K", help="block length and payload size")
    p.add_argument("--crc-bits", type=int, default=24, metavar="C")
    p.add_argument("--reliability", metavar="FILE",
                   help="1-based reliability order, one index per line")
    p.add_argument("--decoder", choices=DECODERS, default="fast-sclf")
    p.add_argument("--list", type=int, default=1, dest="L", metavar="L")
    p.add_argument("--flips", type=int, default=0, dest="m", metavar="M")
    p.add_argument("--ebno", type=parse_ebno, default=(2.0,),
                   metavar="A:B:STEP")
    p.add_argument("--frames", type=int, default=100_000, metavar="MAX")
    p.add_argument("--max-errors", type=int, default=400, metavar="E")
    p.add_argument("--seed", type=int, default=0, metavar="S")
    p.add_argument("--train", choices=("on", "off"), default="off")
    p.add_argument("--train-cap", type=int, default=50)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--lr-shift", type=int, default=9)
    p.add_argument("--taylor", type=int, default=3)
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv",
                   dest="fmt")
    p.add_argument("--theta-out", metavar="PATH",
                   help="theta trajectory CSV (training runs)")
    return p


def config_from_args(args) -> SimConfig:
    n, k = args.code
    return SimConfig(
        N=n, K=k, C=args.crc_bits, decoder=args.decoder, L=args.L,
        m=args.m, ebno_db=args.ebno, max_frames=args.frames,
        max_errors=args.max_errors, seed=args.seed,
        reliability=args.reliability, train=args.train == "on",
        train_cap=args.train_cap, batch=args.batch,
        lr_shift=args.lr_shift, taylor=args.taylor,
        out=args.out, fmt=args.fmt)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        trajectory = ThetaTrajectory() if cfg.train else None
        rows = run_fer(cfg, trajectory=trajectory)
        if args.theta_out and trajectory is not None:
            write_theta_trajectory(args.theta_out, trajectory)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not cfg.out:
        print(",".join(RESULT_FIELDS))
        for r in rows:
            print(",".join(str(getattr(r, k)) for k in RESULT_FIELDS))
    return 0


if __name__ == "__main__":
    sys.exit(main())
