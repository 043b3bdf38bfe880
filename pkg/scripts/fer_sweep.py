#!/usr/bin/env python3
"""Frame-error-rate sweep for several decoders over an Eb/N0 range.

Writes one CSV per decoder (suffix = decoder name) or prints to stdout.

Example:
    python3 scripts/fer_sweep.py --code 512,256 --crc-bits 24 \
        --decoders scl,fscl,fast-sclf --list 4 --flips 50 \
        --ebno 2.0:3.0:0.25 --max-errors 400 --out results/fer
"""

import argparse
import sys

from polarflip.cli import parse_code, parse_ebno
from polarflip.harness import (FLIP_DECODERS, RESULT_FIELDS, SimConfig,
                               run_fer, write_results)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--code", type=parse_code, required=True, metavar="N,K")
    p.add_argument("--crc-bits", type=int, default=24)
    p.add_argument("--decoders", default="scl,fast-sclf",
                   help="comma-separated decoder names")
    p.add_argument("--list", type=int, default=4, dest="L")
    p.add_argument("--flips", type=int, default=50, dest="m")
    p.add_argument("--theta", type=float, default=0.45)
    p.add_argument("--ebno", type=parse_ebno, default=(2.0,))
    p.add_argument("--frames", type=int, default=100_000)
    p.add_argument("--max-errors", type=int, default=400)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output prefix; omit to print")
    args = p.parse_args(argv)

    N, K = args.code
    for dec in args.decoders.split(","):
        dec = dec.strip()
        flip = dec in FLIP_DECODERS
        cfg = SimConfig(N=N, K=K, C=args.crc_bits, decoder=dec,
                        L=1 if dec == "sc" else args.L,
                        m=args.m if flip else 0,
                        theta0=args.theta if flip else None,
                        ebno_db=args.ebno, max_frames=args.frames,
                        max_errors=args.max_errors, seed=args.seed,
                        chunk=4096)
        rows = run_fer(cfg)
        if args.out:
            path = f"{args.out}.{dec}.csv"
            write_results(path, rows)
            print(f"{dec}: wrote {len(rows)} points to {path}")
        else:
            print(",".join(RESULT_FIELDS))
            for r in rows:
                print(",".join(str(getattr(r, k)) for k in RESULT_FIELDS))
    return 0


if __name__ == "__main__":
    sys.exit(main())
