#!/usr/bin/env python3
"""Average complexity / time-step / memory comparison at one Eb/N0 point.

Runs the flip decoders with a small list against the plain fast list
decoder with a large list and prints the summary table.

Example:
    python3 scripts/latency_table.py --code 512,256 --crc-bits 24 \
        --ebno 2.75 --frames 200000
"""

import argparse
import sys

from polarflip.cli import parse_code
from polarflip.harness import SimConfig, run_fer
from polarflip.instrument import kbits, memory_model


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--code", type=parse_code, required=True, metavar="N,K")
    p.add_argument("--crc-bits", type=int, default=24)
    p.add_argument("--list", type=int, default=4, dest="L")
    p.add_argument("--big-list", type=int, default=32)
    p.add_argument("--flips", type=int, default=50, dest="m")
    p.add_argument("--theta", type=float, default=0.45)
    p.add_argument("--ebno", type=float, default=2.75)
    p.add_argument("--frames", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    N, K = args.code
    setups = [
        ("fast-sclf", args.L, dict(m=args.m, theta0=args.theta)),
        ("sclf", args.L, dict(m=args.m, theta0=args.theta)),
        ("fscl", args.big_list, dict(chunk=1024)),
    ]
    print(f"P({N},{K}) C{args.crc_bits} @{args.ebno} dB, "
          f"{args.frames} frames")
    print(f"{'decoder':>12} {'L':>3} {'complexity':>12} {'steps':>9} "
          f"{'attempts':>9} {'KBits':>7} {'FER':>9}")
    for dec, L, extra in setups:
        kw = dict(chunk=4096)
        kw.update(extra)
        cfg = SimConfig(N=N, K=K, C=args.crc_bits, decoder=dec, L=L,
                        ebno_db=(args.ebno,), max_frames=args.frames,
                        max_errors=10**9, seed=args.seed, **kw)
        r = run_fer(cfg)[0]
        mem = kbits(memory_model(dec, N, K, args.crc_bits, L))
        print(f"{dec:>12} {L:>3} {r.avg_complexity:>12.3e} "
              f"{r.avg_timesteps:>9.1f} {r.avg_attempts:>9.3f} "
              f"{mem:>7.1f} {r.fer:>9.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
