#!/usr/bin/env python3
"""Decoder memory footprint in KBits as a function of list size.

Example:
    python3 scripts/memory_table.py --code 512,256 --crc-bits 24
"""

import argparse
import sys

from polarflip.cli import parse_code
from polarflip.instrument import kbits, memory_model

KINDS = ("fscl", "sclf", "ssclf", "fast-sclf")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--code", type=parse_code, required=True, metavar="N,K")
    p.add_argument("--crc-bits", type=int, default=24)
    p.add_argument("--lists", default="2,4,8,16,32")
    p.add_argument("--float-bits", type=int, default=32)
    p.add_argument("--order-bits", type=int, default=1,
                   help="bits per stored flip-order entry (fast-sclf)")
    args = p.parse_args(argv)

    N, K = args.code
    Ls = [int(v) for v in args.lists.split(",")]
    print(f"P({N},{K}) C{args.crc_bits}, b_f={args.float_bits} (KBits)")
    print(f"{'':>10} " + " ".join(f"L={L:<5}" for L in Ls))
    for kind in KINDS:
        extra = {"o_bits": args.order_bits} if kind == "fast-sclf" else {}
        row = [kbits(memory_model(kind, N, K, args.crc_bits, L,
                                  b_f=args.float_bits, **extra))
               for L in Ls]
        print(f"{kind:>10} " + " ".join(f"{v:<7.1f}" for v in row))
    return 0


if __name__ == "__main__":
    sys.exit(main())
