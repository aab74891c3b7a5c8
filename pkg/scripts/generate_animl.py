"""Write a synthetic AnIML document with n chained steps.

    python3 scripts/generate_animl.py --steps 20 --payload-mb 5 -o big.animl
"""

from __future__ import annotations

import argparse
import sys

from animl_kg.synth import SynthConfig, write_animl, write_animl_file


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=3)
    ap.add_argument("--samples", type=int, default=None, help="defaults to one per step")
    ap.add_argument("--payload-mb", type=float, default=0.0, help="base64 payload on step 1")
    ap.add_argument("--no-references", action="store_true")
    ap.add_argument("-o", "--output", help="output file (stdout if omitted)")
    args = ap.parse_args(argv)
    if args.steps < 1:
        ap.error("--steps must be at least 1")

    cfg = SynthConfig(n_steps=args.steps, n_samples=args.samples,
                      payload_bytes=int(args.payload_mb * 1_000_000),
                      with_references=not args.no_references)
    if args.output:
        write_animl_file(args.output, cfg)
    else:
        write_animl(sys.stdout.buffer, cfg)
    return 0


if __name__ == "__main__":
    sys.exit(main())
