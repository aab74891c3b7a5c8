"""Run every check against its positive/negative fixture pair and print a table.

    python3 scripts/run_adversarial_protocol.py [--fixtures fixtures/checks]
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from animl_kg.rdfio import load
from animl_kg.validation import CHECKS, validate

ROOT = Path(__file__).resolve().parent.parent


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fixtures", type=Path, default=ROOT / "fixtures" / "checks")
    args = ap.parse_args(argv)

    started = time.perf_counter()
    failures = 0
    print("check\tpattern\tpositive\tnegative\tok")
    for n, spec in CHECKS.items():
        d = args.fixtures / f"{n:02d}"
        pos = validate(load(d / "positive.ttl"))
        neg = validate(load(d / "negative.ttl"))
        ok = pos.conforms and bool(neg.by_check(n))
        failures += not ok
        print(f"{n}\t{spec.anti_pattern}\t{len(pos.violations)}\t{len(neg.by_check(n))}\t{'yes' if ok else 'NO'}")
    elapsed = time.perf_counter() - started
    print(f"\n{2 * len(CHECKS)} fixtures, {failures} failing, {elapsed:.2f}s", file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
