"""Compare peak parse memory for small and large Series payloads.

Writes two synthetic documents to a temporary directory, parses each with
payload decoding deferred, and reports the tracemalloc peak.

    python3 scripts/streaming_memory.py --small 0.5 --large 50
"""

from __future__ import annotations

import argparse
import sys
import tempfile
import time
import tracemalloc
from pathlib import Path

from animl_kg.animl import parse_animl
from animl_kg.synth import SynthConfig, write_animl_file


def measure(path: Path) -> tuple[int, float]:
    tracemalloc.start()
    t0 = time.perf_counter()
    try:
        doc = parse_animl(path)
        n_series = len(list(doc.iter_series()))
        assert n_series
        return tracemalloc.get_traced_memory()[1], time.perf_counter() - t0
    finally:
        tracemalloc.stop()


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--small", type=float, default=0.5, help="payload size in MB")
    ap.add_argument("--large", type=float, default=50.0, help="payload size in MB")
    ap.add_argument("--limit", type=float, default=2.0, help="maximum allowed peak ratio")
    args = ap.parse_args(argv)

    peaks = {}
    with tempfile.TemporaryDirectory() as tmp:
        for label, mb in (("small", args.small), ("large", args.large)):
            path = Path(tmp) / f"{label}.animl"
            write_animl_file(path, SynthConfig(n_steps=2, payload_bytes=int(mb * 1_000_000)))
            peak, secs = measure(path)
            peaks[label] = peak
            print(f"{label}\tfile {path.stat().st_size} B\tpeak {peak} B\t{secs:.2f}s")
    ratio = peaks["large"] / peaks["small"]
    print(f"ratio {ratio:.2f} (limit {args.limit})")
    return 0 if ratio < args.limit else 1


if __name__ == "__main__":
    sys.exit(main())
