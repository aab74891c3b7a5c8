"""Synthetic AnIML documents for tests, benchmarks and demos.

Documents are written in chunks so that generating a large encoded payload
does not itself hold the payload in memory.
"""

from __future__ import annotations

import base64
import io
import os
import struct
from dataclasses import dataclass
from typing import BinaryIO, Optional
from xml.sax.saxutils import quoteattr

NS = "urn:org:astm:animl:schema:core:draft:0.90"
_CHUNK_VALUES = 3 * 4096  # multiple of 3 so base64 chunks concatenate cleanly


@dataclass
class SynthConfig:
    n_steps: int = 3
    n_samples: Optional[int] = None  # default: one per step
    payload_bytes: int = 0  # approximate size of the base64 text
    with_references: bool = True


def _step(out: BinaryIO, k: int, cfg: SynthConfig, n_samples: int) -> None:
    sid = f"e{k}"
    w = lambda s: out.write(s.encode("utf-8"))  # noqa: E731
    w(f'    <ExperimentStep name={quoteattr(f"Step {k}")} experimentStepID="{sid}">\n')
    w(f'      <Technique name="Generic" uri="https://example.org/techniques/generic.atdd"/>\n')
    if cfg.with_references and (k <= n_samples or k > 1):
        w("      <Infrastructure>\n")
        if k <= n_samples:
            # each step consumes its own sample
            w("        <SampleReferenceSet>\n")
            w(f'          <SampleReference sampleID="s{k}" role="analyte" samplePurpose="consumed"/>\n')
            w("        </SampleReferenceSet>\n")
        if k > 1:
            w("        <ExperimentDataReferenceSet>\n")
            w(f'          <ExperimentDataReference role="input" dataPurpose="consumed" experimentStepID="e{k - 1}"/>\n')
            w("        </ExperimentDataReferenceSet>\n")
        w("      </Infrastructure>\n")
    if k == 1 and cfg.payload_bytes > 0:
        _encoded_result(out, cfg.payload_bytes)
    w("    </ExperimentStep>\n")


def _encoded_result(out: BinaryIO, payload_bytes: int) -> None:
    # base64 expands 3 -> 4, doubles are 8 bytes
    n_values = max(1, (payload_bytes * 3 // 4) // 8)
    out.write(b'      <Result name="Trace">\n')
    out.write(f'        <SeriesSet name="Trace" length="{n_values}">\n'.encode())
    out.write(b'          <Series name="Signal" seriesID="signal" dependency="dependent" seriesType="Float64">\n')
    out.write(b"            <EncodedValueSet>")
    written = 0
    while written < n_values:
        count = min(_CHUNK_VALUES, n_values - written)
        raw = struct.pack(f"<{count}d", *(float(i) * 0.5 for i in range(written, written + count)))
        out.write(base64.b64encode(raw))
        written += count
    out.write(b"</EncodedValueSet>\n")
    out.write(b"          </Series>\n        </SeriesSet>\n      </Result>\n")


def write_animl(out: BinaryIO, cfg: SynthConfig) -> None:
    """Stream a synthetic document to a binary file object."""
    n_samples = cfg.n_steps if cfg.n_samples is None else cfg.n_samples
    out.write(b'<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write(f'<AnIML xmlns="{NS}" version="0.90">\n'.encode())
    if n_samples:
        out.write(b"  <SampleSet>\n")
        for i in range(1, n_samples + 1):
            out.write(f'    <Sample name="Sample {i}" sampleID="s{i}"/>\n'.encode())
        out.write(b"  </SampleSet>\n")
    if cfg.n_steps:
        out.write(b"  <ExperimentStepSet>\n")
        for k in range(1, cfg.n_steps + 1):
            _step(out, k, cfg, n_samples)
        out.write(b"  </ExperimentStepSet>\n")
    out.write(b"</AnIML>\n")


def generate_animl(n_steps: int = 3, **kwargs) -> bytes:
    buf = io.BytesIO()
    write_animl(buf, SynthConfig(n_steps=n_steps, **kwargs))
    return buf.getvalue()


def write_animl_file(path: str | os.PathLike, cfg: SynthConfig) -> None:
    with open(path, "wb") as fh:
        write_animl(fh, cfg)


def expected_payload_values(n_values: int) -> list[float]:
    """Values encoded by :func:`write_animl` for a payload of ``n_values`` doubles."""
    return [float(i) * 0.5 for i in range(n_values)]
