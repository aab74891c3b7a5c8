"""SSSOM mapping sets: parsing, writing, application to graphs, statistics."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

import yaml

from animl_kg import vocab as V
from animl_kg.graph import IRI, Graph, Triple

log = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("subject_id", "predicate_id", "object_id", "mapping_justification")
OPTIONAL_COLUMNS = ("subject_label", "object_label", "confidence", "comment")

# short name used in statistics -> predicate IRI
PREDICATES = {
    "equivalentClass": V.owl_equivalentClass,
    "relatedMatch": V.skos_relatedMatch,
    "narrowMatch": V.skos_narrowMatch,
    "broadMatch": V.skos_broadMatch,
    "partOf": V.part_of,
}
_SHORT = {iri: name for name, iri in PREDICATES.items()}

BUILTIN_CURIES = {
    "owl": V.OWL_NS,
    "skos": V.SKOS_NS,
    "aml": V.AML_NS,
    "BFO": "http://purl.obolibrary.org/obo/BFO_",
    "semapv": "https://w3id.org/semapv/vocab/",
}


class SSSOMError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class MappingRecord:
    subject_id: IRI
    predicate_id: IRI
    object_id: IRI
    mapping_justification: str
    confidence: Optional[float] = None
    subject_label: str = ""
    object_label: str = ""
    comment: str = ""

    def __post_init__(self):
        if self.predicate_id not in _SHORT:
            raise ValueError(f"predicate {self.predicate_id.value} is not an allowed mapping predicate")
        if self.confidence is not None and not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")

    def key(self) -> tuple[IRI, IRI, IRI]:
        return (self.subject_id, self.predicate_id, self.object_id)

    @property
    def predicate_name(self) -> str:
        return _SHORT[self.predicate_id]


@dataclass
class MappingSet:
    records: list[MappingRecord] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    curie_map: dict[str, str] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for r in self.records:
            if r.key() in seen:
                raise SSSOMError(f"duplicate mapping {r.subject_id.value} {r.predicate_name} {r.object_id.value}")
            seen.add(r.key())

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def _expand(value: str, curies: dict[str, str], line: int, column: str) -> IRI:
    value = value.strip()
    if value.startswith("<") and value.endswith(">"):
        value = value[1:-1]
    prefix, sep, local = value.partition(":")
    if sep and prefix in curies and not local.startswith("//"):
        value = curies[prefix] + local
    try:
        return IRI(value)
    except ValueError:
        raise SSSOMError(f"{column} {value!r} is not an absolute IRI or known CURIE", line) from None


def parse_sssom(data: bytes | str) -> MappingSet:
    """Read an SSSOM TSV file (with an optional ``#`` YAML metadata block)."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = text.splitlines()
    header_lines = []
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        header_lines.append(lines[i][1:])
        i += 1
    metadata = {}
    if header_lines:
        try:
            metadata = yaml.safe_load("\n".join(header_lines)) or {}
        except yaml.YAMLError as exc:
            raise SSSOMError(f"metadata block is not valid YAML: {exc}", 1) from None
        if not isinstance(metadata, dict):
            raise SSSOMError("metadata block must be a mapping", 1)
    curie_map = dict(metadata.pop("curie_map", None) or {})
    curies = {**BUILTIN_CURIES, **curie_map}

    body = lines[i:]
    offset = i  # 0-based index of the column header line
    rows = list(csv.reader(body, delimiter="\t", quoting=csv.QUOTE_NONE))
    if not rows or not any(rows[0]):
        raise SSSOMError("missing column header row", offset + 1)
    columns = [c.strip() for c in rows[0]]
    for col in REQUIRED_COLUMNS:
        if col not in columns:
            raise SSSOMError(f"missing required column '{col}'", offset + 1)
    index = {c: k for k, c in enumerate(columns)}

    records, warnings, seen = [], [], {}
    for n, row in enumerate(rows[1:], start=offset + 2):
        if not any(cell.strip() for cell in row):
            continue
        cell = lambda c: row[index[c]].strip() if c in index and index[c] < len(row) else ""  # noqa: E731
        pred = _expand(cell("predicate_id"), curies, n, "predicate_id")
        if pred not in _SHORT:
            msg = f"line {n}: unknown predicate {pred.value}; row skipped"
            warnings.append(msg)
            log.warning(msg)
            continue
        conf_text = cell("confidence")
        confidence = None
        if conf_text:
            try:
                confidence = float(conf_text)
            except ValueError:
                raise SSSOMError(f"confidence {conf_text!r} is not a number", n) from None
            if not 0.0 <= confidence <= 1.0:
                raise SSSOMError(f"confidence {confidence} outside [0, 1]", n)
        justification = cell("mapping_justification")
        if not justification:
            raise SSSOMError("empty mapping_justification", n)
        rec = MappingRecord(
            _expand(cell("subject_id"), curies, n, "subject_id"), pred,
            _expand(cell("object_id"), curies, n, "object_id"), justification, confidence,
            cell("subject_label"), cell("object_label"), cell("comment"))
        if rec.key() in seen:
            raise SSSOMError(f"duplicate mapping row (first seen on line {seen[rec.key()]})", n)
        seen[rec.key()] = n
        records.append(rec)
    return MappingSet(records, metadata, curie_map, warnings)


def _compact(iri: IRI, curies: dict[str, str]) -> str:
    best = None
    for prefix, ns in curies.items():
        if iri.value.startswith(ns) and len(iri.value) > len(ns):
            if best is None or len(ns) > len(curies[best]):
                best = prefix
    return f"{best}:{iri.value[len(curies[best]):]}" if best else iri.value


def serialize_sssom(mset: MappingSet) -> bytes:
    """Write a mapping set as SSSOM TSV; inverse of :func:`parse_sssom`."""
    out = io.StringIO()
    meta = dict(mset.metadata)
    if mset.curie_map:
        meta["curie_map"] = dict(mset.curie_map)
    if meta:
        for line in yaml.safe_dump(meta, sort_keys=True, allow_unicode=True).splitlines():
            out.write(f"#{line}\n")
    curies = {**BUILTIN_CURIES, **mset.curie_map}
    columns = ["subject_id", "subject_label", "predicate_id", "object_id", "object_label",
               "mapping_justification", "confidence", "comment"]
    out.write("\t".join(columns) + "\n")
    for r in mset.records:
        for text in (r.subject_label, r.object_label, r.comment, r.mapping_justification):
            if "\t" in text or "\n" in text:
                raise SSSOMError(f"tab or newline in field {text!r}")
        conf = "" if r.confidence is None else repr(r.confidence)
        out.write("\t".join([
            _compact(r.subject_id, curies), r.subject_label, _compact(r.predicate_id, curies),
            _compact(r.object_id, curies), r.object_label, r.mapping_justification, conf, r.comment,
        ]) + "\n")
    return out.getvalue().encode("utf-8")


def bundled_mappings() -> MappingSet:
    """The curated AnIML-to-AFO mapping set shipped with the package."""
    data = resources.files("animl_kg").joinpath("data/curated.sssom.tsv").read_bytes()
    return parse_sssom(data)


def apply_mappings(graph: Graph, mset: MappingSet, mode: str = "annotate") -> Graph:
    """Return a new graph with the mappings applied.

    Equivalences on classes retype instances (``annotate`` adds the target
    type, ``rewrite`` replaces the source type). SKOS and partOf rows, and
    any row whose subject is used as a predicate, only add one schema-level
    triple ``subject predicate object``.
    """
    if mode not in ("annotate", "rewrite"):
        raise ValueError(f"unknown mapping mode {mode!r}; expected annotate or rewrite")
    out = graph.copy()
    # instance sets come from the input so chained equivalences do not cascade
    instances = {}
    for r in mset.records:
        if r.subject_id not in instances:
            instances[r.subject_id] = graph.instances(r.subject_id)
    for r in mset.records:
        schema_only = r.predicate_id != V.owl_equivalentClass or any(
            True for _ in graph._match_unsorted(None, r.subject_id, None))
        if schema_only:
            out.add(Triple(r.subject_id, r.predicate_id, r.object_id))
            continue
        for node in instances[r.subject_id]:
            out.add(Triple(node, V.RDF_TYPE, r.object_id))
            if mode == "rewrite":
                out.remove(Triple(node, V.RDF_TYPE, r.subject_id))
    return out


@dataclass
class MappingStats:
    counts: dict[str, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def to_tsv(self) -> str:
        lines = ["predicate\tcount"]
        lines += [f"{name}\t{n}" for name, n in self.counts.items()]
        lines.append(f"total\t{self.total}")
        return "\n".join(lines) + "\n"


def mapping_stats(mset: MappingSet) -> MappingStats:
    counts = {name: 0 for name in PREDICATES}
    for r in mset.records:
        counts[r.predicate_name] += 1
    return MappingStats(counts)
