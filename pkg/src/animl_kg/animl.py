"""Streaming AnIML XML reader producing a typed document tree.

The reader is built on expat. Base64 payloads of ``EncodedValueSet``
elements are not copied into memory; the parser records their byte span in
the source and decodes on request, so peak memory does not grow with the
size of binary series data.
"""

from __future__ import annotations

import base64
import binascii
import io
import json
import logging
import math
import os
import struct
import xml.parsers.expat as expat
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime
from typing import BinaryIO, Optional, Union

log = logging.getLogger(__name__)

VALUE_TYPES = ("Int32", "Int64", "Float32", "Float64", "String", "Boolean", "DateTime", "Binary")

# value element tag -> AnIML value type
VALUE_TAGS = {
    "I": "Int32",
    "L": "Int64",
    "F": "Float32",
    "D": "Float64",
    "S": "String",
    "Boolean": "Boolean",
    "DateTime": "DateTime",
    "Binary": "Binary",
    "PNG": "Binary",
}

_PACK_FORMATS = {"Int32": "i", "Int64": "q", "Float32": "f", "Float64": "d"}
_INT_RANGES = {"Int32": (-(2**31), 2**31 - 1), "Int64": (-(2**63), 2**63 - 1)}

ROLE_NAMES = {"author": "Author", "operator": "Operator"}
ACTIONS = {
    "created": "Creation", "creation": "Creation", "create": "Creation",
    "modified": "Modification", "modification": "Modification", "modify": "Modification",
    "deleted": "Deletion", "deletion": "Deletion", "delete": "Deletion",
}
AGENT_KINDS = {"human": "Human", "device": "Hardware", "hardware": "Hardware", "software": "Software"}
_AGENT_FIELDS = {
    "Human": {"Email": "email", "Phone": "phone"},
    "Software": {"OperatingSystem": "operating_system", "Version": "version",
                 "Manufacturer": "manufacturer"},
    "Hardware": {"Manufacturer": "manufacturer", "SerialNumber": "serial_number",
                 "FirmwareVersion": "firmware_version"},
}
_ALL_AGENT_FIELDS = {tag for fields in _AGENT_FIELDS.values() for tag in fields}

# elements that are understood but carry nothing the mapper uses
_IGNORED = {
    "Comment", "Diff", "TagSet", "Tag", "Affiliation", "DeviceIdentifier", "SampleInheritance",
    "Barcode", "EmbeddedXML", "SVG", "ExperimentStepSet", "SampleSet",
}


class AnimlParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.reason = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class SeriesDecodeError(ValueError):
    pass


@dataclass
class Diagnostic:
    level: str  # "warning" | "error"
    message: str
    line: int = 0
    column: int = 0

    def __str__(self) -> str:
        return f"{self.level}: line {self.line}, column {self.column}: {self.message}"


# -- document tree ---------------------------------------------------------

@dataclass
class Unit:
    label: str
    quantity: Optional[str] = None
    factor: float = 1.0
    exponent: float = 1.0


@dataclass
class Parameter:
    name: str
    value_type: str
    lexical_value: str
    unit: Optional[Unit] = None


class Payload:
    """Byte span of an undecoded value payload.

    The span is re-read from ``source`` (a path, bytes or seekable binary
    file) when ``read()`` is called; ``source`` may also be the payload
    bytes themselves when the input could not be re-read.
    """

    def __init__(self, source, start: int = 0, end: Optional[int] = None):
        self.source = source
        self.start = start
        self.end = end

    def __len__(self) -> int:
        if isinstance(self.source, (bytes, bytearray)) and self.end is None:
            return len(self.source)
        return (self.end or 0) - self.start

    def read(self) -> bytes:
        src = self.source
        if isinstance(src, (bytes, bytearray, memoryview)):
            return bytes(src[self.start:self.end])
        if isinstance(src, (str, os.PathLike)):
            with open(src, "rb") as fh:
                fh.seek(self.start)
                return fh.read(self.end - self.start)
        pos = src.tell()
        try:
            src.seek(self.start)
            return src.read(self.end - self.start)
        finally:
            src.seek(pos)

    def __eq__(self, other) -> bool:
        return isinstance(other, Payload) and self.read() == other.read()

    def __repr__(self) -> str:
        return f"Payload({len(self)} bytes)"


@dataclass
class IndividualValues:
    values: list[str]
    start_index: Optional[int] = None
    end_index: Optional[int] = None


@dataclass
class AutoIncrementedValues:
    start: str
    increment: str
    start_index: Optional[int] = None
    end_index: Optional[int] = None


@dataclass
class EncodedValues:
    payload: Payload
    start_index: Optional[int] = None
    end_index: Optional[int] = None


ValueSet = Union[IndividualValues, AutoIncrementedValues, EncodedValues]


@dataclass
class Series:
    id: str
    name: str
    dependency: str
    value_type: str
    plot_scale: Optional[str] = None
    unit: Optional[Unit] = None
    value_sets: list = field(default_factory=list)
    length: Optional[int] = None  # copied from the enclosing SeriesSet


@dataclass
class SeriesSet:
    name: str
    length: int
    series: list[Series] = field(default_factory=list)


@dataclass
class Category:
    name: str
    parameters: list[Parameter] = field(default_factory=list)
    series_sets: list[SeriesSet] = field(default_factory=list)
    subcategories: list["Category"] = field(default_factory=list)


@dataclass
class ContainerRelation:
    child_id: str
    container_type: Optional[str] = None
    location: Optional[str] = None


@dataclass
class Sample:
    id: str
    name: str
    is_container: bool = False
    container_type: Optional[str] = None
    container_id: Optional[str] = None
    location: Optional[str] = None
    container_relations: list[ContainerRelation] = field(default_factory=list)
    categories: list[Category] = field(default_factory=list)


@dataclass
class Agent:
    kind: str  # Human | Software | Hardware
    name: str
    role: Optional[str] = None  # Author | Operator | Other
    phone: Optional[str] = None
    email: Optional[str] = None
    operating_system: Optional[str] = None
    version: Optional[str] = None
    manufacturer: Optional[str] = None
    serial_number: Optional[str] = None
    firmware_version: Optional[str] = None


@dataclass
class RawReference:
    target_id: str
    target_kind: str  # sample | step | datapoint
    role: Optional[str] = None
    data_purpose: Optional[str] = None  # produced | consumed
    start_value: Optional[int] = None
    end_value: Optional[int] = None


@dataclass
class RawReferenceSet:
    subject_id: str
    subject_kind: str  # sampleset | experiment | series
    members: list[RawReference] = field(default_factory=list)


@dataclass
class TechniqueRef:
    name: str
    uri: Optional[str] = None
    version: Optional[str] = None


@dataclass
class Method:
    name: Optional[str] = None
    agents: list[Agent] = field(default_factory=list)
    categories: list[Category] = field(default_factory=list)


@dataclass
class Infrastructure:
    ref_sets: list[RawReferenceSet] = field(default_factory=list)
    timestamp: Optional[str] = None

    @property
    def sample_refs(self) -> list[RawReference]:
        return [r for rs in self.ref_sets for r in rs.members if r.target_kind == "sample"]

    @property
    def step_refs(self) -> list[RawReference]:
        return [r for rs in self.ref_sets for r in rs.members if r.target_kind == "step"]


@dataclass
class Result:
    name: str
    categories: list[Category] = field(default_factory=list)
    series_sets: list[SeriesSet] = field(default_factory=list)
    ref_sets: list[RawReferenceSet] = field(default_factory=list)


@dataclass
class ExperimentStep:
    id: str
    name: str
    technique: Optional[TechniqueRef] = None
    method: Optional[Method] = None
    infrastructure: Optional[Infrastructure] = None
    results: list[Result] = field(default_factory=list)


@dataclass
class AuditTrailEntry:
    timestamp: str
    author: Optional[Agent]
    action: str  # Creation | Deletion | Modification
    target_ids: list[str] = field(default_factory=list)
    reason: Optional[str] = None


@dataclass
class Signature:
    signer_name: str
    timestamp: Optional[str] = None
    target_ids: list[str] = field(default_factory=list)


@dataclass
class AnimlDocument:
    samples: list[Sample] = field(default_factory=list)
    steps: list[ExperimentStep] = field(default_factory=list)
    audit_trail: list[AuditTrailEntry] = field(default_factory=list)
    signatures: list[Signature] = field(default_factory=list)
    doc_version: str = ""
    ids: list[tuple[str, str]] = field(default_factory=list)  # (id, kind), with multiplicity
    diagnostics: list[Diagnostic] = field(default_factory=list, compare=False)

    @property
    def duplicate_ids(self) -> set[str]:
        counts = Counter(i for i, _ in self.ids)
        return {i for i, n in counts.items() if n > 1}

    def iter_series(self):
        def walk_cats(cats):
            for c in cats:
                for ss in c.series_sets:
                    yield from ss.series
                yield from walk_cats(c.subcategories)

        for s in self.samples:
            yield from walk_cats(s.categories)
        for step in self.steps:
            if step.method:
                yield from walk_cats(step.method.categories)
            for r in step.results:
                for ss in r.series_sets:
                    yield from ss.series
                yield from walk_cats(r.categories)


# -- lexical checks and decoding ---------------------------------------------

def _parse_datetime(text: str) -> datetime:
    t = text.strip()
    if t.endswith("Z"):
        t = t[:-1] + "+00:00"
    return datetime.fromisoformat(t)


def parse_lexical(value_type: str, lexical: str):
    """Convert a lexical value to Python according to an AnIML value type.

    Raises ValueError when the lexical form does not parse.
    """
    text = lexical.strip()
    if value_type in _INT_RANGES:
        v = int(text)
        lo, hi = _INT_RANGES[value_type]
        if not lo <= v <= hi:
            raise ValueError(f"{text} out of range for {value_type}")
        return v
    if value_type in ("Float32", "Float64"):
        return float(text)
    if value_type == "Boolean":
        if text in ("true", "1"):
            return True
        if text in ("false", "0"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if value_type == "DateTime":
        _parse_datetime(text)
        return text
    if value_type == "Binary":
        return base64.b64decode("".join(text.split()), validate=True)
    if value_type == "String":
        return lexical
    raise ValueError(f"unknown value type {value_type!r}")


def _set_count(vs, default: Optional[int]) -> Optional[int]:
    if vs.start_index is not None and vs.end_index is not None:
        return vs.end_index - vs.start_index + 1
    return default


def decode_series_values(series: Series, length: Optional[int] = None) -> list:
    """Decode every value set of ``series`` into Python values.

    ``length`` defaults to the enclosing SeriesSet length recorded on the
    series. Binary payloads are read as little-endian packed numbers whose
    width follows the series value type.
    """
    expected = series.length if length is None else length
    out: list = []
    for vs in series.value_sets:
        if isinstance(vs, IndividualValues):
            for k, lexical in enumerate(vs.values):
                try:
                    out.append(parse_lexical(series.value_type, lexical))
                except (ValueError, binascii.Error) as exc:
                    raise SeriesDecodeError(
                        f"series {series.id!r}: value at index {len(out)} ({lexical!r}) "
                        f"is not a valid {series.value_type}: {exc}"
                    ) from None
        elif isinstance(vs, AutoIncrementedValues):
            remaining = None if expected is None else expected - len(out)
            count = _set_count(vs, remaining)
            if count is None:
                raise SeriesDecodeError(f"series {series.id!r}: auto-increment length unknown")
            start = parse_lexical(series.value_type, vs.start)
            inc = parse_lexical(series.value_type, vs.increment)
            out.extend(start + k * inc for k in range(count))
        elif isinstance(vs, EncodedValues):
            fmt = _PACK_FORMATS.get(series.value_type)
            if fmt is None:
                raise SeriesDecodeError(
                    f"series {series.id!r}: cannot unpack binary data of type {series.value_type}")
            raw = vs.payload.read()
            try:
                data = base64.b64decode(b"".join(raw.split()), validate=True)
            except (binascii.Error, ValueError) as exc:
                raise SeriesDecodeError(f"series {series.id!r}: undecodable base64: {exc}") from None
            width = struct.calcsize("<" + fmt)
            if len(data) % width:
                raise SeriesDecodeError(
                    f"series {series.id!r}: {len(data)} bytes is not a multiple of {width}")
            out.extend(v for (v,) in struct.iter_unpack("<" + fmt, data))
    if expected is not None and len(out) != expected:
        raise SeriesDecodeError(
            f"series {series.id!r}: decoded {len(out)} values, SeriesSet length is {expected}")
    return out


def encode_binary(values, value_type: str) -> str:
    """Base64 of little-endian packed ``values`` (the inverse of the binary decoder)."""
    fmt = "<" + str(len(values)) + _PACK_FORMATS[value_type]
    return base64.b64encode(struct.pack(fmt, *values)).decode("ascii")


# -- expat front end ---------------------------------------------------------

class _Elem:
    __slots__ = ("tag", "ns", "attrs", "children", "text", "line", "col", "payload")

    def __init__(self, tag, ns, attrs, line, col):
        self.tag = tag
        self.ns = ns
        self.attrs = attrs
        self.children: list[_Elem] = []
        self.text: list[str] = []
        self.line = line
        self.col = col
        self.payload: Optional[Payload] = None

    def gettext(self) -> str:
        return "".join(self.text).strip()

    def child(self, tag) -> Optional["_Elem"]:
        for c in self.children:
            if c.tag == tag:
                return c
        return None


def _is_animl_ns(ns: str) -> bool:
    return ns == "" or ns.startswith("urn:org:astm:animl")


def _build_tree(source) -> _Elem:
    """Parse XML into a light element tree, keeping payload spans unread."""
    if isinstance(source, (str, os.PathLike)):
        payload_source = source
    elif isinstance(source, (bytes, bytearray)):
        payload_source = source
    else:
        name = getattr(source, "name", None)
        if isinstance(name, str) and os.path.isfile(name):
            payload_source = name
        elif getattr(source, "seekable", lambda: False)():
            payload_source = source
        else:
            payload_source = None  # not re-readable: keep payload text

    parser = expat.ParserCreate(namespace_separator=" ")
    root_holder: list[_Elem] = []
    stack: list[_Elem] = []
    span_start: list[Optional[int]] = [None]

    def start(name, attrs):
        ns, _, local = name.rpartition(" ")
        clean = {k.rpartition(" ")[2]: v for k, v in attrs.items()}
        el = _Elem(local, ns, clean, parser.CurrentLineNumber, parser.CurrentColumnNumber + 1)
        if stack:
            stack[-1].children.append(el)
        else:
            root_holder.append(el)
        stack.append(el)
        span_start[0] = None

    def end(name):
        el = stack.pop()
        if el.tag == "EncodedValueSet" and payload_source is not None:
            begin = span_start[0]
            stop = parser.CurrentByteIndex
            el.payload = Payload(payload_source, begin if begin is not None else stop, stop)
        elif el.tag == "EncodedValueSet":
            el.payload = Payload("".join(el.text).encode("ascii", "replace"))
            el.text = []

    def chars(data):
        el = stack[-1]
        if el.tag == "EncodedValueSet" and payload_source is not None:
            if span_start[0] is None:
                span_start[0] = parser.CurrentByteIndex
            return
        el.text.append(data)

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        if isinstance(source, (str, os.PathLike)):
            with open(source, "rb") as fh:
                parser.ParseFile(fh)
        elif isinstance(source, (bytes, bytearray)):
            parser.Parse(bytes(source), True)
        else:
            parser.ParseFile(source)
    except expat.ExpatError as exc:
        raise AnimlParseError(expat.errors.messages[exc.code], exc.lineno, exc.offset + 1) from None
    if not root_holder:
        raise AnimlParseError("empty document", 1, 1)
    return root_holder[0]


class _Builder:
    def __init__(self):
        self.doc = AnimlDocument()
        self._warned: set[str] = set()

    def diag(self, level: str, message: str, el: Optional[_Elem] = None):
        d = Diagnostic(level, message, el.line if el else 0, el.col if el else 0)
        self.doc.diagnostics.append(d)
        (log.warning if level == "warning" else log.error)("%s", d)

    def unknown(self, el: _Elem, parent: _Elem):
        if not _is_animl_ns(el.ns) or el.tag in _IGNORED:
            return
        self.diag("warning", f"skipping unrecognized element <{el.tag}> in <{parent.tag}>", el)

    def register(self, ident: str, kind: str):
        self.doc.ids.append((ident, kind))

    # document ------------------------------------------------------------
    def document(self, root: _Elem) -> AnimlDocument:
        if root.tag != "AnIML":
            self.diag("warning", f"root element is <{root.tag}>, expected <AnIML>", root)
        self.doc.doc_version = root.attrs.get("version", "")
        for el in root.children:
            if el.tag == "SampleSet":
                for s in el.children:
                    if s.tag == "Sample":
                        sample = self.sample(s)
                        if sample is not None:
                            self.doc.samples.append(sample)
                    else:
                        self.unknown(s, el)
            elif el.tag == "ExperimentStepSet":
                for s in el.children:
                    if s.tag == "ExperimentStep":
                        step = self.step(s)
                        if step is not None:
                            self.doc.steps.append(step)
                    else:
                        self.unknown(s, el)
            elif el.tag == "AuditTrailEntrySet":
                for e in el.children:
                    if e.tag == "AuditTrailEntry":
                        entry = self.audit_entry(e)
                        if entry is not None:
                            self.doc.audit_trail.append(entry)
                    else:
                        self.unknown(e, el)
            elif el.tag == "SignatureSet":
                for s in el.children:
                    if s.tag == "Signature":
                        self.doc.signatures.append(self.signature(s))
            else:
                self.unknown(el, root)
        self._link_containers()
        return self.doc

    def _link_containers(self):
        by_id: dict[str, Sample] = {}
        for s in self.doc.samples:
            by_id.setdefault(s.id, s)
        for s in self.doc.samples:
            if s.container_id:
                parent = by_id.get(s.container_id)
                if parent is None:
                    self.diag("warning", f"sample {s.id!r} names unknown container {s.container_id!r}")
                    continue
                parent.is_container = True
                parent.container_relations.append(
                    ContainerRelation(s.id, parent.container_type, s.location))

    # samples and data ----------------------------------------------------
    def sample(self, el: _Elem) -> Optional[Sample]:
        sid = el.attrs.get("sampleID")
        if not sid:
            self.diag("error", "Sample without required sampleID", el)
            return None
        self.register(sid, "sample")
        ctype = el.attrs.get("containerType")
        sample = Sample(
            id=sid,
            name=el.attrs.get("name", ""),
            is_container=ctype is not None,
            container_type=ctype,
            container_id=el.attrs.get("containerID") or None,
            location=el.attrs.get("locationInContainer") or None,
        )
        for c in el.children:
            if c.tag == "Category":
                sample.categories.append(self.category(c))
            else:
                self.unknown(c, el)
        return sample

    def category(self, el: _Elem) -> Category:
        cat = Category(name=el.attrs.get("name", ""))
        for c in el.children:
            if c.tag == "Parameter":
                p = self.parameter(c)
                if p is not None:
                    cat.parameters.append(p)
            elif c.tag == "SeriesSet":
                cat.series_sets.append(self.series_set(c))
            elif c.tag == "Category":
                cat.subcategories.append(self.category(c))
            else:
                self.unknown(c, el)
        return cat

    def unit(self, el: _Elem) -> Unit:
        unit = Unit(label=el.attrs.get("label", ""), quantity=el.attrs.get("quantity"))
        si = el.child("SIUnit")
        if si is not None:
            try:
                unit.factor = float(si.attrs.get("factor", "1"))
                unit.exponent = float(si.attrs.get("exponent", "1"))
            except ValueError:
                self.diag("warning", "non-numeric SIUnit factor/exponent", si)
        return unit

    def _value_child(self, el: _Elem) -> Optional[_Elem]:
        for c in el.children:
            if c.tag in VALUE_TAGS:
                return c
        return None

    def parameter(self, el: _Elem) -> Optional[Parameter]:
        name = el.attrs.get("name", "")
        vt = el.attrs.get("parameterType")
        vel = self._value_child(el)
        if vel is None:
            self.diag("warning", f"parameter {name!r} has no value", el)
            return None
        if vt is None:
            vt = VALUE_TAGS[vel.tag]
        if vt not in VALUE_TYPES:
            self.diag("warning", f"parameter {name!r}: unsupported value type {vt!r}", el)
            return None
        lexical = "".join(vel.text) if vt == "String" else vel.gettext()
        try:
            parse_lexical(vt, lexical)
        except (ValueError, binascii.Error) as exc:
            self.diag("error", f"parameter {name!r}: {lexical!r} is not a valid {vt} ({exc})", vel)
        unit_el = el.child("Unit")
        return Parameter(name, vt, lexical, self.unit(unit_el) if unit_el is not None else None)

    def series_set(self, el: _Elem) -> SeriesSet:
        try:
            length = int(el.attrs.get("length", "0"))
        except ValueError:
            self.diag("error", "SeriesSet length is not an integer", el)
            length = 0
        ss = SeriesSet(name=el.attrs.get("name", ""), length=length)
        for c in el.children:
            if c.tag == "Series":
                ss.series.append(self.series(c, length))
            else:
                self.unknown(c, el)
        return ss

    def _index(self, el: _Elem, attr: str) -> Optional[int]:
        raw = el.attrs.get(attr)
        if raw is None:
            return None
        try:
            return int(raw)
        except ValueError:
            self.diag("error", f"{attr} is not an integer: {raw!r}", el)
            return None

    def series(self, el: _Elem, length: int) -> Series:
        sid = el.attrs.get("seriesID", "")
        if not sid:
            self.diag("error", "Series without required seriesID", el)
        else:
            self.register(sid, "series")
        dep = el.attrs.get("dependency", "dependent")
        if dep not in ("independent", "dependent"):
            self.diag("error", f"series {sid!r}: dependency must be independent or dependent", el)
            dep = "dependent"
        vt = el.attrs.get("seriesType", "Float64")
        if vt not in VALUE_TYPES:
            self.diag("warning", f"series {sid!r}: unsupported seriesType {vt!r}", el)
        series = Series(
            id=sid, name=el.attrs.get("name", ""), dependency=dep, value_type=vt,
            plot_scale=el.attrs.get("plotScale"), length=length,
        )
        for c in el.children:
            tag = c.tag
            start_i, end_i = self._index(c, "startIndex"), self._index(c, "endIndex")
            if tag == "IndividualValueSet":
                vals = [("".join(v.text) if vt == "String" else v.gettext())
                        for v in c.children if v.tag in VALUE_TAGS]
                series.value_sets.append(IndividualValues(vals, start_i, end_i))
            elif tag == "AutoIncrementedValueSet":
                sv, inc = c.child("StartValue"), c.child("Increment")
                svv = self._value_child(sv) if sv is not None else None
                incv = self._value_child(inc) if inc is not None else None
                if svv is None or incv is None:
                    self.diag("error", f"series {sid!r}: incomplete AutoIncrementedValueSet", c)
                    continue
                series.value_sets.append(
                    AutoIncrementedValues(svv.gettext(), incv.gettext(), start_i, end_i))
            elif tag == "EncodedValueSet":
                series.value_sets.append(EncodedValues(c.payload, start_i, end_i))
            elif tag == "Unit":
                series.unit = self.unit(c)
            else:
                self.unknown(c, el)
        return series

    # experiment ----------------------------------------------------------
    def step(self, el: _Elem) -> Optional[ExperimentStep]:
        sid = el.attrs.get("experimentStepID")
        if not sid:
            self.diag("error", "ExperimentStep without required experimentStepID", el)
            return None
        self.register(sid, "step")
        step = ExperimentStep(id=sid, name=el.attrs.get("name", ""))
        for c in el.children:
            if c.tag == "Technique":
                step.technique = TechniqueRef(
                    c.attrs.get("name", ""), c.attrs.get("uri") or None, c.attrs.get("version"))
            elif c.tag == "Method":
                step.method = self.method(c)
            elif c.tag == "Infrastructure":
                step.infrastructure = self.infrastructure(c)
            elif c.tag == "Result":
                step.results.append(self.result(c))
            else:
                self.unknown(c, el)
        return step

    def agent(self, el: _Elem, kind: str) -> Agent:
        name_el = el.child("Name")
        agent = Agent(kind=kind, name=name_el.gettext() if name_el is not None else "")
        role_el = el.child("Role")
        if role_el is not None and role_el.gettext():
            agent.role = ROLE_NAMES.get(role_el.gettext().lower(), "Other")
        allowed = _AGENT_FIELDS[kind]
        for c in el.children:
            if c.tag in ("Name", "Role"):
                continue
            if c.tag in allowed:
                setattr(agent, allowed[c.tag], c.gettext())
            elif c.tag in _ALL_AGENT_FIELDS:
                self.diag("warning", f"{kind} agent {agent.name!r}: <{c.tag}> not applicable, dropped", c)
            else:
                self.unknown(c, el)
        return agent

    def method(self, el: _Elem) -> Method:
        m = Method(name=el.attrs.get("name"))
        for c in el.children:
            if c.tag == "Author":
                user_type = c.attrs.get("userType", "human").lower()
                kind = AGENT_KINDS.get(user_type)
                if kind is None:
                    self.diag("warning", f"unknown userType {user_type!r}, treating as human", c)
                    kind = "Human"
                m.agents.append(self.agent(c, kind))
            elif c.tag == "Device":
                m.agents.append(self.agent(c, "Hardware"))
            elif c.tag == "Software":
                m.agents.append(self.agent(c, "Software"))
            elif c.tag == "Category":
                m.categories.append(self.category(c))
            else:
                self.unknown(c, el)
        return m

    def _ref_set(self, el: _Elem) -> Optional[RawReferenceSet]:
        members: list[RawReference] = []
        if el.tag == "SampleReferenceSet":
            for c in el.children:
                if c.tag == "SampleReference":
                    members.append(RawReference(
                        c.attrs.get("sampleID", ""), "sample", c.attrs.get("role"),
                        self._purpose(c, "samplePurpose")))
                else:
                    self.unknown(c, el)
            return RawReferenceSet("", "sampleset", members)
        if el.tag == "ExperimentDataReferenceSet":
            for c in el.children:
                if c.tag == "ExperimentDataReference":
                    members.append(RawReference(
                        c.attrs.get("experimentStepID", ""), "step", c.attrs.get("role"),
                        self._purpose(c, "dataPurpose")))
                else:
                    self.unknown(c, el)
            return RawReferenceSet("", "experiment", members)
        # ParentDataPointReferenceSet
        for c in el.children:
            if c.tag != "ParentDataPointReference":
                self.unknown(c, el)
                continue
            ref = RawReference(c.attrs.get("seriesID", ""), "datapoint", c.attrs.get("role"),
                               self._purpose(c, "dataPurpose"))
            ref.start_value = self._slice_bound(c, "StartValue")
            ref.end_value = self._slice_bound(c, "EndValue")
            if ref.start_value is not None and ref.end_value is not None \
                    and ref.start_value > ref.end_value:
                self.diag("error", f"reference to {ref.target_id!r}: StartValue > EndValue", c)
            members.append(ref)
        subject = members[0].target_id if members else ""
        return RawReferenceSet(subject, "series", members)

    def _purpose(self, el: _Elem, attr: str) -> Optional[str]:
        raw = el.attrs.get(attr)
        if raw is None:
            return None
        if raw not in ("produced", "consumed"):
            self.diag("warning", f"{attr} {raw!r} is neither produced nor consumed; ignored", el)
            return None
        return raw

    def _slice_bound(self, el: _Elem, tag: str) -> Optional[int]:
        b = el.child(tag)
        if b is None:
            return None
        v = self._value_child(b)
        text = v.gettext() if v is not None else b.gettext()
        try:
            as_float = float(text)
        except ValueError:
            as_float = math.nan
        if not as_float.is_integer():
            self.diag("error", f"<{tag}> {text!r} is not an integer index", b)
            return None
        return int(as_float)

    def infrastructure(self, el: _Elem) -> Infrastructure:
        inf = Infrastructure()
        for c in el.children:
            if c.tag in ("SampleReferenceSet", "ExperimentDataReferenceSet",
                         "ParentDataPointReferenceSet"):
                inf.ref_sets.append(self._ref_set(c))
            elif c.tag == "Timestamp":
                inf.timestamp = c.gettext()
            else:
                self.unknown(c, el)
        return inf

    def result(self, el: _Elem) -> Result:
        res = Result(name=el.attrs.get("name", ""))
        for c in el.children:
            if c.tag == "Category":
                res.categories.append(self.category(c))
            elif c.tag == "SeriesSet":
                res.series_sets.append(self.series_set(c))
            elif c.tag in ("SampleReferenceSet", "ExperimentDataReferenceSet",
                           "ParentDataPointReferenceSet"):
                res.ref_sets.append(self._ref_set(c))
            else:
                self.unknown(c, el)
        return res

    # provenance ----------------------------------------------------------
    def audit_entry(self, el: _Elem) -> Optional[AuditTrailEntry]:
        ts = el.child("Timestamp")
        action_el = el.child("Action")
        raw_action = action_el.gettext() if action_el is not None else ""
        action = ACTIONS.get(raw_action.lower())
        if action is None:
            self.diag("error", f"audit trail action {raw_action!r} is not Creation/Deletion/Modification", el)
            return None
        author = None
        reason = None
        targets: list[str] = []
        for c in el.children:
            if c.tag == "Author":
                kind = AGENT_KINDS.get(c.attrs.get("userType", "human").lower(), "Human")
                author = self.agent(c, kind)
            elif c.tag == "Reason":
                reason = c.gettext()
            elif c.tag == "Reference":
                targets.append(c.gettext())
            elif c.tag not in ("Timestamp", "Action"):
                self.unknown(c, el)
        return AuditTrailEntry(ts.gettext() if ts is not None else "", author, action, targets, reason)

    def signature(self, el: _Elem) -> Signature:
        signer = el.attrs.get("signerName", "")
        stamp = el.attrs.get("timestamp")
        targets = el.attrs.get("references", "").split()

        def walk(e: _Elem):
            nonlocal signer
            for c in e.children:
                if c.tag == "KeyName" and not signer:
                    signer = c.gettext()
                elif c.tag == "Reference" and c.attrs.get("URI", "").startswith("#"):
                    targets.append(c.attrs["URI"][1:])
                walk(c)

        walk(el)
        return Signature(signer, stamp, targets)


def parse_animl(source: Union[str, os.PathLike, bytes, BinaryIO]) -> AnimlDocument:
    """Parse an AnIML document from a path, bytes or binary stream.

    Recoverable problems (unknown elements, missing ids, bad lexical values)
    are collected in ``AnimlDocument.diagnostics``; malformed XML raises
    ``AnimlParseError`` with line and column.
    """
    if isinstance(source, str) and source.lstrip().startswith("<"):
        source = source.encode("utf-8")
    if isinstance(source, io.TextIOBase):
        raise TypeError("parse_animl needs a binary stream")
    root = _build_tree(source)
    return _Builder().document(root)


def values_json(values: list[str]) -> str:
    """Canonical JSON array used for individual value lists in the graph."""
    return json.dumps(values, ensure_ascii=False, separators=(",", ":"))
