"""AnIML document tree -> RDF graph.

Instance IRIs are minted from the base IRI of an :class:`IriPolicy`.
Referenceable entities use ``{base}/{kind}/{id}``; structural children are
minted by path below their parent (``.../category/2``); reference sets and
references use document-order counters (``{base}/refset/3``). All minting
is deterministic, so the same document always yields the same graph.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional
from urllib.parse import quote

from animl_kg import vocab as V
from animl_kg.animl import (
    Agent,
    AnimlDocument,
    AutoIncrementedValues,
    Category,
    Diagnostic,
    EncodedValues,
    IndividualValues,
    RawReferenceSet,
    Series,
    SeriesSet,
    Unit,
    _parse_datetime,
    values_json,
)
from animl_kg.graph import IRI, Graph, Literal, Node, Triple, _SCHEME

log = logging.getLogger(__name__)

XSD_FOR_VALUE_TYPE = {
    "Int32": V.XSD_INTEGER,
    "Int64": V.XSD_INTEGER,
    "Float32": V.XSD_DOUBLE,
    "Float64": V.XSD_DOUBLE,
    "DateTime": V.XSD_DATETIME,
    "Binary": V.XSD_BASE64,
    "Boolean": V.XSD_BOOLEAN,
    "String": V.XSD_STRING,
}


@dataclass(frozen=True)
class IriPolicy:
    """Instance IRI minting rules.

    ``index_base`` is the index convention of slice bounds in the source
    documents; emitted ``aml:startValue``/``aml:endValue`` are 0-based.
    """

    base: str
    index_base: int = 0

    def __post_init__(self):
        if not _SCHEME.match(self.base):
            raise ValueError(f"base IRI must be absolute: {self.base!r}")
        object.__setattr__(self, "base", self.base.rstrip("/"))

    def mint(self, kind: str, ident: str = "") -> IRI:
        if ident == "":
            return IRI(f"{self.base}/{kind}")
        return IRI(f"{self.base}/{kind}/{quote(str(ident), safe='-_.~')}")

    @staticmethod
    def child(parent: IRI, *segments) -> IRI:
        return IRI(parent.value + "".join(f"/{quote(str(s), safe='-_.~')}" for s in segments))


def _lit(value, datatype: Optional[str] = None) -> Literal:
    return Literal(str(value), datatype)


def _datetime_lit(text: str) -> Literal:
    try:
        _parse_datetime(text)
        return Literal(text, V.XSD_DATETIME)
    except ValueError:
        return Literal(text)


def _number(value: float) -> str:
    return repr(float(value))


class _Registry:
    """Entity IRIs for one (document, policy) pair, shared by all mapping passes."""

    def __init__(self, doc: AnimlDocument, policy: IriPolicy, diagnostics: list[Diagnostic]):
        self.policy = policy
        self.document = policy.mint("document")
        self.experiment = policy.mint("experiment")
        self.sampleset = policy.mint("sampleset")
        self.audittrail = policy.mint("audittrail")
        self.signatureset = policy.mint("signatureset")

        self.samples: dict[str, IRI] = {}
        self.steps: dict[str, IRI] = {}
        self.series: dict[str, IRI] = {}
        self.sample_iris = self._mint_all("sample", [s.id for s in doc.samples], self.samples, diagnostics)
        self.step_iris = self._mint_all("step", [s.id for s in doc.steps], self.steps, diagnostics)
        all_series = list(doc.iter_series())
        self.series_iris: dict[int, IRI] = {}
        named = [s for s in all_series if s.id]
        for s, iri in zip(named, self._mint_all("series", [s.id for s in named], self.series, diagnostics)):
            self.series_iris[id(s)] = iri
        anon = 0
        for s in all_series:
            if not s.id:
                anon += 1
                self.series_iris[id(s)] = policy.mint("anonymous-series", str(anon))

        kinds: dict[str, set[str]] = {}
        for ident, kind in doc.ids:
            kinds.setdefault(ident, set()).add(kind)
        cross = sorted(i for i, ks in kinds.items() if len(ks) > 1)
        if cross:
            diagnostics.append(Diagnostic(
                "warning", "ids shared across entity kinds: " + ", ".join(cross)))

    def _mint_all(self, kind, ids, table, diagnostics) -> list[IRI]:
        out = []
        seen: dict[str, int] = {}
        for ident in ids:
            seen[ident] = seen.get(ident, 0) + 1
            iri = self.policy.mint(kind, ident)
            if seen[ident] > 1:
                iri = IriPolicy.child(iri, f"dup-{seen[ident]}")
            table.setdefault(ident, iri)
            out.append(iri)
        dups = sorted(i for i, n in seen.items() if n > 1)
        if dups:
            diagnostics.append(Diagnostic(
                "warning", f"IRI minting collision for {kind} ids {', '.join(dups)}; "
                           "later occurrences get a /dup-N suffix"))
        return out

    def role(self, role_type: str) -> IRI:
        return self.policy.mint("role", role_type)

    def resolve(self, ident: str, kind: Optional[str] = None) -> Optional[IRI]:
        tables = {"sample": (self.samples,), "step": (self.steps,), "datapoint": (self.series,),
                  None: (self.samples, self.steps, self.series)}[kind]
        for table in tables:
            if ident in table:
                return table[ident]
        return None


class _Emitter:
    def __init__(self, graph: Graph, reg: _Registry, diagnostics: list[Diagnostic]):
        self.g = graph
        self.reg = reg
        self.diagnostics = diagnostics

    def add(self, s: Node, p: IRI, o: Node):
        self.g.add(Triple(s, p, o))

    def typed(self, node: IRI, *classes: IRI):
        for c in classes:
            self.add(node, V.RDF_TYPE, c)

    def text(self, node: IRI, prop: IRI, value: Optional[str]):
        if value:
            self.add(node, prop, Literal(value))

    def warn(self, message: str):
        self.diagnostics.append(Diagnostic("warning", message))
        log.warning("%s", message)

    def placeholder(self, ident: str, context: str) -> IRI:
        iri = self.reg.policy.mint("unresolved", ident or "_")
        self.diagnostics.append(Diagnostic("error", f"unresolved reference {ident!r} ({context})"))
        log.error("unresolved reference %r (%s)", ident, context)
        self.typed(iri, V.SignableItem)
        return iri

    # building blocks -----------------------------------------------------
    def unit(self, owner: IRI, unit: Unit):
        node = IriPolicy.child(owner, "unit")
        self.add(owner, V.hasUnit, node)
        self.typed(node, V.Unit)
        self.text(node, V.label, unit.label)
        self.text(node, V.quantity, unit.quantity)
        self.add(node, V.factor, Literal(_number(unit.factor), V.XSD_DOUBLE))
        self.add(node, V.exponent, Literal(_number(unit.exponent), V.XSD_DOUBLE))

    def categories(self, owner: IRI, cats: list[Category]):
        for k, cat in enumerate(cats, 1):
            node = IriPolicy.child(owner, "category", k)
            self.add(owner, V.hasCategory, node)
            self.typed(node, V.Category)
            self.text(node, V.name, cat.name)
            for j, p in enumerate(cat.parameters, 1):
                pn = IriPolicy.child(node, "parameter", j)
                self.add(node, V.hasParameter, pn)
                self.typed(pn, V.Parameter)
                self.text(pn, V.name, p.name)
                self.add(pn, V.hasValueType, V.VALUE_TYPES[p.value_type])
                lexical = p.lexical_value if p.value_type == "String" else p.lexical_value.strip()
                self.add(pn, V.value, Literal(lexical, XSD_FOR_VALUE_TYPE[p.value_type]))
                if p.unit is not None:
                    self.unit(pn, p.unit)
            self.series_sets(node, cat.series_sets)
            self.categories(node, cat.subcategories)

    def series_sets(self, owner: IRI, sets: list[SeriesSet]):
        for k, ss in enumerate(sets, 1):
            node = IriPolicy.child(owner, "seriesset", k)
            self.add(owner, V.hasSeriesSet, node)
            self.typed(node, V.SeriesSet)
            self.text(node, V.name, ss.name)
            self.add(node, V.length, Literal(str(ss.length), V.XSD_INTEGER))
            for s in ss.series:
                sn = self.reg.series_iris[id(s)]
                self.add(node, V.hasSeries, sn)
                self.series(sn, s)

    def series(self, node: IRI, s: Series):
        self.typed(node, V.Series, V.SignableItem)
        self.text(node, V.id, s.id)
        self.text(node, V.name, s.name)
        self.add(node, V.hasDependency, V.DEPENDENCIES[s.dependency])
        if s.value_type in V.VALUE_TYPES:
            self.add(node, V.hasValueType, V.VALUE_TYPES[s.value_type])
        if s.plot_scale:
            scale = V.PLOT_SCALES.get(s.plot_scale.lower())
            if scale is None:
                self.warn(f"series {s.id!r}: unknown plotScale {s.plot_scale!r}")
            else:
                self.add(node, V.hasPlotScale, scale)
        if s.unit is not None:
            self.unit(node, s.unit)
        dtype = XSD_FOR_VALUE_TYPE.get(s.value_type, V.XSD_STRING)
        for k, vs in enumerate(s.value_sets, 1):
            dp = IriPolicy.child(node, "valueset", k)
            self.add(node, V.hasMember, dp)
            self.typed(dp, V.DataPoint)
            if vs.start_index is not None:
                self.add(dp, V.startIndex, _lit(vs.start_index, V.XSD_INTEGER))
            if vs.end_index is not None:
                self.add(dp, V.endIndex, _lit(vs.end_index, V.XSD_INTEGER))
            if isinstance(vs, IndividualValues):
                self.add(dp, V.hasEncodingType, V.IndividualEncoding)
                self.add(dp, V.values, Literal(values_json(vs.values), V.RDF_JSON))
            elif isinstance(vs, AutoIncrementedValues):
                self.add(dp, V.hasEncodingType, V.AutoIncrementedEncoding)
                self.add(dp, V.start, Literal(vs.start, dtype))
                self.add(dp, V.increment, Literal(vs.increment, dtype))
            elif isinstance(vs, EncodedValues):
                self.add(dp, V.hasEncodingType, V.BinaryEncoding)
                payload = b"".join(vs.payload.read().split()).decode("ascii", "replace")
                self.add(dp, V.value, Literal(payload, V.XSD_BASE64))

    def agent(self, node: IRI, agent: Agent):
        cls = {"Human": V.HumanAgent, "Software": V.SoftwareAgent, "Hardware": V.HardwareAgent}[agent.kind]
        self.typed(node, V.Agent, cls)
        self.text(node, V.name, agent.name)
        for attr, prop in (("phone", V.phone), ("email", V.email),
                           ("operating_system", V.operatingSystem), ("version", V.version),
                           ("manufacturer", V.manufacturer), ("serial_number", V.serialNumber),
                           ("firmware_version", V.firmwareVersion)):
            self.text(node, prop, getattr(agent, attr))
        if agent.role:
            role = self.reg.role(agent.role)
            self.add(node, V.hasRole, role)
            self.typed(role, V.Role)
            self.add(role, V.hasRoleType, V.ROLE_TYPES[agent.role])


def _chain(em: _Emitter, nodes: list[IRI]):
    for a, b in zip(nodes, nodes[1:]):
        em.add(a, V.directlyPrecedes, b)
        em.add(b, V.directlyFollows, a)


def map_document(doc: AnimlDocument, policy: IriPolicy,
                 diagnostics: Optional[list[Diagnostic]] = None) -> Graph:
    """Map everything except reference sets (see :func:`promote_references`)."""
    diagnostics = doc.diagnostics if diagnostics is None else diagnostics
    reg = _Registry(doc, policy, diagnostics)
    graph = Graph()
    em = _Emitter(graph, reg, diagnostics)

    em.typed(reg.document, V.Document)
    if doc.doc_version:
        em.add(reg.document, V.version, Literal(doc.doc_version))
    for prop, node, cls in ((V.hasExperiment, reg.experiment, V.Experiment),
                            (V.hasSampleSet, reg.sampleset, V.SampleSet),
                            (V.hasAuditTrail, reg.audittrail, V.AuditTrail),
                            (V.hasSignatureSet, reg.signatureset, V.SignatureSet)):
        em.add(reg.document, prop, node)
        em.typed(node, cls)

    # samples and containment
    for sample, node in zip(doc.samples, reg.sample_iris):
        em.add(reg.sampleset, V.hasMember, node)
        em.typed(node, V.Sample, V.SignableItem)
        em.text(node, V.id, sample.id)
        em.text(node, V.name, sample.name)
        if sample.is_container:
            em.typed(node, V.Container)
            if sample.container_type:
                ctype = V.CONTAINER_TYPES.get(sample.container_type.lower())
                if ctype is None:
                    em.warn(f"sample {sample.id!r}: unknown containerType "
                            f"{sample.container_type!r}, mapped to OtherContainerType")
                    ctype = V.CONTAINER_TYPES["other"]
                em.add(node, V.hasContainerType, ctype)
            for rel in sample.container_relations:
                situation = IriPolicy.child(node, "contains", rel.child_id)
                em.typed(situation, V.SampleInContainer)
                em.add(situation, V.hasContainer, node)
                em.add(situation, V.hasSample, reg.samples[rel.child_id])
                em.text(situation, V.location, rel.location)
        em.categories(node, sample.categories)

    # experiment steps as a sequence
    for step, node in zip(doc.steps, reg.step_iris):
        em.add(reg.experiment, V.hasMember, node)
        em.typed(node, V.ExperimentStep, V.SignableItem)
        em.text(node, V.id, step.id)
        em.text(node, V.name, step.name)
        if step.technique is not None:
            t = step.technique
            tnode = IRI(t.uri) if t.uri and _SCHEME.match(t.uri) else policy.mint("technique", t.name)
            em.add(node, V.usesTechnique, tnode)
            em.typed(tnode, V.Technique)
            em.text(tnode, V.name, t.name)
            em.text(tnode, V.version, t.version)
        if step.method is not None:
            m = IriPolicy.child(node, "method")
            em.add(node, V.hasMethod, m)
            em.typed(m, V.Method)
            em.text(m, V.name, step.method.name)
            for k, agent in enumerate(step.method.agents, 1):
                a = IriPolicy.child(m, "agent", k)
                em.add(m, V.hasAgent, a)
                em.agent(a, agent)
            em.categories(m, step.method.categories)
        if step.infrastructure is not None:
            inf = IriPolicy.child(node, "infrastructure")
            em.add(node, V.hasInfrastructure, inf)
            em.typed(inf, V.Infrastructure)
            if step.infrastructure.timestamp:
                em.add(inf, V.timestamp, _datetime_lit(step.infrastructure.timestamp))
        for k, res in enumerate(step.results, 1):
            r = IriPolicy.child(node, "result", k)
            em.add(node, V.hasResult, r)
            em.typed(r, V.Result)
            em.text(r, V.name, res.name)
            em.categories(r, res.categories)
            em.series_sets(r, res.series_sets)
    _chain(em, reg.step_iris)

    # audit trail
    entries = []
    for k, entry in enumerate(doc.audit_trail, 1):
        e = policy.mint("audit", str(k))
        entries.append(e)
        em.add(reg.audittrail, V.hasMember, e)
        em.typed(e, V.AuditTrailEntry)
        if entry.timestamp:
            em.add(e, V.timestamp, _datetime_lit(entry.timestamp))
        em.text(e, V.reason, entry.reason)
        if entry.author is not None:
            a = IriPolicy.child(e, "author")
            em.add(e, V.hasAuthor, a)
            em.add(reg.audittrail, V.tracksAgent, a)
            em.agent(a, entry.author)
        for j, target in enumerate(entry.target_ids, 1):
            c = IriPolicy.child(e, "change", j)
            em.add(e, V.hasChange, c)
            em.typed(c, V.Change)
            em.add(c, V.hasAction, V.CHANGE_ACTIONS[entry.action])
            item = reg.resolve(target) or em.placeholder(target, f"audit trail entry {k}")
            em.add(c, V.target, item)
    _chain(em, entries)

    for k, sig in enumerate(doc.signatures, 1):
        s = policy.mint("signature", str(k))
        em.add(reg.signatureset, V.hasMember, s)
        em.typed(s, V.Signature)
        em.text(s, V.signerName, sig.signer_name)
        if sig.timestamp:
            em.add(s, V.timestamp, _datetime_lit(sig.timestamp))
        for target in sig.target_ids:
            item = reg.resolve(target) or em.placeholder(target, f"signature {k}")
            em.add(s, V.signs, item)
    return graph


def promote_references(doc: AnimlDocument, graph: Graph, policy: IriPolicy,
                       diagnostics: Optional[list[Diagnostic]] = None) -> Graph:
    """Turn the raw ID/IDREF reference sets into AnimlReferenceSet/AnimlReference nodes."""
    diagnostics = doc.diagnostics if diagnostics is None else diagnostics
    if graph.frozen:
        graph = graph.copy()
    # registry diagnostics were already reported by map_document
    reg = _Registry(doc, policy, [])
    em = _Emitter(graph, reg, diagnostics)
    set_no = 0
    ref_no = 0

    def emit_set(owner: IRI, rs: RawReferenceSet):
        nonlocal set_no, ref_no
        set_no += 1
        node = policy.mint("refset", str(set_no))
        em.add(owner, V.hasReferenceSet, node)
        em.typed(node, V.AnimlReferenceSet)
        if rs.subject_kind == "sampleset":
            subj = reg.sampleset
        elif rs.subject_kind == "experiment":
            subj = reg.experiment
        else:
            subj = reg.series.get(rs.subject_id) or em.placeholder(
                rs.subject_id, f"reference set {set_no} subject")
        em.add(node, V.subject, subj)
        for ref in rs.members:
            ref_no += 1
            r = policy.mint("ref", str(ref_no))
            em.add(node, V.hasMember, r)
            em.typed(r, V.AnimlReference)
            target = reg.resolve(ref.target_id, ref.target_kind) or em.placeholder(
                ref.target_id, f"reference {ref_no}")
            em.add(r, V.pointsTo, target)
            em.text(r, V.hasFunction, ref.role)
            if ref.data_purpose:
                em.add(r, V.hasUseCase, V.USE_CASES[ref.data_purpose])
            if ref.start_value is not None:
                em.add(r, V.startValue, _lit(ref.start_value - policy.index_base, V.XSD_INTEGER))
            if ref.end_value is not None:
                em.add(r, V.endValue, _lit(ref.end_value - policy.index_base, V.XSD_INTEGER))

    for step, node in zip(doc.steps, reg.step_iris):
        if step.infrastructure is not None:
            for rs in step.infrastructure.ref_sets:
                emit_set(IriPolicy.child(node, "infrastructure"), rs)
        for k, res in enumerate(step.results, 1):
            for rs in res.ref_sets:
                emit_set(IriPolicy.child(node, "result", k), rs)
    return graph


def convert(doc: AnimlDocument, policy: IriPolicy) -> Graph:
    """map_document + promote_references, returning a frozen graph."""
    graph = map_document(doc, policy)
    return promote_references(doc, graph, policy).freeze()


# -- technique descriptors ---------------------------------------------------

class TechniqueDescriptorError(ValueError):
    pass


SPEC_KINDS = {
    "ParameterSpecification": V.ParameterSpecification,
    "SeriesSpecification": V.SeriesSpecification,
    "SeriesSetSpecification": V.SeriesSetSpecification,
    "DataPointSpecification": V.DataPointSpecification,
    "AnimlReferenceSpecification": V.AnimlReferenceSpecification,
    "ResultSpecification": V.ResultSpecification,
}


@dataclass
class SpecEntry:
    kind: str
    fields: list[tuple[str, str]] = field(default_factory=list)
    line: int = 0

    def get(self, key: str, default=None):
        for k, v in self.fields:
            if k == key:
                return v
        return default

    def getall(self, key: str) -> list[str]:
        return [v for k, v in self.fields if k == key]


@dataclass
class TechniqueDescriptor:
    name: str
    version: Optional[str] = None
    citation: Optional[str] = None
    is_implemented: Optional[bool] = None
    extends: Optional[str] = None
    iri: Optional[str] = None
    requires_roles: list[str] = field(default_factory=list)
    specs: list[SpecEntry] = field(default_factory=list)


def _bool(text: str, line: int) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise TechniqueDescriptorError(f"line {line}: expected a boolean, got {text!r}")


def parse_technique_descriptor(text: str) -> TechniqueDescriptor:
    """Read the line-oriented technique sidecar format (see docs/technique-descriptor.md)."""
    header: list[tuple[str, str, int]] = []
    specs: list[SpecEntry] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            kind = line[1:-1].strip()
            if kind not in SPEC_KINDS:
                raise TechniqueDescriptorError(
                    f"line {lineno}: unknown specification subtype {kind!r}; "
                    f"expected one of {', '.join(SPEC_KINDS)}")
            specs.append(SpecEntry(kind, line=lineno))
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise TechniqueDescriptorError(f"line {lineno}: expected 'key: value'")
        key, value = key.strip(), value.strip()
        if specs:
            specs[-1].fields.append((key, value))
        else:
            header.append((key, value, lineno))

    desc = TechniqueDescriptor(name="")
    for key, value, lineno in header:
        if key == "name":
            desc.name = value
        elif key == "version":
            desc.version = value
        elif key == "citation":
            desc.citation = value
        elif key == "isImplemented":
            desc.is_implemented = _bool(value, lineno)
        elif key == "extends":
            desc.extends = value.strip("<>")
        elif key == "iri":
            desc.iri = value.strip("<>")
        elif key == "requiresRole":
            desc.requires_roles.append(value)
        else:
            raise TechniqueDescriptorError(f"line {lineno}: unknown technique key {key!r}")
    if not desc.name:
        raise TechniqueDescriptorError("technique descriptor has no name")
    desc.specs = specs
    return desc


def _float_lit(text: str, line: int) -> Literal:
    try:
        float(text)
    except ValueError:
        raise TechniqueDescriptorError(f"line {line}: {text!r} is not a number") from None
    return Literal(text, V.XSD_DOUBLE)


def map_technique(desc: TechniqueDescriptor, policy: IriPolicy) -> Graph:
    graph = Graph()

    def add(s, p, o):
        graph.add(Triple(s, p, o))

    tech = IRI(desc.iri) if desc.iri else policy.mint("technique", desc.name)
    add(tech, V.RDF_TYPE, V.Technique)
    add(tech, V.name, Literal(desc.name))
    if desc.version:
        add(tech, V.version, Literal(desc.version))
    if desc.citation:
        add(tech, V.citation, Literal(desc.citation))
    if desc.is_implemented is not None:
        add(tech, V.isImplemented, Literal("true" if desc.is_implemented else "false", V.XSD_BOOLEAN))
    if desc.extends:
        add(tech, V.extends, IRI(desc.extends))
    for role_name in desc.requires_roles:
        if role_name not in V.ROLE_TYPES:
            raise TechniqueDescriptorError(f"unknown role {role_name!r}")
        role = policy.mint("role", role_name)
        add(tech, V.requiresRole, role)
        add(role, V.RDF_TYPE, V.Role)
        add(role, V.hasRoleType, V.ROLE_TYPES[role_name])

    nodes: list[tuple[SpecEntry, IRI]] = []
    for k, spec in enumerate(desc.specs, 1):
        node = IriPolicy.child(tech, "spec", k)
        nodes.append((spec, node))
        add(tech, V.hasSpecification, node)
        add(node, V.RDF_TYPE, V.Specification)
        add(node, V.RDF_TYPE, SPEC_KINDS[spec.kind])
        if spec.get("name"):
            add(node, V.name, Literal(spec.get("name")))
        if spec.get("required") is not None:
            add(node, V.isRequired,
                Literal("true" if _bool(spec.get("required"), spec.line) else "false", V.XSD_BOOLEAN))
        if spec.kind == "ParameterSpecification":
            vt = spec.get("valueType")
            if vt is not None:
                if vt not in V.VALUE_TYPES:
                    raise TechniqueDescriptorError(f"line {spec.line}: unknown valueType {vt!r}")
                add(node, V.allowedValueType, V.VALUE_TYPES[vt])
            if spec.get("min") is not None:
                add(node, V.minValue, _float_lit(spec.get("min"), spec.line))
            if spec.get("max") is not None:
                add(node, V.maxValue, _float_lit(spec.get("max"), spec.line))
        elif spec.kind == "SeriesSpecification":
            if spec.get("unit"):
                unit = IriPolicy.child(node, "unit")
                add(node, V.hasUnit, unit)
                add(unit, V.RDF_TYPE, V.Unit)
                add(unit, V.label, Literal(spec.get("unit")))
            if spec.get("plotScale"):
                scale = V.PLOT_SCALES.get(spec.get("plotScale").lower())
                if scale is None:
                    raise TechniqueDescriptorError(
                        f"line {spec.line}: unknown plotScale {spec.get('plotScale')!r}")
                add(node, V.hasPlotScale, scale)
            for j, enc in enumerate(spec.getall("dataPoint"), 1):
                if enc not in V.ENCODINGS:
                    raise TechniqueDescriptorError(f"line {spec.line}: unknown encoding {enc!r}")
                dps = IriPolicy.child(node, "datapoint", j)
                add(node, V.hasDataPointSpecification, dps)
                add(dps, V.RDF_TYPE, V.Specification)
                add(dps, V.RDF_TYPE, V.DataPointSpecification)
                add(dps, V.hasEncodingType, V.ENCODINGS[enc])
        elif spec.kind == "DataPointSpecification":
            enc = spec.get("encoding")
            if enc is not None:
                if enc not in V.ENCODINGS:
                    raise TechniqueDescriptorError(f"line {spec.line}: unknown encoding {enc!r}")
                add(node, V.hasEncodingType, V.ENCODINGS[enc])
        elif spec.kind == "AnimlReferenceSpecification":
            if spec.get("function"):
                add(node, V.hasFunction, Literal(spec.get("function")))

    by_name = {s.get("name"): n for s, n in nodes if s.get("name")}
    for spec, node in nodes:
        if spec.kind == "SeriesSetSpecification":
            for member in spec.getall("member"):
                if member not in by_name:
                    raise TechniqueDescriptorError(
                        f"line {spec.line}: member {member!r} names no specification")
                add(node, V.hasMember, by_name[member])
    return graph


def _parameters_below(graph: Graph, node: Node):
    for p in graph.objects(node, V.hasParameter):
        yield p
    for child in graph.objects(node, V.hasCategory):
        yield from _parameters_below(graph, child)


def link_parameter_specs(graph: Graph) -> Graph:
    """Link each step's parameters to same-named ParameterSpecifications of its technique."""
    if graph.frozen:
        graph = graph.copy()
    new = []
    for step in graph.instances(V.ExperimentStep):
        specs: dict[str, Node] = {}
        for tech in graph.objects(step, V.usesTechnique):
            for spec in graph.objects(tech, V.hasSpecification):
                if graph.has_type(spec, V.ParameterSpecification):
                    name = graph.value(spec, V.name)
                    if name is not None:
                        specs.setdefault(name.lexical, spec)
        if not specs:
            continue
        holders = graph.objects(step, V.hasMethod) + graph.objects(step, V.hasResult)
        for holder in holders:
            for p in _parameters_below(graph, holder):
                name = graph.value(p, V.name)
                if name is not None and name.lexical in specs:
                    new.append(Triple(p, V.hasSpecification, specs[name.lexical]))
    graph.add_all(new)
    return graph
