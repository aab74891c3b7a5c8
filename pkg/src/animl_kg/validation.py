"""Closed-world constraint checks over AnIML knowledge graphs.

Checks 1-20 guard against anti-pattern instances (association cycles,
overlapping types, relation specialisation, imprecise abstraction,
repeatable relators); check 21 is the reference-set scoping shape. Each
check is a read-only traversal returning every violation it finds.
"""

from __future__ import annotations

import hashlib
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from animl_kg import vocab as V
from animl_kg.graph import IRI, Graph, Literal, Node, Triple, transitive_reachable
from animl_kg.rdfio import serialize

SCOPING_MESSAGE = "Subject type not match reference target."


@dataclass(frozen=True)
class Violation:
    check_id: int
    focus: Node
    message: str
    evidence: tuple[Triple, ...]

    def __post_init__(self):
        if not self.evidence:
            raise ValueError("a violation needs at least one evidence triple")

    def sort_key(self):
        return (self.check_id, self.focus.n3(), self.message)


@dataclass(frozen=True)
class CheckSpec:
    id: int
    anti_pattern: str
    description: str
    mechanism: str
    run: Callable[["_Context"], list[Violation]] = field(repr=False, compare=False)
    severity: str = "violation"


@dataclass
class ValidationReport:
    violations: list[Violation]
    checks_run: list[int]
    fingerprint: str

    @property
    def conforms(self) -> bool:
        return not self.violations

    def by_check(self, check_id: int) -> list[Violation]:
        return [v for v in self.violations if v.check_id == check_id]


class UnknownCheckError(ValueError):
    pass


class _Context:
    """Graph plus lazily shared precomputations (step ordering, references)."""

    def __init__(self, graph: Graph):
        self.g = graph
        self._reach: Optional[dict[Node, set[Node]]] = None
        self._step_refs: Optional[dict[Node, dict[str, list]]] = None

    def T(self, s, p, o) -> Triple:
        return Triple(s, p, o)

    def is_a(self, node: Node, cls: IRI) -> bool:
        return self.g.has_type(node, cls)

    def is_agent(self, node: Node) -> bool:
        return any(self.is_a(node, c) for c in (V.Agent, V.HumanAgent, V.SoftwareAgent, V.HardwareAgent))

    @property
    def reach(self) -> dict[Node, set[Node]]:
        """Steps reachable from each step over directlyPrecedes (shared by checks 17-19)."""
        if self._reach is None:
            self._reach = {s: transitive_reachable(self.g, s, V.directlyPrecedes)
                           for s in self.g.instances(V.ExperimentStep)}
        return self._reach

    def refs_below(self, owner: Node) -> list[tuple[Node, Node, Triple]]:
        """(reference, target, pointsTo triple) for references in owner's reference sets."""
        out = []
        for rs in self.g.objects(owner, V.hasReferenceSet):
            for r in self.g.objects(rs, V.hasMember):
                for t in self.g.match(r, V.pointsTo, None):
                    out.append((r, t.object, t))
        return out

    @property
    def step_refs(self) -> dict[Node, dict[str, list]]:
        """Per step: references held by its infrastructure and by its results."""
        if self._step_refs is None:
            self._step_refs = {}
            for s in self.g.instances(V.ExperimentStep):
                infra = [x for inf in self.g.objects(s, V.hasInfrastructure) for x in self.refs_below(inf)]
                results = [x for res in self.g.objects(s, V.hasResult) for x in self.refs_below(res)]
                self._step_refs[s] = {"infrastructure": infra, "results": results}
        return self._step_refs

    def use_case(self, ref: Node, case: IRI) -> Optional[Triple]:
        t = Triple(ref, V.hasUseCase, case)
        return t if t in self.g else None


# -- checks ----------------------------------------------------------------

def _check_cycles(ctx: _Context) -> list[Violation]:
    found: dict[Node, list[Triple]] = defaultdict(list)
    preds: dict[Node, list[str]] = defaultdict(list)
    for pred, label in ((V.directlyPrecedes, "directlyPrecedes"), (V.directlyFollows, "directlyFollows")):
        starts = {t.subject for t in ctx.g.match(None, pred, None)}
        for n in sorted(starts, key=lambda x: x.n3()):
            if n in transitive_reachable(ctx.g, n, pred):
                preds[n].append(label)
                for t in ctx.g.match(n, pred, None):
                    if t.object == n or n in transitive_reachable(ctx.g, t.object, pred):
                        found[n].append(t)
    return [Violation(1, n, f"{n.n3()} lies on a {' and '.join(preds[n])} cycle", tuple(ev))
            for n, ev in found.items()]


def _check_mutual_inverse(ctx: _Context) -> list[Violation]:
    out = []
    g = ctx.g
    for t in g.match(None, V.directlyPrecedes, None):
        a, b = t.subject, t.object
        inverse = Triple(b, V.directlyFollows, a)
        if inverse not in g:
            out.append(Violation(2, a, f"{a.n3()} directly precedes {b.n3()} but "
                                       f"{b.n3()} does not directly follow it", (t,)))
        both = Triple(a, V.directlyFollows, b)
        if both in g:
            out.append(Violation(2, a, f"{a.n3()} both directly precedes and directly follows {b.n3()}",
                                 (t, both)))
    for t in g.match(None, V.directlyFollows, None):
        b, a = t.subject, t.object
        if Triple(a, V.directlyPrecedes, b) not in g:
            out.append(Violation(2, b, f"{b.n3()} directly follows {a.n3()} but "
                                       f"{a.n3()} does not directly precede it", (t,)))
    return out


def _check_scope_alignment(ctx: _Context) -> list[Violation]:
    g = ctx.g
    out = []
    for r in g.instances(V.AnimlReference):
        sets = [rs for rs in g.subjects(V.hasMember, r) if ctx.is_a(rs, V.AnimlReferenceSet)]
        for pt in g.match(r, V.pointsTo, None):
            x = pt.object
            containers = [s for s in g.subjects(V.hasMember, x) if not ctx.is_a(s, V.AnimlReferenceSet)]
            if not containers:
                continue
            scoped = any(
                x in transitive_reachable(g, subj, V.hasMember)
                for rs in sets for subj in g.objects(rs, V.subject)
            )
            if scoped:
                continue
            evidence = [pt] + [Triple(s, V.hasMember, x) for s in containers]
            evidence += [t for rs in sets for t in g.match(rs, V.subject, None)]
            out.append(Violation(
                3, r, f"reference {r.n3()} points to {x.n3()} but none of its reference sets "
                      f"has a subject containing it", tuple(evidence)))
    return out


def _property_exclusion(check_id: int, agent_cls: IRI, props: Sequence[IRI], what: str):
    def run(ctx: _Context) -> list[Violation]:
        out = []
        for a in ctx.g.instances(agent_cls):
            ev = [t for p in props for t in ctx.g.match(a, p, None)]
            if ev:
                out.append(Violation(check_id, a, f"{agent_cls.value.rsplit('/', 1)[-1]} {a.n3()} has {what}",
                                     tuple(ev)))
        return out

    return run


def _check_hardware_author(ctx: _Context) -> list[Violation]:
    out = []
    for a in ctx.g.instances(V.HardwareAgent):
        for hr in ctx.g.match(a, V.hasRole, None):
            r = hr.object
            if r == V.Author:
                out.append(Violation(6, a, f"hardware agent {a.n3()} holds the Author role", (hr,)))
                continue
            for rt in ctx.g.match(r, V.hasRoleType, V.Author):
                out.append(Violation(6, a, f"hardware agent {a.n3()} holds the Author role", (hr, rt)))
    return out


def _check_seriesset_spec_members(ctx: _Context) -> list[Violation]:
    out = []
    for c in ctx.g.instances(V.SeriesSetSpecification):
        for t in ctx.g.match(c, V.hasMember, None):
            if not ctx.is_a(t.object, V.SeriesSpecification):
                out.append(Violation(7, c, f"series set specification {c.n3()} includes "
                                           f"{t.object.n3()}, which is not a SeriesSpecification", (t,)))
    return out


def _check_datapoint_spec_cardinality(ctx: _Context) -> list[Violation]:
    out = []
    allowed = {V.AutoIncrementedEncoding, V.IndividualEncoding}
    for s in ctx.g.instances(V.SeriesSpecification):
        links = ctx.g.match(s, V.hasDataPointSpecification, None)
        if len(links) <= 1:
            continue
        encodings = [ctx.g.objects(t.object, V.hasEncodingType) for t in links]
        if len(links) == 2 and all(len(e) == 1 for e in encodings) \
                and {e[0] for e in encodings} == allowed:
            continue
        out.append(Violation(8, s, f"series specification {s.n3()} has {len(links)} data point "
                                   "specifications that are not one AutoIncremented plus one Individual",
                             tuple(links)))
    return out


def _check_required_reference_spec(ctx: _Context) -> list[Violation]:
    g = ctx.g
    out = []
    for step in g.instances(V.ExperimentStep):
        refs = ctx.step_refs[step]["infrastructure"] + ctx.step_refs[step]["results"]
        for ut in g.match(step, V.usesTechnique, None):
            for hs in g.match(ut.object, V.hasSpecification, None):
                spec = hs.object
                if not ctx.is_a(spec, V.AnimlReferenceSpecification):
                    continue
                req = [t for t in g.match(spec, V.isRequired, None)
                       if isinstance(t.object, Literal) and t.object.to_python() is True]
                if not req:
                    continue
                function = g.value(spec, V.hasFunction)
                ok = any(function is None or Triple(r, V.hasFunction, function) in g for r, _, _ in refs)
                if not ok:
                    wanted = f" with function {function.lexical!r}" if function is not None else ""
                    out.append(Violation(9, spec, f"required reference specification {spec.n3()} has no "
                                                  f"reference{wanted} in step {step.n3()}",
                                         (ut, hs, req[0])))
    return out


def _check_required_role_assigned(ctx: _Context) -> list[Violation]:
    out = []
    for t in ctx.g.match(None, V.requiresRole, None):
        r = t.object
        if not any(ctx.is_agent(a) for a in ctx.g.subjects(V.hasRole, r)):
            out.append(Violation(10, r, f"role {r.n3()} is required but no agent holds it", (t,)))
    return out


def _check_container_type(ctx: _Context) -> list[Violation]:
    out = []
    for c in ctx.g.instances(V.Container):
        situated = any(ctx.is_a(s, V.SampleInContainer) for s in ctx.g.subjects(V.hasContainer, c))
        if situated:
            continue
        bad = [t for t in ctx.g.match(c, V.hasContainerType, None) if t.object != V.Simple]
        if bad:
            out.append(Violation(11, c, f"container {c.n3()} has no SampleInContainer situation "
                                        "but a container type other than Simple", tuple(bad)))
    return out


def _check_increment_float(ctx: _Context) -> list[Violation]:
    out = []
    for d in ctx.g.instances(V.DataPoint):
        for t in ctx.g.match(d, V.increment, None):
            if not (isinstance(t.object, Literal) and t.object.datatype in V.FLOAT_DATATYPES):
                out.append(Violation(12, d, f"increment data point {d.n3()} has non-float increment "
                                            f"{t.object.n3()}", (t,)))
    return out


def _check_binary_value(ctx: _Context) -> list[Violation]:
    out = []
    for enc in ctx.g.match(None, V.hasEncodingType, V.BinaryEncoding):
        d = enc.subject
        if not ctx.is_a(d, V.DataPoint):
            continue
        for t in ctx.g.match(d, V.value, None):
            if not (isinstance(t.object, Literal) and t.object.datatype in V.BINARY_DATATYPES):
                out.append(Violation(13, d, f"binary-encoded data point {d.n3()} has non-binary value "
                                            f"{t.object.n3()}", (enc, t)))
    return out


def _check_unique_ids(ctx: _Context) -> list[Violation]:
    holders: dict[str, list[Triple]] = defaultdict(list)
    for t in ctx.g.match(None, V.id, None):
        key = t.object.lexical if isinstance(t.object, Literal) else t.object.n3()
        holders[key].append(t)
    out = []
    for value, triples in holders.items():
        nodes = {t.subject for t in triples}
        if len(nodes) < 2:
            continue
        for n in nodes:
            own = [t for t in triples if t.subject == n]
            others = [t for t in triples if t.subject != n]
            out.append(Violation(14, n, f"aml:id {value!r} is shared by {len(nodes)} nodes",
                                 tuple(own + others)))
    return out


def _check_minmax_types(ctx: _Context) -> list[Violation]:
    out = []
    for ps in ctx.g.instances(V.ParameterSpecification):
        bounds = ctx.g.match(ps, V.minValue, None) + ctx.g.match(ps, V.maxValue, None)
        if not bounds:
            continue
        types = ctx.g.match(ps, V.allowedValueType, None)
        if types and all(t.object in V.NUMERIC_VALUE_TYPES for t in types):
            continue
        out.append(Violation(15, ps, f"parameter specification {ps.n3()} has min/max but its value "
                                     "type is not Int or Float", tuple(bounds + types)))
    return out


def _check_parameter_range(ctx: _Context) -> list[Violation]:
    from animl_kg.query import _numeric

    out = []
    for p in ctx.g.instances(V.Parameter):
        for hs in ctx.g.match(p, V.hasSpecification, None):
            ps = hs.object
            for vt in ctx.g.match(p, V.value, None):
                v = _numeric(vt.object)
                if v is None:
                    continue
                for bound_prop, test in ((V.minValue, lambda b: v < b), (V.maxValue, lambda b: v > b)):
                    for bt in ctx.g.match(ps, bound_prop, None):
                        b = _numeric(bt.object)
                        if b is not None and test(b):
                            out.append(Violation(16, p, f"parameter {p.n3()} value {v} is outside "
                                                        f"the range of {ps.n3()}", (vt, hs, bt)))
    return out


def _check_forward_step_reference(ctx: _Context) -> list[Violation]:
    out = []
    for s, refs in ctx.step_refs.items():
        later = ctx.reach.get(s, set())
        for r, target, pt in refs["infrastructure"]:
            if target != s and target in later and ctx.is_a(target, V.ExperimentStep):
                inf = [t for t in ctx.g.match(s, V.hasInfrastructure, None)]
                out.append(Violation(17, s, f"infrastructure of {s.n3()} references later step {target.n3()}",
                                     tuple([pt] + inf)))
    return out


def _check_consumed_earlier(ctx: _Context) -> list[Violation]:
    out = []
    for s, refs in ctx.step_refs.items():
        earlier = [e for e, later in ctx.reach.items() if s in later and e != s]
        for r, x, pt in refs["infrastructure"]:
            if not ctx.is_a(x, V.Sample):
                continue
            for e in earlier:
                e_refs = ctx.step_refs[e]["infrastructure"] + ctx.step_refs[e]["results"]
                for re_, xe, pte in e_refs:
                    uc = ctx.use_case(re_, V.Consumed)
                    if xe == x and uc is not None:
                        out.append(Violation(18, s, f"infrastructure of {s.n3()} references sample "
                                                    f"{x.n3()} consumed by earlier step {e.n3()}",
                                             (pt, pte, uc)))
    return out


def _check_derived_elsewhere(ctx: _Context) -> list[Violation]:
    out = []
    producers: dict[Node, list[tuple[Node, Triple, Triple]]] = defaultdict(list)
    for s, refs in ctx.step_refs.items():
        for r, x, pt in refs["infrastructure"] + refs["results"]:
            uc = ctx.use_case(r, V.Produced)
            if uc is not None:
                producers[x].append((s, pt, uc))
    for s, refs in ctx.step_refs.items():
        later = ctx.reach.get(s, set())
        for r, x, pt in refs["results"]:
            if not ctx.is_a(x, V.Sample):
                continue
            for t, pt2, uc in producers.get(x, ()):
                if t != s and t not in later:
                    out.append(Violation(19, s, f"results of {s.n3()} reference sample {x.n3()} "
                                                f"already derived by step {t.n3()}", (pt, pt2, uc)))
    return out


def _check_intra_step_cross_reference(ctx: _Context) -> list[Violation]:
    out = []
    for s, refs in ctx.step_refs.items():
        for r_inf, x, pt_inf in refs["infrastructure"]:
            for r_res, y, pt_res in refs["results"]:
                if x != y:
                    continue
                produced = ctx.use_case(r_res, V.Produced)
                if produced is not None:
                    out.append(Violation(20, s, f"infrastructure of {s.n3()} references {x.n3()}, "
                                                "which its own results derive", (pt_inf, pt_res, produced)))
                consumed = ctx.use_case(r_inf, V.Consumed)
                if consumed is not None:
                    out.append(Violation(20, s, f"results of {s.n3()} reference {x.n3()}, "
                                                "which its own infrastructure consumes", (pt_res, pt_inf, consumed)))
    return out


_SCOPING_CONFIGURATIONS = (
    (V.SampleSet, (V.Sample,)),
    (V.Experiment, (V.ExperimentStep,)),
    # slice references point at the Series itself
    (V.Series, (V.DataPoint, V.Series)),
)


def _check_reference_set_scoping(ctx: _Context) -> list[Violation]:
    g = ctx.g
    out = []
    for rs in g.instances(V.AnimlReferenceSet):
        subjects = g.match(rs, V.subject, None)
        members = g.match(rs, V.hasMember, None)
        held = 0
        for subject_cls, target_classes in _SCOPING_CONFIGURATIONS:
            if not subjects or not all(ctx.is_a(t.object, subject_cls) for t in subjects):
                continue
            if all(any(ctx.is_a(pt.object, c) for c in target_classes)
                   for m in members for pt in g.match(m.object, V.pointsTo, None)):
                held += 1
        if held != 1:
            evidence = list(subjects) or [Triple(rs, V.RDF_TYPE, V.AnimlReferenceSet)]
            for m in members:
                evidence.append(m)
                evidence.extend(g.match(m.object, V.pointsTo, None))
            out.append(Violation(21, rs, SCOPING_MESSAGE, tuple(evidence)))
    return out


CHECKS: dict[int, CheckSpec] = {c.id: c for c in (
    CheckSpec(1, "AssCyc", "Step ordering relations must not form cycles.", "Cycle detection",
              _check_cycles),
    CheckSpec(2, "AssCyc", "directlyPrecedes and directlyFollows must be exact inverses, and no "
                           "node may both precede and follow the same node.", "Mutual-inverse check",
              _check_mutual_inverse),
    CheckSpec(3, "RelSpec", "A reference to a collection member needs a reference set whose "
                            "subject contains that member.", "Scope alignment", _check_scope_alignment),
    CheckSpec(4, "BinOver", "Human agents carry no operating system or software version.",
              "Property exclusion",
              _property_exclusion(4, V.HumanAgent, (V.operatingSystem, V.version),
                                  "an operating system or version")),
    CheckSpec(5, "BinOver", "Hardware agents carry no phone number or email address.",
              "Property exclusion",
              _property_exclusion(5, V.HardwareAgent, (V.phone, V.email), "a phone or email")),
    CheckSpec(6, "RelOver", "Hardware agents never hold the Author role.", "Role-type restriction",
              _check_hardware_author),
    CheckSpec(7, "ImpAbs", "Series set specifications contain only series specifications.",
              "Type restriction", _check_seriesset_spec_members),
    CheckSpec(8, "ImpAbs", "A series specification has at most one data point specification, or "
                           "exactly an AutoIncremented/Individual pair.", "Cardinality + type",
              _check_datapoint_spec_cardinality),
    CheckSpec(9, "RelSpec", "Every required reference specification is matched by an actual "
                            "reference in each step using the technique.", "Conditional existence",
              _check_required_reference_spec),
    CheckSpec(10, "ImpAbs", "Every required role is held by some agent.", "Completeness check",
              _check_required_role_assigned),
    CheckSpec(11, "ImpAbs", "Containers outside any SampleInContainer situation are Simple.",
              "Conditional type", _check_container_type),
    CheckSpec(12, "ImpAbs", "Increment values of data points are floats.", "Datatype restriction",
              _check_increment_float),
    CheckSpec(13, "ImpAbs", "Binary-encoded data points hold binary literals.", "Datatype restriction",
              _check_binary_value),
    CheckSpec(14, "RepRel", "aml:id values are unique across the graph.", "Uniqueness check",
              _check_unique_ids),
    CheckSpec(15, "ImpAbs", "Only Int or Float parameter specifications declare min/max.",
              "Conditional datatype", _check_minmax_types),
    CheckSpec(16, "ImpAbs", "Parameter values lie within the min/max of their specification.",
              "Range check", _check_parameter_range),
    CheckSpec(17, "RelSpec", "Infrastructure references no step that comes later in the sequence.",
              "Ordering check", _check_forward_step_reference),
    CheckSpec(18, "RelSpec", "Infrastructure references no sample consumed by an earlier step.",
              "Temporal dependency", _check_consumed_earlier),
    CheckSpec(19, "RelSpec", "Results reference no sample already derived by a different step.",
              "Temporal dependency", _check_derived_elsewhere),
    CheckSpec(20, "RelOver", "Within one step, infrastructure and results do not cross-reference "
                             "samples the step derives or consumes.", "Cross-ref. exclusion",
              _check_intra_step_cross_reference),
    CheckSpec(21, "Scoping", "A reference set's subject type matches the types of its references' "
                             "targets.", "Reference set scoping", _check_reference_set_scoping),
)}


def fingerprint(graph: Graph) -> str:
    return hashlib.sha256(serialize(graph, "ntriples")).hexdigest()


def validate(graph: Graph, checks: Optional[Iterable[int]] = None,
             workers: Optional[int] = None) -> ValidationReport:
    """Run the selected checks (all by default) and collect sorted violations.

    With ``workers`` > 1 the checks run on a thread pool; the merged result
    is identical to a sequential run.
    """
    ids = sorted(CHECKS) if checks is None else sorted(set(checks))
    unknown = [i for i in ids if i not in CHECKS]
    if unknown:
        raise UnknownCheckError(f"unknown check id(s) {unknown}; valid ids are 1..{max(CHECKS)}")
    ctx = _Context(graph)
    # warm shared caches before fanning out
    if workers and workers > 1:
        ctx.reach, ctx.step_refs  # noqa: B018
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda i: CHECKS[i].run(ctx), ids))
    else:
        results = [CHECKS[i].run(ctx) for i in ids]
    violations = sorted({v for batch in results for v in batch}, key=Violation.sort_key)
    return ValidationReport(violations, ids, fingerprint(graph))


def parse_check_ids(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UnknownCheckError(f"check list must be comma-separated integers: {text!r}") from None


# -- reports -----------------------------------------------------------------

REPORT_BASE = "urn:x-animl-kg:report"


def emit_report(report: ValidationReport, format: str = "text") -> bytes:
    if format == "text":
        if report.conforms:
            return b"conforms: true\n"
        lines = ["conforms: false"]
        for v in report.violations:
            focus = v.focus.value if isinstance(v.focus, IRI) else v.focus.n3()
            lines.append(f"check {v.check_id:02d}\t{focus}\t{v.message}")
        return ("\n".join(lines) + "\n").encode("utf-8")
    if format != "turtle":
        raise ValueError(f"unknown report format {format!r}")

    sh = lambda local: IRI(V.SH_NS + local)  # noqa: E731
    g = Graph(prefixes={"sh": V.SH_NS})
    node = IRI(REPORT_BASE)
    g.add(Triple(node, V.RDF_TYPE, sh("ValidationReport")))
    g.add(Triple(node, sh("conforms"), Literal("true" if report.conforms else "false", V.XSD_BOOLEAN)))
    for k, v in enumerate(report.violations, 1):
        r = IRI(f"{REPORT_BASE}/result/{k}")
        g.add(Triple(node, sh("result"), r))
        g.add(Triple(r, V.RDF_TYPE, sh("ValidationResult")))
        g.add(Triple(r, sh("focusNode"), v.focus))
        g.add(Triple(r, sh("resultMessage"), Literal(v.message)))
        g.add(Triple(r, sh("resultSeverity"), sh("Violation")))
        g.add(Triple(r, sh("sourceShape"), IRI(f"urn:x-animl-kg:check/{v.check_id}")))
    return serialize(g, "turtle")
