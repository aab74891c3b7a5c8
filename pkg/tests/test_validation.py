from __future__ import annotations

import random
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from animl_kg import vocab as V
from animl_kg.graph import IRI, Graph, Literal, Triple
from animl_kg.rdfio import load, parse_rdf
from animl_kg.validation import (CHECKS, SCOPING_MESSAGE, UnknownCheckError, emit_report,
                                 parse_check_ids, validate)

from conftest import FIXTURES, ex, add_step_reference, step_chain

CHECK_IDS = list(range(1, 22))


def fixture_pair(n: int) -> tuple[Graph, Graph, set[IRI]]:
    d = FIXTURES / "checks" / f"{n:02d}"
    neg_text = (d / "negative.ttl").read_text()
    faults = {IRI(m) for m in re.findall(r"^# fault: <([^>]+)>", neg_text, re.M)}
    return load(d / "positive.ttl"), load(d / "negative.ttl"), faults


@pytest.mark.parametrize("n", CHECK_IDS)
def test_positive_fixture_conforms(n):
    pos, _, _ = fixture_pair(n)
    report = validate(pos)
    assert report.conforms, emit_report(report).decode()


@pytest.mark.parametrize("n", CHECK_IDS)
def test_negative_fixture_isolates_its_check(n):
    _, neg, faults = fixture_pair(n)
    report = validate(neg)
    assert report.by_check(n)
    assert faults and faults <= {v.focus for v in report.by_check(n)}
    other = [v for v in report.violations if v.check_id != n and v.focus in faults]
    assert other == []


def test_registry_matches_anti_pattern_table():
    expected = {1: "AssCyc", 2: "AssCyc", 3: "RelSpec", 4: "BinOver", 5: "BinOver", 6: "RelOver",
                7: "ImpAbs", 8: "ImpAbs", 9: "RelSpec", 10: "ImpAbs", 11: "ImpAbs", 12: "ImpAbs",
                13: "ImpAbs", 14: "RepRel", 15: "ImpAbs", 16: "ImpAbs", 17: "RelSpec", 18: "RelSpec",
                19: "RelSpec", 20: "RelOver", 21: "Scoping"}
    assert {i: c.anti_pattern for i, c in CHECKS.items()} == expected
    assert CHECKS[17].mechanism == "Ordering check"


def test_cycle_check_counts():
    g, steps = step_chain(3)
    assert validate(g, [1]).conforms
    g2, (a, b) = step_chain(2)
    g2.add(Triple(b, V.directlyPrecedes, a))
    g2.add(Triple(a, V.directlyFollows, b))
    assert {v.focus for v in validate(g2, [1]).violations} == {a, b}
    assert len(validate(g2, [1]).violations) == 2


def test_mutual_inverse_both_directions():
    g, (a, b) = step_chain(2)
    g.remove(Triple(b, V.directlyFollows, a))
    (v,) = validate(g, [2]).violations
    assert v.focus == a and "does not directly follow" in v.message


def test_scoping_message_is_exact():
    _, neg, _ = fixture_pair(21)
    (v,) = validate(neg, [21]).violations
    assert v.message == "Subject type not match reference target."
    assert SCOPING_MESSAGE.encode() in emit_report(validate(neg, [21]))


def test_scoping_accepts_series_slices():
    g = load(FIXTURES / "refpattern.ttl")
    assert validate(g, [21]).conforms


def test_scoping_rejects_two_matching_configurations():
    # a subject typed both SampleSet and Experiment with no members satisfies two shapes
    g = Graph()
    rs, subj = ex("rs"), ex("both")
    g.add(Triple(rs, V.RDF_TYPE, V.AnimlReferenceSet)).add(Triple(rs, V.subject, subj))
    g.add(Triple(subj, V.RDF_TYPE, V.SampleSet)).add(Triple(subj, V.RDF_TYPE, V.Experiment))
    (v,) = validate(g, [21]).violations
    assert v.message == SCOPING_MESSAGE


def test_unordered_steps_producing_same_sample():
    g = Graph()
    for s in ("x", "y"):
        g.add(Triple(ex(s), V.RDF_TYPE, V.ExperimentStep))
    g.add(Triple(ex("smp"), V.RDF_TYPE, V.Sample))
    add_step_reference(g, ex("x"), ex("smp"), "x", "result", ex("ss"), V.Produced)
    add_step_reference(g, ex("y"), ex("smp"), "y", "result", ex("ss"), V.Produced)
    assert {v.focus for v in validate(g, [19]).violations} == {ex("x"), ex("y")}


def test_parameter_range_bounds_inclusive():
    g = Graph()
    ps, p = ex("ps"), ex("p")
    g.add(Triple(ps, V.RDF_TYPE, V.ParameterSpecification))
    g.add(Triple(ps, V.allowedValueType, V.VALUE_TYPES["Int32"]))
    g.add(Triple(ps, V.minValue, Literal("1", V.XSD_INTEGER)))
    g.add(Triple(ps, V.maxValue, Literal("3", V.XSD_INTEGER)))
    g.add(Triple(p, V.RDF_TYPE, V.Parameter)).add(Triple(p, V.hasSpecification, ps))
    for value, ok in (("1", True), ("3", True), ("0", False), ("4", False)):
        h = g.copy().add(Triple(p, V.value, Literal(value, V.XSD_INTEGER)))
        assert validate(h, [15, 16]).conforms is ok


def test_converted_fixtures_conform():
    for name in ("refpattern.ttl", "uvvis.ttl"):
        report = validate(load(FIXTURES / name))
        assert report.conforms, emit_report(report).decode()


def test_evidence_is_in_graph():
    for n in CHECK_IDS:
        _, neg, _ = fixture_pair(n)
        for v in validate(neg).violations:
            assert v.evidence and all(t in neg for t in v.evidence)


def test_parallel_and_order_independent():
    graphs = [fixture_pair(n)[1] for n in CHECK_IDS]
    merged = Graph()
    for g in graphs:
        merged.add_all(g)
    base = validate(merged)
    shuffled = list(CHECK_IDS)
    random.Random(7).shuffle(shuffled)
    for report in (validate(merged, shuffled), validate(merged, workers=8)):
        assert report.violations == base.violations
        assert report.fingerprint == base.fingerprint


def test_unknown_check_rejected():
    with pytest.raises(UnknownCheckError, match="22"):
        validate(Graph(), [1, 22])
    with pytest.raises(UnknownCheckError):
        parse_check_ids("1,x")


def test_text_report_for_conforming_graph():
    assert emit_report(validate(Graph())) == b"conforms: true\n"


def test_turtle_report_parses():
    _, neg, _ = fixture_pair(14)
    report = validate(neg)
    g = parse_rdf(emit_report(report, "turtle"))
    sh = V.SH_NS
    results = g.match(None, IRI(sh + "result"), None)
    assert len(results) == len(report.violations) == 2
    shapes = {g.value(t.object, IRI(sh + "sourceShape")) for t in results}
    assert shapes == {IRI("urn:x-animl-kg:check/14")}


# -- properties ----------------------------------------------------------------

ids = st.lists(st.text("abcdefgh", min_size=1, max_size=3), min_size=1, max_size=8, unique=True)


@settings(max_examples=60)
@given(ids, st.data())
def test_duplicate_id_monotonicity(values, data):
    g = Graph()
    for k, value in enumerate(values):
        g.add(Triple(ex(f"node{k}"), V.id, Literal(value)))
    assert validate(g, [14]).conforms
    reused = data.draw(st.sampled_from(values))
    g.add(Triple(ex("newcomer"), V.id, Literal(reused)))
    violations = validate(g, [14]).violations
    assert len(violations) == 2
    assert ex("newcomer") in {v.focus for v in violations}


@settings(max_examples=60)
@given(st.integers(2, 8), st.lists(st.tuples(st.integers(0, 7), st.integers(0, 7)), max_size=5))
def test_forward_reference_check_matches_index_oracle(n, pairs):
    g, steps = step_chain(n)
    refs = {(i % n, j % n) for i, j in pairs}
    for k, (i, j) in enumerate(sorted(refs)):
        add_step_reference(g, steps[i], steps[j], f"r{k}")
    flagged = {(steps.index(v.focus), steps.index(next(t.object for t in v.evidence
                                                       if t.predicate == V.pointsTo)))
               for v in validate(g, [17]).violations}
    assert flagged == {(i, j) for i, j in refs if j > i}


@settings(max_examples=60)
@given(st.integers(2, 8), st.data())
def test_cycle_nodes_exactly_flagged(n, data):
    g, steps = step_chain(n)
    i = data.draw(st.integers(0, n - 1))
    j = data.draw(st.integers(0, i))
    # back edge from step i to step j closes the cycle j..i
    g.add(Triple(steps[i], V.directlyPrecedes, steps[j]))
    g.add(Triple(steps[j], V.directlyFollows, steps[i]))
    assert {v.focus for v in validate(g, [1]).violations} == set(steps[j:i + 1])
