from __future__ import annotations

import random

import pytest

from animl_kg import vocab as V
from animl_kg.animl import parse_animl
from animl_kg.graph import Graph, Literal, Triple, transitive_reachable
from animl_kg.mapper import IriPolicy, convert
from animl_kg.query import (BindingTable, CQSyntaxError, Filter, PathTemplate, Pattern, UnknownCQError,
                            Var, bundled_suite, compare, evaluate, parse_cq_file, run_cq)
from animl_kg.rdfio import load

from conftest import FIXTURES, ex, random_graph
from oracles import brute_force, random_pattern

def test_evaluate_matches_brute_force_oracle():
    rng = random.Random(20241016)
    for _ in range(120):
        g = random_graph(rng, 15, n_nodes=5, n_preds=3)
        pattern = random_pattern(rng, g)
        table = evaluate(g, pattern)
        assert set(table.rows) == brute_force(g, pattern)
        assert len(set(table.rows)) == len(table.rows)


def test_rows_sorted_and_deterministic():
    rng = random.Random(3)
    g = random_graph(rng, 15, with_literals=False)
    p = Pattern([(Var("a"), Var("b"), Var("c"))])
    t1, t2 = evaluate(g, p), evaluate(g, p)
    assert t1.rows == t2.rows == sorted(t1.rows, key=lambda r: tuple(n.n3() for n in r))


def test_path_template_matches_closure():
    g = Graph()
    for a, b in [(1, 2), (2, 3), (3, 4), (5, 6)]:
        g.add(Triple(ex(f"n{a}"), V.directlyPrecedes, ex(f"n{b}")))
    table = evaluate(g, Pattern(paths=[PathTemplate(Var("x"), V.directlyPrecedes, Var("y"))]))
    expected = {(s, o) for s in g.nodes() for o in transitive_reachable(g, s, V.directlyPrecedes)}
    assert set(table.rows) == expected
    assert (ex("n1"), ex("n4")) in expected


def test_filter_numeric():
    g = Graph([Triple(ex("a"), V.value, Literal("3", V.XSD_INTEGER)),
               Triple(ex("b"), V.value, Literal("7.5", V.XSD_DOUBLE))])
    p = Pattern([(Var("s"), V.value, Var("v"))], [Filter(Var("v"), ">", Literal("5", V.XSD_INTEGER))])
    assert evaluate(g, p).column("s") == [ex("b")]


def test_filter_on_unbound_variable_rejected():
    with pytest.raises(ValueError, match="does not appear"):
        Pattern([(Var("s"), V.value, Var("v"))], [Filter(Var("zz"), "=", Literal("1"))])


def test_tsv_output():
    t = BindingTable(("a", "b"), [(ex("x"), Literal("tab\there"))])
    assert t.to_tsv() == "a\tb\nhttp://ex.org/kg/x\ttab\\there\n"


def test_cq96_on_reference_fixture():
    g = load(FIXTURES / "refpattern.ttl")
    table = run_cq(g, "CQ-96")
    assert table.variables == ("reference", "series", "startIndex")
    assert [(r[1].value, r[2].lexical) for r in table] == [("http://ex.org/kg/series/ser1", "10")]


def test_cq96_empty_without_start_value():
    xml = (FIXTURES / "refpattern.animl").read_text()
    xml = xml.replace("<StartValue><I>10</I></StartValue>", "")
    g = convert(parse_animl(xml), IriPolicy("http://ex.org/kg"))
    assert len(run_cq(g, "CQ-96")) == 0


def test_bundled_suite_shape():
    suite = bundled_suite()
    assert {"CQ-96", "CQ-TECH-RESULTS"} <= set(suite)
    assert len(suite) >= 12
    for cq in suite.values():
        assert cq.text
        if cq.id not in ("CQ-96", "CQ-TECH-RESULTS"):
            assert cq.note == "engineer-authored"


@pytest.mark.parametrize("cq_id,expected", [
    ("CQ-SAMPLES", 3), ("CQ-CONTAINER", 1), ("CQ-AGENT-ROLES", 2), ("CQ-TECH-RESULTS", 1),
    ("CQ-PARAMETER-RANGE", 1), ("CQ-CONSUMED-SAMPLES", 1), ("CQ-DEPENDENT-SERIES", 1),
])
def test_bundled_cqs_on_uvvis(cq_id, expected):
    g = load(FIXTURES / "uvvis.ttl")
    assert len(run_cq(g, cq_id)) == expected


def test_unknown_cq_lists_available():
    with pytest.raises(UnknownCQError) as info:
        run_cq(Graph(), "CQ-NOPE")
    assert "CQ-96" in str(info.value)


@pytest.mark.parametrize("text", [
    "[A]\nwhere:\n  ?s ?p\n",
    "[A]\nwhere:\n  ?s zz:p ?o .\n",
    "?s ?p ?o .\n",
    "[A]\nwhere:\n  ?s ?p ?o .\nfilter: ?q = 1\n",
])
def test_cq_syntax_errors(text):
    with pytest.raises(CQSyntaxError):
        parse_cq_file(text)
