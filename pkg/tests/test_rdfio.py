from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from animl_kg import vocab as V
from animl_kg.graph import BNode, Graph, IRI, Literal, Triple
from animl_kg.rdfio import RDFSyntaxError, parse_rdf, serialize

from conftest import ex

text = st.text(st.characters(blacklist_categories=("Cs",)), max_size=12)
literals = st.one_of(
    st.builds(Literal, text),
    st.builds(Literal, text, st.sampled_from([None]), st.sampled_from(["en", "de-ch", "fr"])),
    st.integers(-10**6, 10**6).map(lambda i: Literal(str(i), V.XSD_INTEGER)),
    st.floats(allow_nan=False, allow_infinity=False).map(lambda f: Literal(repr(f), V.XSD_DOUBLE)),
    st.sampled_from([Literal("true", V.XSD_BOOLEAN), Literal("AAE=", V.XSD_BASE64),
                     Literal('["a","b"]', V.RDF_JSON)]),
)
iris = st.one_of(
    st.integers(0, 9).map(lambda i: ex(f"n{i}")),
    st.sampled_from([V.Sample, V.hasMember, V.directlyPrecedes, IRI("urn:x:1"),
                     IRI("http://ex.org/a#frag"), IRI("http://ex.org/with.dot."), IRI("http://ex.org/é")]),
)
bnodes = st.integers(0, 3).map(lambda i: BNode(f"b{i}"))
subjects = st.one_of(iris, bnodes)
graphs = st.lists(st.builds(Triple, subjects, iris, st.one_of(iris, bnodes, literals)), max_size=50).map(Graph)


@settings(max_examples=100)
@given(graphs, st.sampled_from(["turtle", "ntriples"]))
def test_round_trip(g, fmt):
    assert parse_rdf(serialize(g, fmt), fmt) == g


@given(graphs)
def test_serialization_is_canonical(g):
    # insertion order never affects the bytes
    shuffled = Graph(reversed(list(g)))
    assert serialize(g, "turtle") == serialize(shuffled, "turtle")
    assert serialize(g, "ntriples") == serialize(shuffled, "ntriples")


def test_empty_graph():
    assert serialize(Graph(), "ntriples") == b""
    assert parse_rdf(serialize(Graph(), "turtle")) == Graph()


def test_ntriples_golden():
    g = Graph([Triple(ex("b"), ex("p"), Literal("x\ty")), Triple(ex("a"), V.RDF_TYPE, V.Sample)])
    assert serialize(g, "ntriples").decode() == (
        "<http://ex.org/kg/a> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> "
        "<http://www.w3id.org/animl/ontology/Sample> .\n"
        '<http://ex.org/kg/b> <http://ex.org/kg/p> "x\\ty" .\n'
    )


def test_turtle_groups_subject_and_uses_a():
    g = Graph([Triple(ex("s"), V.RDF_TYPE, V.Sample), Triple(ex("s"), V.name, Literal("n"))])
    out = serialize(g, "turtle").decode()
    assert "<http://ex.org/kg/s> a aml:Sample ;\n    aml:name \"n\" ." in out


def test_turtle_features_parse():
    data = """
    @prefix aml: <http://www.w3id.org/animl/ontology/> .
    PREFIX ex: <http://ex.org/kg/>
    ex:s a aml:Sample ; aml:value 3, 2.5, 1e3, true ; aml:name \"\"\"multi
line\"\"\"@en .
    """
    g = parse_rdf(data)
    values = {t.object for t in g.match(ex("s"), V.value, None)}
    assert values == {Literal("3", V.XSD_INTEGER), Literal("2.5", V.XSD_DECIMAL),
                      Literal("1e3", V.XSD_DOUBLE), Literal("true", V.XSD_BOOLEAN)}
    assert g.value(ex("s"), V.name) == Literal("multi\nline", lang="en")


def test_undefined_prefix_reports_position():
    with pytest.raises(RDFSyntaxError) as info:
        parse_rdf("@prefix ex: <http://ex.org/> .\nex:a aml:p ex:b .\n")
    assert "undefined prefix 'aml'" in str(info.value)
    assert info.value.line == 2


def test_ntriples_mode_rejects_turtle():
    with pytest.raises(RDFSyntaxError):
        parse_rdf("@prefix ex: <http://ex.org/> .\n", "ntriples")


def test_literal_subject_is_syntax_error():
    with pytest.raises(RDFSyntaxError):
        parse_rdf('"x" <http://ex.org/p> <http://ex.org/o> .', "ntriples")
