from __future__ import annotations

import random
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from animl_kg import vocab as V
from animl_kg.align import (MappingRecord, MappingSet, SSSOMError, apply_mappings, bundled_mappings,
                            mapping_stats, parse_sssom, serialize_sssom)
from animl_kg.graph import IRI, Graph, Triple
from animl_kg.rdfio import load

from conftest import FIXTURES, ex, random_typed_graph

AFO = "http://purl.allotrope.org/ontologies/placeholder/"
HEADER = "subject_id\tpredicate_id\tobject_id\tmapping_justification\n"


def one_mapping(subject: IRI, predicate: IRI, obj: str) -> MappingSet:
    return MappingSet([MappingRecord(subject, predicate, IRI(AFO + obj), "semapv:ManualMappingCuration")])


def test_three_skos_variants():
    text = HEADER + "".join(f"aml:Method\tskos:{p}\thttp://x.org/{p}\tsemapv:ManualMappingCuration\n"
                            for p in ("relatedMatch", "narrowMatch", "broadMatch"))
    mset = parse_sssom(text)
    assert [r.predicate_name for r in mset] == ["relatedMatch", "narrowMatch", "broadMatch"]
    assert mset.records[0].subject_id == V.Method


def test_duplicate_row_names_line():
    row = "aml:Sample\towl:equivalentClass\thttp://x.org/S\tsemapv:ManualMappingCuration\n"
    with pytest.raises(SSSOMError, match="line 3"):
        parse_sssom(HEADER + row + row)


def test_missing_column_named():
    with pytest.raises(SSSOMError, match="mapping_justification"):
        parse_sssom("subject_id\tpredicate_id\tobject_id\naml:A\towl:equivalentClass\taml:B\n")


def test_unknown_predicate_skipped_with_warning():
    mset = parse_sssom(HEADER + "aml:Sample\tskos:closeMatch\thttp://x.org/S\tsemapv:LexicalMatching\n")
    assert len(mset) == 0
    assert "closeMatch" in mset.warnings[0]


def test_confidence_range_enforced():
    text = "subject_id\tpredicate_id\tobject_id\tmapping_justification\tconfidence\n" \
           "aml:Sample\towl:equivalentClass\thttp://x.org/S\tsemapv:ManualMappingCuration\t1.5\n"
    with pytest.raises(SSSOMError, match="confidence"):
        parse_sssom(text)


def test_bundled_fixture_histogram():
    data = (FIXTURES.parent / "src" / "animl_kg" / "data" / "curated.sssom.tsv").read_text()
    # oracle: count predicate column values directly in the file
    rows = [line.split("\t") for line in data.splitlines() if line and not line.startswith("#")][1:]
    oracle = Counter(r[2].split(":")[1] for r in rows)
    stats = mapping_stats(bundled_mappings())
    assert len(bundled_mappings()) == len(rows) == 47
    assert {k: v for k, v in stats.counts.items() if v} == dict(oracle)
    assert (stats.counts["relatedMatch"], stats.counts["narrowMatch"], stats.counts["broadMatch"]) == (11, 5, 4)
    assert stats.total == 47


def test_stats_empty_and_repeated():
    assert mapping_stats(MappingSet()).total == 0
    assert set(mapping_stats(MappingSet()).counts.values()) == {0}
    two = MappingSet([MappingRecord(V.Sample, V.skos_broadMatch, IRI(AFO + "a"), "x"),
                      MappingRecord(V.Method, V.skos_broadMatch, IRI(AFO + "b"), "x")])
    assert mapping_stats(two).counts["broadMatch"] == 2
    assert mapping_stats(two).to_tsv().endswith("total\t2\n")


def test_annotate_adds_type():
    g = Graph([Triple(ex("s"), V.RDF_TYPE, V.Sample)]).freeze()
    out = apply_mappings(g, one_mapping(V.Sample, V.owl_equivalentClass, "Sample"), "annotate")
    assert set(out.objects(ex("s"), V.RDF_TYPE)) == {V.Sample, IRI(AFO + "Sample")}


def test_rewrite_replaces_type():
    g = Graph([Triple(ex("s"), V.RDF_TYPE, V.Sample)]).freeze()
    out = apply_mappings(g, one_mapping(V.Sample, V.owl_equivalentClass, "Sample"), "rewrite")
    assert out.objects(ex("s"), V.RDF_TYPE) == [IRI(AFO + "Sample")]


def test_related_match_is_schema_only():
    g = Graph([Triple(ex("m"), V.RDF_TYPE, V.Method)]).freeze()
    out = apply_mappings(g, one_mapping(V.Method, V.skos_relatedMatch, "MethodName"), "rewrite")
    assert out.triples() - g.triples() == {Triple(V.Method, V.skos_relatedMatch, IRI(AFO + "MethodName"))}


def test_property_subject_is_schema_only():
    g = Graph([Triple(ex("s"), V.hasUnit, ex("u"))]).freeze()
    out = apply_mappings(g, one_mapping(V.hasUnit, V.owl_equivalentClass, "Unit"), "annotate")
    assert out.triples() - g.triples() == {Triple(V.hasUnit, V.owl_equivalentClass, IRI(AFO + "Unit"))}


def test_part_of_is_schema_only():
    g = Graph([Triple(ex("m"), V.RDF_TYPE, V.Method)]).freeze()
    out = apply_mappings(g, one_mapping(V.Method, V.part_of, "MethodName"))
    assert out.objects(ex("m"), V.RDF_TYPE) == [V.Method]


def test_input_graph_untouched():
    g = load(FIXTURES / "uvvis.ttl").freeze()
    before = g.triples()
    apply_mappings(g, bundled_mappings(), "rewrite")
    assert g.triples() == before


def test_unknown_mode():
    with pytest.raises(ValueError):
        apply_mappings(Graph(), MappingSet(), "merge")


records = st.builds(
    MappingRecord,
    st.integers(0, 30).map(lambda i: IRI(f"{V.AML_NS}C{i}")),
    st.sampled_from([V.owl_equivalentClass, V.skos_relatedMatch, V.skos_narrowMatch,
                     V.skos_broadMatch, V.part_of]),
    st.integers(0, 30).map(lambda i: IRI(f"{AFO}T{i}")),
    st.sampled_from(["semapv:ManualMappingCuration", "semapv:LexicalMatching"]),
    st.one_of(st.none(), st.floats(0, 1)),
    st.text("abc xyz", max_size=8).map(str.strip),
)


@given(st.lists(records, max_size=25, unique_by=lambda r: r.key()))
def test_serialize_parse_round_trip(recs):
    mset = MappingSet(recs, {"mapping_set_id": "https://example.org/set", "license": "CC0"})
    back = parse_sssom(serialize_sssom(mset))
    assert back.records == mset.records
    assert back.metadata == mset.metadata


@pytest.mark.parametrize("mode", ["annotate", "rewrite"])
def test_idempotent_and_monotone(mode):
    rng = random.Random(11)
    mset = bundled_mappings()
    for _ in range(20):
        g = random_typed_graph(rng)
        once = apply_mappings(g, mset, mode)
        assert apply_mappings(once.freeze(), mset, mode) == once
        if mode == "annotate":
            assert once.triples() >= g.triples()
