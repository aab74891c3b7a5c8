from __future__ import annotations

import base64
import io
import struct

import pytest
from hypothesis import given
from hypothesis import strategies as st

from animl_kg.animl import (AnimlParseError, EncodedValues, SeriesDecodeError, decode_series_values,
                            encode_binary, parse_animl, parse_lexical)
from animl_kg.synth import SynthConfig, generate_animl, write_animl

from conftest import FIXTURES

NS = 'xmlns="urn:org:astm:animl:schema:core:draft:0.90"'


def doc_with_series(series_xml: str, length: int) -> str:
    return f"""<AnIML {NS}><ExperimentStepSet><ExperimentStep name="x" experimentStepID="e1">
      <Result name="r"><SeriesSet name="ss" length="{length}">{series_xml}</SeriesSet></Result>
    </ExperimentStep></ExperimentStepSet></AnIML>"""


def only_series(series_xml: str, length: int):
    doc = parse_animl(doc_with_series(series_xml, length))
    (series,) = list(doc.iter_series())
    return series


def test_minimal_fixture():
    doc = parse_animl(FIXTURES / "minimal.animl")
    assert [s.id for s in doc.samples] == ["s1"]
    assert [s.id for s in doc.steps] == ["e1"]
    assert not doc.duplicate_ids
    assert [d for d in doc.diagnostics if d.level == "error"] == []


def test_duplicate_sample_ids_reported():
    doc = parse_animl(f"""<AnIML {NS}><SampleSet>
      <Sample name="a" sampleID="s1"/><Sample name="b" sampleID="s1"/>
    </SampleSet></AnIML>""")
    assert doc.duplicate_ids == {"s1"}
    assert [s.id for s in doc.samples] == ["s1", "s1"]


def test_individual_values_length_five():
    s = only_series('<Series name="v" seriesID="v" dependency="dependent" seriesType="Float64">'
                    "<IndividualValueSet><D>1</D><D>2</D><D>3</D><D>4</D><D>5</D></IndividualValueSet>"
                    "</Series>", 5)
    assert decode_series_values(s) == [1.0, 2.0, 3.0, 4.0, 5.0]


def test_auto_increment_expansion():
    s = only_series('<Series name="x" seriesID="x" dependency="independent" seriesType="Float64">'
                    "<AutoIncrementedValueSet><StartValue><D>0</D></StartValue>"
                    "<Increment><D>2.5</D></Increment></AutoIncrementedValueSet></Series>", 4)
    assert decode_series_values(s) == [0.0, 2.5, 5.0, 7.5]


def test_binary_float32_round_trip():
    values = [0.5, -1.25, 3.0, 1e-3]
    b64 = encode_binary(values, "Float32")
    # independent packing as the oracle
    assert base64.b64decode(b64) == struct.pack("<4f", *values)
    s = only_series(f'<Series name="y" seriesID="y" dependency="dependent" seriesType="Float32">'
                    f"<EncodedValueSet>{b64}</EncodedValueSet></Series>", 4)
    assert decode_series_values(s) == pytest.approx(values, rel=1e-6)


def test_int32_bad_value_names_index():
    s = only_series('<Series name="i" seriesID="i" dependency="dependent" seriesType="Int32">'
                    "<IndividualValueSet><I>1</I><I>x</I></IndividualValueSet></Series>", 2)
    with pytest.raises(SeriesDecodeError, match="index 1"):
        decode_series_values(s)


def test_length_mismatch_is_error():
    s = only_series('<Series name="v" seriesID="v" dependency="dependent" seriesType="Int32">'
                    "<IndividualValueSet><I>1</I></IndividualValueSet></Series>", 3)
    with pytest.raises(SeriesDecodeError, match="length is 3"):
        decode_series_values(s)


def test_malformed_xml_has_position():
    with pytest.raises(AnimlParseError) as info:
        parse_animl(f"<AnIML {NS}>\n  <SampleSet>\n</AnIML>")
    assert info.value.line == 3
    assert info.value.column > 0


def test_unknown_element_warns_and_continues():
    doc = parse_animl(f"""<AnIML {NS}><SampleSet><Sample name="a" sampleID="s1"/>
      <Gizmo/></SampleSet></AnIML>""")
    assert [s.id for s in doc.samples] == ["s1"]
    assert any(d.level == "warning" and "Gizmo" in d.message for d in doc.diagnostics)


def test_foreign_namespace_ignored():
    doc = parse_animl(f"""<AnIML {NS} xmlns:x="urn:other"><SampleSet>
      <Sample name="a" sampleID="s1"/><x:Note>hi</x:Note></SampleSet></AnIML>""")
    assert not [d for d in doc.diagnostics if "Note" in d.message]


def test_encoded_payload_is_deferred(tmp_path):
    path = tmp_path / "big.animl"
    with open(path, "wb") as fh:
        write_animl(fh, SynthConfig(n_steps=1, payload_bytes=40_000))
    doc = parse_animl(path)
    (series,) = list(doc.iter_series())
    (vs,) = series.value_sets
    assert isinstance(vs, EncodedValues)
    # only the byte span is kept; the payload is re-read on demand
    assert vs.payload.source == path
    values = decode_series_values(series)
    assert values[:3] == [0.0, 0.5, 1.0] and len(values) == series.length


def test_parse_from_stream_and_bytes_agree():
    data = generate_animl(3, payload_bytes=3000)
    a = parse_animl(data)
    b = parse_animl(io.BytesIO(data))
    assert [decode_series_values(s) for s in a.iter_series()] == \
        [decode_series_values(s) for s in b.iter_series()]


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), max_size=30))
def test_float64_binary_round_trip(values):
    s = only_series(f'<Series name="y" seriesID="y" dependency="dependent" seriesType="Float64">'
                    f"<EncodedValueSet>{encode_binary(values, 'Float64')}</EncodedValueSet></Series>",
                    len(values))
    assert decode_series_values(s) == values


@pytest.mark.parametrize("vt,text,expected", [
    ("Int32", "42", 42), ("Int64", "-7", -7), ("Float32", "2.5", 2.5), ("Boolean", "true", True),
    ("DateTime", "2024-01-02T03:04:05Z", "2024-01-02T03:04:05Z"), ("String", " a ", " a "),
])
def test_parse_lexical(vt, text, expected):
    assert parse_lexical(vt, text) == expected


@pytest.mark.parametrize("vt,text", [("Int32", "2147483648"), ("Boolean", "yes"), ("DateTime", "nope")])
def test_parse_lexical_rejects(vt, text):
    with pytest.raises(ValueError):
        parse_lexical(vt, text)
