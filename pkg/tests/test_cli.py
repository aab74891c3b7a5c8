from __future__ import annotations

import io
import json
import shutil
import subprocess
import sys

import pytest

from animl_kg.cli import main
from animl_kg.rdfio import parse_rdf
from animl_kg.synth import generate_animl

from conftest import FIXTURES


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_convert_minimal_to_stdout(capsys):
    code, out, err = run(capsys, "convert", FIXTURES / "minimal.animl", "--base", "http://ex.org/kg")
    assert code == 0
    g = parse_rdf(out)
    assert len(g) > 9
    assert err == ""


def test_convert_is_byte_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.ttl", tmp_path / "b.ttl"
    for path in (a, b):
        assert run(capsys, "convert", FIXTURES / "uvvis.animl", "--base", "http://ex.org/kg",
                   "--technique", FIXTURES / "techniques" / "uv-vis.technique", "-o", path)[0] == 0
    assert a.read_bytes() == b.read_bytes() == (FIXTURES / "uvvis.ttl").read_bytes()


def test_convert_many_inputs_in_parallel(capsys):
    code, out, _ = run(capsys, "convert", FIXTURES / "minimal.animl", FIXTURES / "refpattern.animl",
                       "--base", "http://ex.org/kg", "--workers", "2", "--format", "ntriples")
    assert code == 0
    assert "<http://ex.org/kg/minimal/document>" in out
    assert "<http://ex.org/kg/refpattern/document>" in out


def test_validate_negative_fixture(capsys):
    code, out, _ = run(capsys, "validate", FIXTURES / "checks" / "17" / "negative.ttl", "--checks", "17")
    assert code == 1
    lines = out.splitlines()
    assert lines[0] == "conforms: false"
    assert len(lines[1:]) == 1 and lines[1].startswith("check 17\t")


def test_validate_positive_fixture(capsys):
    code, out, _ = run(capsys, "validate", FIXTURES / "checks" / "17" / "positive.ttl")
    assert (code, out) == (0, "conforms: true\n")


def test_validate_turtle_report(capsys):
    code, out, _ = run(capsys, "validate", FIXTURES / "checks" / "21" / "negative.ttl", "--format", "turtle")
    assert code == 1
    assert "Subject type not match reference target." in out
    parse_rdf(out)


def test_query_cq96(capsys):
    code, out, _ = run(capsys, "query", FIXTURES / "refpattern.ttl", "--cq", "CQ-96")
    assert code == 0
    header, row = out.splitlines()
    assert header.split("\t") == ["reference", "series", "startIndex"]
    assert row.split("\t")[2] == "10"


def test_query_unknown_cq(capsys):
    code, out, err = run(capsys, "query", FIXTURES / "refpattern.ttl", "--cq", "CQ-0")
    assert code == 2 and out == ""
    assert "CQ-96" in err


def test_stats(capsys):
    code, out, _ = run(capsys, "stats")
    assert code == 0
    rows = dict(line.split("\t") for line in out.splitlines()[1:])
    assert (rows["relatedMatch"], rows["narrowMatch"], rows["broadMatch"], rows["total"]) == ("11", "5", "4", "47")


def test_align_rewrite(capsys):
    code, out, _ = run(capsys, "align", FIXTURES / "refpattern.ttl", "--mode", "rewrite")
    assert code == 0
    assert "ontologies/placeholder/" in out


@pytest.mark.parametrize("argv", [
    [],
    ["convert"],
    ["validate", "nope.ttl"],
    ["validate", str(FIXTURES / "refpattern.ttl"), "--checks", "0"],
    ["query", str(FIXTURES / "refpattern.ttl")],
    ["convert", str(FIXTURES / "minimal.animl"), "--base", "not an iri"],
    ["frobnicate"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert err


def test_syntax_error_has_position(capsys, tmp_path):
    bad = tmp_path / "bad.ttl"
    bad.write_text("@prefix ex: <http://ex.org/> .\nex:a ex:b .\n")
    code, _, err = run(capsys, "validate", bad)
    assert code == 2 and "line 2" in err


def test_animl_error_names_file(capsys, tmp_path):
    bad = tmp_path / "bad.animl"
    bad.write_text("<AnIML>\n<Sample>\n")
    code, _, err = run(capsys, "convert", bad)
    assert code == 2 and f"{bad}:" in err


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"base": "http://cfg.org/kg", "format": "ntriples"}))
    code, out, _ = run(capsys, "convert", FIXTURES / "minimal.animl", "--config", cfg)
    assert code == 0 and out.startswith("<http://cfg.org/kg/")
    code, out, _ = run(capsys, "convert", FIXTURES / "minimal.animl", "--config", cfg,
                       "--base", "http://flag.org/kg")
    assert out.startswith("<http://flag.org/kg/")


def test_config_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    code, _, err = run(capsys, "stats", "--config", cfg)
    assert code == 2 and "bogus" in err


def test_console_script_entry_point():
    exe = shutil.which("animl-kg")
    cmd = [exe] if exe else [sys.executable, "-m", "animl_kg.cli"]
    proc = subprocess.run(cmd + ["validate", str(FIXTURES / "checks" / "01" / "negative.ttl")],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert proc.stdout.count("check 01") == 3


def test_stdin_pipeline(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.TextIOWrapper(io.BytesIO(generate_animl(5, payload_bytes=400))))
    code, ttl, _ = run(capsys, "convert", "-", "--base", "http://ex.org/kg")
    assert code == 0 and len(parse_rdf(ttl)) > 0
    monkeypatch.setattr(sys, "stdin", io.TextIOWrapper(io.BytesIO(ttl.encode())))
    code, out, _ = run(capsys, "validate", "-", "--checks", "1,2,17")
    assert (code, out) == (0, "conforms: true\n")
