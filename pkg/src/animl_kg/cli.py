"""``animl-kg`` command line: convert, validate, query, align, stats.

Exit codes: 0 success or conforming graph, 1 violations found, 2 usage or
pipeline error. Data goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

from animl_kg.align import SSSOMError, apply_mappings, bundled_mappings, mapping_stats, parse_sssom
from animl_kg.animl import AnimlParseError, parse_animl
from animl_kg.graph import Graph
from animl_kg.mapper import (IriPolicy, TechniqueDescriptorError, convert, link_parameter_specs,
                             map_technique, parse_technique_descriptor)
from animl_kg.query import CQSyntaxError, UnknownCQError, bundled_suite, parse_cq_file, run_cq
from animl_kg.rdfio import RDFSyntaxError, load, parse_rdf, serialize
from animl_kg.validation import UnknownCheckError, emit_report, parse_check_ids, validate

log = logging.getLogger("animl_kg")

EXIT_OK, EXIT_VIOLATIONS, EXIT_ERROR = 0, 1, 2
STDIN = "-"


@dataclass
class RunConfig:
    inputs: list[str] = field(default_factory=list)
    base: str = "http://example.org/animl/"
    format: str = "turtle"
    index_base: int = 0
    techniques: list[str] = field(default_factory=list)
    checks: Optional[list[int]] = None
    workers: int = 1
    cqs: list[str] = field(default_factory=list)
    cq_file: Optional[str] = None
    sssom: Optional[str] = None
    mode: str = "annotate"
    verbosity: int = 0

    def __post_init__(self):
        IriPolicy(self.base)  # validates the base IRI

    @classmethod
    def from_json(cls, path: str) -> "RunConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"{path}: unknown config keys {unknown}")
        return cls(**data)


class _UsageError(Exception):
    pass


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig defaults; flags override it")
    common.add_argument("-v", "--verbose", action="count", default=None, help="more diagnostics on stderr")

    p = argparse.ArgumentParser(prog="animl-kg", description="AnIML to RDF knowledge graph toolkit")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    c = sub.add_parser("convert", parents=[common], help="map AnIML XML files to RDF")
    c.add_argument("inputs", nargs="+", metavar="ANIML", help="AnIML files, or - for stdin")
    c.add_argument("--base", help="base IRI for minted nodes")
    c.add_argument("-o", "--output", help="output file (default stdout)")
    c.add_argument("--format", choices=("turtle", "ntriples"))
    c.add_argument("--technique", action="append", dest="techniques", metavar="FILE",
                   help="technique descriptor sidecar (repeatable)")
    c.add_argument("--index-base", type=int, choices=(0, 1), help="index convention of slice bounds")
    c.add_argument("--workers", type=int, help="convert inputs in parallel")

    v = sub.add_parser("validate", parents=[common], help="run constraint checks on a graph")
    v.add_argument("graph", help="Turtle or N-Triples file, or - for stdin")
    v.add_argument("--checks", help="comma-separated check ids, e.g. 1,17,21")
    v.add_argument("--format", choices=("text", "turtle"), default="text")
    v.add_argument("--workers", type=int)

    q = sub.add_parser("query", parents=[common], help="run competency questions")
    q.add_argument("graph", help="Turtle or N-Triples file, or - for stdin")
    q.add_argument("--cq", action="append", dest="cqs", metavar="ID")
    q.add_argument("--cq-file", help="CQ definition file (default: bundled suite)")
    q.add_argument("--list", action="store_true", help="list available CQ ids")

    a = sub.add_parser("align", parents=[common], help="apply SSSOM mappings to a graph")
    a.add_argument("graph", help="Turtle or N-Triples file, or - for stdin")
    a.add_argument("--sssom", help="SSSOM TSV (default: bundled curated set)")
    a.add_argument("--mode", choices=("annotate", "rewrite"))
    a.add_argument("-o", "--output")
    a.add_argument("--format", choices=("turtle", "ntriples"))

    s = sub.add_parser("stats", parents=[common], help="predicate histogram of an SSSOM file")
    s.add_argument("--sssom", help="SSSOM TSV (default: bundled curated set)")
    return p


def _config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_json(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = {
        "inputs": getattr(args, "inputs", None),
        "base": getattr(args, "base", None),
        "index_base": getattr(args, "index_base", None),
        "techniques": getattr(args, "techniques", None),
        "workers": getattr(args, "workers", None),
        "cqs": getattr(args, "cqs", None),
        "cq_file": getattr(args, "cq_file", None),
        "sssom": getattr(args, "sssom", None),
        "mode": getattr(args, "mode", None),
        "verbosity": getattr(args, "verbose", None),
    }
    if args.command in ("convert", "align") and args.format:
        overrides["format"] = args.format
    if getattr(args, "checks", None):
        overrides["checks"] = parse_check_ids(args.checks)
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    RunConfig.__post_init__(cfg)
    return cfg


def _write(data: bytes, output: Optional[str]) -> None:
    if output:
        Path(output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _convert_one(path: str, policy: IriPolicy) -> Graph:
    # payload spans are re-read after parsing, so stdin is buffered whole
    source = sys.stdin.buffer.read() if path == STDIN else path
    try:
        doc = parse_animl(source)
    except AnimlParseError as exc:
        print(f"{path}:{exc.line}:{exc.column}: error: {exc.reason}", file=sys.stderr)
        raise
    for d in doc.diagnostics:
        print(f"{path}:{d.line}:{d.column}: {d.level}: {d.message}", file=sys.stderr)
    return convert(doc, policy)


def _cmd_convert(cfg: RunConfig, args) -> int:
    if cfg.inputs.count(STDIN) > 1:
        raise _UsageError("'-' (stdin) may be given only once")
    for p in cfg.inputs + cfg.techniques:
        if p != STDIN and not Path(p).is_file():
            raise _UsageError(f"no such file: {p}")
    multi = len(cfg.inputs) > 1
    policies = [IriPolicy(cfg.base.rstrip("/") + (f"/{Path(p).stem if p != STDIN else 'stdin'}" if multi else ""), cfg.index_base)
                for p in cfg.inputs]
    with ThreadPoolExecutor(max_workers=max(1, cfg.workers)) as pool:
        graphs = list(pool.map(_convert_one, cfg.inputs, policies))
    merged = Graph()
    for g in graphs:
        merged.add_all(g)
    for path in cfg.techniques:
        desc = parse_technique_descriptor(Path(path).read_text(encoding="utf-8"))
        merged.add_all(map_technique(desc, IriPolicy(cfg.base, cfg.index_base)))
    if cfg.techniques:
        merged = link_parameter_specs(merged)
    _write(serialize(merged, cfg.format), getattr(args, "output", None))
    return EXIT_OK


def _load_graph(path: str) -> Graph:
    if path == STDIN:
        return parse_rdf(sys.stdin.buffer.read())
    if not Path(path).is_file():
        raise _UsageError(f"no such file: {path}")
    return load(path)


def _cmd_validate(cfg: RunConfig, args) -> int:
    graph = _load_graph(args.graph)
    report = validate(graph, cfg.checks, workers=cfg.workers)
    _write(emit_report(report, args.format), None)
    if cfg.verbosity:
        print(f"{len(report.violations)} violation(s) from checks {report.checks_run}; "
              f"graph sha256 {report.fingerprint}", file=sys.stderr)
    return EXIT_OK if report.conforms else EXIT_VIOLATIONS


def _cmd_query(cfg: RunConfig, args) -> int:
    suite = (parse_cq_file(Path(cfg.cq_file).read_text(encoding="utf-8"))
             if cfg.cq_file else bundled_suite())
    if args.list:
        for cq in suite.values():
            print(f"{cq.id}\t{cq.text}")
        return EXIT_OK
    if not cfg.cqs:
        raise _UsageError("query needs --cq ID (or --list)")
    graph = _load_graph(args.graph)
    chunks = []
    for cq_id in cfg.cqs:
        table = run_cq(graph, cq_id, suite)
        if len(cfg.cqs) > 1:
            chunks.append(f"# {cq_id}\n")
        chunks.append(table.to_tsv())
    _write("".join(chunks).encode("utf-8"), None)
    return EXIT_OK


def _mappings(cfg: RunConfig):
    if cfg.sssom is None:
        mset = bundled_mappings()
    else:
        if not Path(cfg.sssom).is_file():
            raise _UsageError(f"no such file: {cfg.sssom}")
        mset = parse_sssom(Path(cfg.sssom).read_bytes())
    for w in mset.warnings:
        print(f"{cfg.sssom or 'bundled mappings'}: warning: {w}", file=sys.stderr)
    return mset


def _cmd_align(cfg: RunConfig, args) -> int:
    graph = _load_graph(args.graph)
    out = apply_mappings(graph.freeze(), _mappings(cfg), cfg.mode)
    _write(serialize(out, cfg.format), args.output)
    return EXIT_OK


def _cmd_stats(cfg: RunConfig, args) -> int:
    _write(mapping_stats(_mappings(cfg)).to_tsv().encode("utf-8"), None)
    return EXIT_OK


_COMMANDS = {"convert": _cmd_convert, "validate": _cmd_validate, "query": _cmd_query,
             "align": _cmd_align, "stats": _cmd_stats}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_ERROR
    try:
        cfg = _config(args)
        logging.basicConfig(level=logging.DEBUG if cfg.verbosity > 1 else
                            logging.INFO if cfg.verbosity else logging.WARNING,
                            format="%(levelname)s: %(message)s", stream=sys.stderr)
        return _COMMANDS[args.command](cfg, args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"animl-kg {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except AnimlParseError:
        return EXIT_ERROR
    except (RDFSyntaxError, SSSOMError, TechniqueDescriptorError, CQSyntaxError,
            UnknownCheckError, UnknownCQError, ValueError, OSError) as exc:
        print(f"animl-kg {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
