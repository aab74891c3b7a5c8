"""Basic graph pattern evaluation and the competency-question suite."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from itertools import chain
from typing import Iterable, Optional, Union

from animl_kg.graph import IRI, BNode, Graph, Literal, Node, default_prefixes, transitive_reachable
from animl_kg.rdfio import RDFSyntaxError, _Parser


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return "?" + self.name


Term = Union[Node, Var]

_OPS = {"=", "!=", "<", "<=", ">", ">="}


@dataclass(frozen=True)
class Filter:
    var: Var
    op: str
    value: Term

    def __post_init__(self):
        if self.op not in _OPS:
            raise ValueError(f"unsupported filter operator {self.op!r}")


@dataclass(frozen=True)
class PathTemplate:
    """``subject predicate+ object``: one or more hops over a single predicate."""

    subject: Term
    predicate: IRI
    object: Term


@dataclass
class Pattern:
    templates: list[tuple[Term, Term, Term]] = field(default_factory=list)
    filters: list[Filter] = field(default_factory=list)
    paths: list[PathTemplate] = field(default_factory=list)
    select: Optional[list[str]] = None

    def __post_init__(self):
        bound = set(self.variables())
        for f in self.filters:
            used = [f.var] + ([f.value] if isinstance(f.value, Var) else [])
            for v in used:
                if v.name not in bound:
                    raise ValueError(f"filter variable {v} does not appear in any template")
        if self.select is not None:
            missing = [v for v in self.select if v not in bound]
            if missing:
                raise ValueError(f"selected variables not in pattern: {missing}")

    def variables(self) -> list[str]:
        seen: dict[str, None] = {}
        terms = chain.from_iterable(self.templates)
        terms = chain(terms, chain.from_iterable((p.subject, p.object) for p in self.paths))
        for t in terms:
            if isinstance(t, Var):
                seen.setdefault(t.name)
        return list(seen)


@dataclass
class BindingTable:
    variables: tuple[str, ...]
    rows: list[tuple[Node, ...]]

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def column(self, name: str) -> list[Node]:
        i = self.variables.index(name)
        return [r[i] for r in self.rows]

    def as_dicts(self) -> list[dict[str, Node]]:
        return [dict(zip(self.variables, r)) for r in self.rows]

    def to_tsv(self) -> str:
        def cell(node: Node) -> str:
            text = node.value if isinstance(node, IRI) else (
                node.n3() if isinstance(node, BNode) else node.lexical)
            return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")

        lines = ["\t".join(self.variables)]
        lines.extend("\t".join(cell(n) for n in row) for row in self.rows)
        return "\n".join(lines) + "\n"


def _numeric(node: Node):
    if isinstance(node, Literal):
        v = node.to_python()
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            return v
    return None


def compare(left: Node, op: str, right: Node) -> bool:
    a, b = _numeric(left), _numeric(right)
    if a is not None and b is not None:
        return {"=": a == b, "!=": a != b, "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    return False


def _resolve(term: Term, binding: dict[str, Node]) -> Optional[Node]:
    if isinstance(term, Var):
        return binding.get(term.name)
    return term


def _unify(template, triple, binding) -> Optional[dict[str, Node]]:
    out = binding
    for term, node in zip(template, triple):
        if isinstance(term, Var):
            cur = out.get(term.name)
            if cur is None:
                if out is binding:
                    out = dict(binding)
                out[term.name] = node
            elif cur != node:
                return None
    return out


def _order(templates: list, bound: set[str]) -> list:
    """Greedy ordering: most constrained template first."""
    remaining = list(templates)
    ordered = []
    bound = set(bound)
    while remaining:
        def score(t):
            return sum(1 for x in t if not isinstance(x, Var) or x.name in bound)

        best = max(remaining, key=score)
        remaining.remove(best)
        ordered.append(best)
        bound.update(x.name for x in best if isinstance(x, Var))
    return ordered


def evaluate(graph: Graph, pattern: Pattern) -> BindingTable:
    solutions: list[dict[str, Node]] = [{}]
    for template in _order(pattern.templates, set()):
        nxt = []
        for b in solutions:
            s, p, o = (_resolve(t, b) for t in template)
            if isinstance(p, (Literal, BNode)):
                continue
            if isinstance(s, Literal):
                continue
            for triple in graph._match_unsorted(s, p, o):
                u = _unify(template, triple, b)
                if u is not None:
                    nxt.append(u)
        solutions = nxt
        if not solutions:
            break

    for path in pattern.paths:
        nxt = []
        for b in solutions:
            s = _resolve(path.subject, b)
            starts = [s] if s is not None else sorted(
                {t.subject for t in graph._match_unsorted(None, path.predicate, None)},
                key=lambda n: n.n3())
            for start in starts:
                base = b if s is not None else _unify((path.subject,), (start,), b)
                if base is None:
                    continue
                for end in transitive_reachable(graph, start, path.predicate):
                    u = _unify((path.object,), (end,), base)
                    if u is not None:
                        nxt.append(u)
        solutions = nxt

    for f in pattern.filters:
        solutions = [
            b for b in solutions
            if b.get(f.var.name) is not None and _resolve(f.value, b) is not None
            and compare(b[f.var.name], f.op, _resolve(f.value, b))
        ]

    variables = tuple(pattern.select if pattern.select is not None else pattern.variables())
    rows = {tuple(b[v] for v in variables) for b in solutions}
    return BindingTable(variables, sorted(rows, key=lambda r: tuple(n.n3() for n in r)))


# -- competency questions ----------------------------------------------------

@dataclass
class CompetencyQuestion:
    id: str
    text: str
    pattern: Pattern
    note: str = ""

    @property
    def variables(self) -> list[str]:
        return list(self.pattern.select or self.pattern.variables())


class UnknownCQError(KeyError):
    def __init__(self, cq_id: str, available: Iterable[str]):
        self.cq_id = cq_id
        self.available = sorted(available)
        super().__init__(f"unknown competency question {cq_id!r}; available: {', '.join(self.available)}")

    def __str__(self) -> str:
        return self.args[0]


class CQSyntaxError(ValueError):
    pass


_TOKEN = re.compile(r'\?\w+|<[^>]*>|"(?:[^"\\]|\\.)*"(?:@[\w-]+|\^\^\S+)?|\S+')


def _term(text: str, prefixes: dict[str, str], lineno: int) -> Term:
    if text.startswith("?"):
        return Var(text[1:])
    if text == "a":
        return IRI("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")
    parser = _Parser(text, ntriples=False)
    parser.prefixes = prefixes
    try:
        node = parser.object()
    except RDFSyntaxError as exc:
        raise CQSyntaxError(f"line {lineno}: bad term {text!r}: {exc}") from None
    if parser.peek()[0] is not None:
        raise CQSyntaxError(f"line {lineno}: bad term {text!r}")
    return node


def _tokens(line: str) -> list[str]:
    return _TOKEN.findall(line)


def parse_cq_file(text: str) -> dict[str, CompetencyQuestion]:
    """Parse the CQ definition format (see docs/cq-format.md)."""
    prefixes = default_prefixes()
    suite: dict[str, CompetencyQuestion] = {}
    current: Optional[dict] = None
    in_where = False

    def finish():
        if current is None:
            return
        try:
            pattern = Pattern(current["templates"], current["filters"], current["paths"],
                              current["select"])
        except ValueError as exc:
            raise CQSyntaxError(f"{current['id']}: {exc}") from None
        suite[current["id"]] = CompetencyQuestion(current["id"], current["text"], pattern,
                                                  current["note"])

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = re.fullmatch(r"prefix\s+([A-Za-z][\w-]*)?:\s*<([^>]*)>", line)
        if m:
            prefixes[m.group(1) or ""] = m.group(2)
            continue
        m = re.fullmatch(r"\[([^\]]+)\]", line)
        if m:
            finish()
            cq_id = m.group(1).strip()
            if cq_id in suite:
                raise CQSyntaxError(f"line {lineno}: duplicate CQ id {cq_id}")
            current = {"id": cq_id, "text": "", "note": "", "templates": [], "filters": [],
                       "paths": [], "select": None}
            in_where = False
            continue
        if current is None:
            raise CQSyntaxError(f"line {lineno}: content outside a [CQ] block")
        key, sep, rest = line.partition(":")
        key = key.strip()
        if sep and key in ("text", "note", "select", "where", "filter", "path"):
            rest = rest.strip()
            in_where = key == "where"
            if key in ("text", "note"):
                current[key] = rest
            elif key == "select":
                names = rest.split()
                if not all(n.startswith("?") for n in names):
                    raise CQSyntaxError(f"line {lineno}: select expects ?variables")
                current["select"] = [n[1:] for n in names]
            elif key == "filter":
                toks = _tokens(rest)
                if len(toks) != 3 or not toks[0].startswith("?"):
                    raise CQSyntaxError(f"line {lineno}: filter must be '?var op term'")
                try:
                    current["filters"].append(
                        Filter(Var(toks[0][1:]), toks[1], _term(toks[2], prefixes, lineno)))
                except ValueError as exc:
                    raise CQSyntaxError(f"line {lineno}: {exc}") from None
            elif key == "path":
                toks = _tokens(rest)
                if len(toks) != 3 or not toks[1].endswith("+"):
                    raise CQSyntaxError(f"line {lineno}: path must be 'subject predicate+ object'")
                pred = _term(toks[1][:-1], prefixes, lineno)
                if not isinstance(pred, IRI):
                    raise CQSyntaxError(f"line {lineno}: path predicate must be an IRI")
                current["paths"].append(PathTemplate(
                    _term(toks[0], prefixes, lineno), pred, _term(toks[2], prefixes, lineno)))
            elif key == "where" and rest:
                raise CQSyntaxError(f"line {lineno}: put triple templates on the lines after 'where:'")
            continue
        if not in_where:
            raise CQSyntaxError(f"line {lineno}: unexpected line {line!r}")
        toks = _tokens(line)
        if toks and toks[-1] == ".":
            toks = toks[:-1]
        elif toks and toks[-1].endswith(".") and not toks[-1].startswith(('"', "<")):
            toks[-1] = toks[-1][:-1]
        if len(toks) != 3:
            raise CQSyntaxError(f"line {lineno}: a template needs exactly three terms")
        current["templates"].append(tuple(_term(t, prefixes, lineno) for t in toks))
    finish()
    return suite


_BUNDLED: Optional[dict[str, CompetencyQuestion]] = None


def bundled_suite() -> dict[str, CompetencyQuestion]:
    global _BUNDLED
    if _BUNDLED is None:
        text = resources.files("animl_kg").joinpath("data/cqs.txt").read_text(encoding="utf-8")
        _BUNDLED = parse_cq_file(text)
    return _BUNDLED


def run_cq(graph: Graph, cq_id: str,
           suite: Optional[dict[str, CompetencyQuestion]] = None) -> BindingTable:
    suite = bundled_suite() if suite is None else suite
    if cq_id not in suite:
        raise UnknownCQError(cq_id, suite)
    return evaluate(graph, suite[cq_id].pattern)
