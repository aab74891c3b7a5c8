"""Deterministic Turtle / N-Triples writers and a subset Turtle reader.

The reader handles prefix and base directives, prefixed names, IRIs,
labelled blank nodes, literals with language tag or datatype, numeric and
boolean shorthand, the ``a`` keyword, and predicate-object / object lists.
Collections, anonymous ``[]`` nodes and quoted triples are rejected.
"""

from __future__ import annotations

import re
from typing import Optional, Union
from urllib.parse import urljoin

from animl_kg.graph import (
    IRI,
    RDF_NS,
    XSD_NS,
    XSD_STRING,
    BNode,
    Graph,
    Literal,
    Node,
    Triple,
)

RDF_TYPE_IRI = RDF_NS + "type"
_LOCAL = re.compile(r"^[A-Za-z0-9_](?:[A-Za-z0-9_\-]*)$")

FORMATS = ("turtle", "ntriples")


class RDFSyntaxError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


# -- writing ---------------------------------------------------------------

def _qname(iri: str, prefixes: dict[str, str]) -> Optional[str]:
    best = None
    for prefix, ns in prefixes.items():
        if iri.startswith(ns) and (best is None or len(ns) > len(prefixes[best])):
            local = iri[len(ns):]
            if local == "" or _LOCAL.match(local):
                best = prefix
    if best is None:
        return None
    return f"{best}:{iri[len(prefixes[best]):]}"


def _turtle_term(node: Node, prefixes: dict[str, str]) -> str:
    if isinstance(node, IRI):
        return _qname(node.value, prefixes) or node.n3()
    if isinstance(node, Literal) and node.lang is None and node.datatype != XSD_STRING:
        dt = _qname(node.datatype, prefixes) or f"<{node.datatype}>"
        return node.n3().rsplit("^^", 1)[0] + "^^" + dt
    return node.n3()


def serialize(graph: Graph, format: str = "turtle") -> bytes:
    if format == "ntriples":
        return "".join(t.n3() + "\n" for t in graph).encode("utf-8")
    if format != "turtle":
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")

    prefixes = graph.prefixes
    out = [f"@prefix {p}: <{ns}> .\n" for p, ns in sorted(prefixes.items())]
    by_subject: dict[Node, list[Triple]] = {}
    for t in graph:
        by_subject.setdefault(t.subject, []).append(t)
    for subj in sorted(by_subject, key=lambda n: n.n3()):
        triples = by_subject[subj]
        # rdf:type first, then the remaining predicates in sorted order
        triples.sort(key=lambda t: (t.predicate.value != RDF_TYPE_IRI, t.key()))
        out.append("\n" + _turtle_term(subj, prefixes))
        groups: list[tuple[IRI, list[Node]]] = []
        for t in triples:
            if groups and groups[-1][0] == t.predicate:
                groups[-1][1].append(t.object)
            else:
                groups.append((t.predicate, [t.object]))
        parts = []
        for pred, objs in groups:
            verb = "a" if pred.value == RDF_TYPE_IRI else _turtle_term(pred, prefixes)
            parts.append(f"{verb} " + " , ".join(_turtle_term(o, prefixes) for o in objs))
        out.append(" " + " ;\n    ".join(parts) + " .\n")
    return "".join(out).encode("utf-8")


# -- reading ---------------------------------------------------------------

_TOKEN_SPEC = [
    ("WS", r"[ \t\r\n]+|#[^\n]*"),
    ("IRIREF", r"<[^<>\"{}|^`\\\x00-\x20]*(?:\\[uU][0-9A-Fa-f]+[^<>\"{}|^`\\\x00-\x20]*)*>"),
    ("STRING_LONG", r'"""(?:[^"\\]|\\.|"(?!""))*"""' + r"|'''(?:[^'\\]|\\.|'(?!''))*'''"),
    ("STRING", r'"(?:[^"\\\n\r]|\\.)*"' + r"|'(?:[^'\\\n\r]|\\.)*'"),
    ("DIRECTIVE", r"@(?:prefix|base)\b"),
    ("LANGTAG", r"@[A-Za-z]+(?:-[A-Za-z0-9]+)*"),
    ("DTYPE", r"\^\^"),
    ("BLANK", r"_:[A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?"),
    ("NUMBER", r"[+-]?(?:\d+\.\d*[eE][+-]?\d+|\.\d+[eE][+-]?\d+|\d+[eE][+-]?\d+|\d*\.\d+|\d+)"),
    ("PNAME", r"(?:[A-Za-z][A-Za-z0-9_\-.]*)?:(?:[A-Za-z0-9_:%](?:[A-Za-z0-9_.:%\-]*[A-Za-z0-9_:%\-])?)?"),
    ("WORD", r"[A-Za-z]+"),
    ("PUNCT", r"[.;,\[\]()]"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{rx})" for name, rx in _TOKEN_SPEC))

_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}
_ESCAPE_RE = re.compile(r"\\(u[0-9A-Fa-f]{4}|U[0-9A-Fa-f]{8}|.)", re.S)


def _unescape(text: str) -> str:
    def repl(m):
        esc = m.group(1)
        if esc[0] in "uU" and len(esc) > 1:
            return chr(int(esc[1:], 16))
        if esc in _ESCAPES:
            return _ESCAPES[esc]
        raise ValueError(f"invalid escape \\{esc}")

    return _ESCAPE_RE.sub(repl, text)


class _Parser:
    def __init__(self, text: str, ntriples: bool):
        self.text = text
        self.ntriples = ntriples
        self.tokens = list(self._tokenize())
        self.i = 0
        self.prefixes: dict[str, str] = {}
        self.base: Optional[str] = None
        self.triples: list[Triple] = []

    def _where(self, pos: int) -> tuple[int, int]:
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def error(self, message: str, pos: Optional[int] = None):
        if pos is None:
            pos = self.tokens[self.i][2] if self.i < len(self.tokens) else len(self.text)
        raise RDFSyntaxError(message, *self._where(pos))

    def _tokenize(self):
        pos = 0
        n = len(self.text)
        while pos < n:
            m = _TOKEN_RE.match(self.text, pos)
            if m is None:
                line, col = self._where(pos)
                raise RDFSyntaxError(f"unexpected character {self.text[pos]!r}", line, col)
            kind = m.lastgroup
            if kind != "WS":
                yield kind, m.group(), pos
            pos = m.end()

    # token helpers
    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def next(self):
        tok = self.peek()
        if tok[0] is None:
            self.error("unexpected end of input")
        self.i += 1
        return tok

    def expect_punct(self, ch: str):
        kind, val, pos = self.next()
        if kind != "PUNCT" or val != ch:
            self.error(f"expected {ch!r}, found {val!r}", pos)

    # grammar
    def parse(self) -> list[Triple]:
        while self.peek()[0] is not None:
            kind, val, pos = self.peek()
            if kind == "DIRECTIVE" or (kind == "WORD" and val.upper() in ("PREFIX", "BASE")):
                if self.ntriples:
                    self.error("directives are not allowed in N-Triples", pos)
                self.directive()
            else:
                self.statement()
        return self.triples

    def directive(self):
        kind, val, pos = self.next()
        sparql_style = kind == "WORD"
        keyword = val.lstrip("@").lower()
        if keyword == "prefix":
            k2, name, p2 = self.next()
            if k2 != "PNAME" or not name.endswith(":") or name.count(":") != 1:
                self.error(f"expected prefix name, found {name!r}", p2)
            k3, iri, p3 = self.next()
            if k3 != "IRIREF":
                self.error(f"expected IRI after prefix {name!r}", p3)
            self.prefixes[name[:-1]] = self.resolve(_unescape(iri[1:-1]), p3)
        else:
            k3, iri, p3 = self.next()
            if k3 != "IRIREF":
                self.error("expected IRI after base", p3)
            self.base = self.resolve(_unescape(iri[1:-1]), p3)
        if not sparql_style:
            self.expect_punct(".")

    def resolve(self, iri: str, pos: int) -> str:
        if re.match(r"^[A-Za-z][A-Za-z0-9+.\-]*:", iri):
            return iri
        if self.base is None:
            self.error(f"relative IRI <{iri}> without a base", pos)
        return urljoin(self.base, iri)

    def make_iri(self, value: str, pos: int) -> IRI:
        try:
            return IRI(value)
        except ValueError as exc:
            self.error(str(exc), pos)

    def iri(self, tok) -> IRI:
        kind, val, pos = tok
        if kind == "IRIREF":
            return self.make_iri(self.resolve(_unescape(val[1:-1]), pos), pos)
        if kind == "PNAME":
            if self.ntriples:
                self.error("prefixed names are not allowed in N-Triples", pos)
            prefix, _, local = val.partition(":")
            if prefix not in self.prefixes:
                self.error(f"undefined prefix {prefix!r}", pos)
            local = re.sub(r"\\(.)", r"\1", local)
            return self.make_iri(self.prefixes[prefix] + local, pos)
        self.error(f"expected IRI, found {val!r}", pos)

    def subject(self) -> Node:
        tok = self.next()
        kind, val, pos = tok
        if kind == "BLANK":
            return BNode(val[2:])
        if kind in ("IRIREF", "PNAME"):
            return self.iri(tok)
        if kind == "PUNCT" and val in "[(":
            self.error("anonymous blank nodes and collections are not supported", pos)
        self.error(f"expected subject, found {val!r}", pos)

    def verb(self) -> IRI:
        tok = self.next()
        kind, val, pos = tok
        if kind == "WORD" and val == "a":
            if self.ntriples:
                self.error("'a' is not allowed in N-Triples", pos)
            return IRI(RDF_TYPE_IRI)
        return self.iri(tok)

    def object(self) -> Node:
        tok = self.next()
        kind, val, pos = tok
        if kind == "BLANK":
            return BNode(val[2:])
        if kind in ("IRIREF", "PNAME"):
            return self.iri(tok)
        if kind in ("STRING", "STRING_LONG"):
            if kind == "STRING_LONG" and self.ntriples:
                self.error("long strings are not allowed in N-Triples", pos)
            if val[0] == "'" and self.ntriples:
                self.error("single-quoted strings are not allowed in N-Triples", pos)
            q = 3 if kind == "STRING_LONG" else 1
            try:
                lexical = _unescape(val[q:-q])
            except ValueError as exc:
                self.error(str(exc), pos)
            nk, nv, np_ = self.peek()
            if nk == "LANGTAG":
                self.i += 1
                return Literal(lexical, lang=nv[1:])
            if nk == "DTYPE":
                self.i += 1
                dt = self.iri(self.next())
                try:
                    return Literal(lexical, dt.value)
                except ValueError as exc:
                    self.error(str(exc), np_)
            return Literal(lexical)
        if self.ntriples:
            self.error(f"expected N-Triples object, found {val!r}", pos)
        if kind == "NUMBER":
            if re.search(r"[eE]", val):
                return Literal(val, XSD_NS + "double")
            if "." in val:
                return Literal(val, XSD_NS + "decimal")
            return Literal(val, XSD_NS + "integer")
        if kind == "WORD" and val in ("true", "false"):
            return Literal(val, XSD_NS + "boolean")
        if kind == "PUNCT" and val in "[(":
            self.error("anonymous blank nodes and collections are not supported", pos)
        self.error(f"expected object, found {val!r}", pos)

    def statement(self):
        subj = self.subject()
        while True:
            pred = self.verb()
            while True:
                self.triples.append(Triple(subj, pred, self.object()))
                kind, val, pos = self.peek()
                if kind == "PUNCT" and val == ",":
                    if self.ntriples:
                        self.error("object lists are not allowed in N-Triples", pos)
                    self.i += 1
                    continue
                break
            kind, val, pos = self.peek()
            if kind == "PUNCT" and val == ";":
                if self.ntriples:
                    self.error("predicate lists are not allowed in N-Triples", pos)
                while self.peek()[0] == "PUNCT" and self.peek()[1] == ";":
                    self.i += 1
                if self.peek()[0] == "PUNCT" and self.peek()[1] == ".":
                    break
                continue
            break
        self.expect_punct(".")


def parse_rdf(data: Union[bytes, str], format: str = "turtle") -> Graph:
    """Parse Turtle (subset) or N-Triples into a new Graph."""
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    parser = _Parser(text, ntriples=(format == "ntriples"))
    triples = parser.parse()
    graph = Graph(triples)
    for prefix, ns in parser.prefixes.items():
        graph.prefixes.setdefault(prefix, ns)
    return graph


def load(path, format: Optional[str] = None) -> Graph:
    path = str(path)
    if format is None:
        format = "ntriples" if path.endswith((".nt", ".ntriples")) else "turtle"
    with open(path, "rb") as fh:
        return parse_rdf(fh.read(), format)
