"""RDF term model and an indexed, in-memory triple store."""

from __future__ import annotations

import re
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Union

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"
XSD_STRING = XSD_NS + "string"
RDF_LANGSTRING = RDF_NS + "langString"

_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")


class MalformedTripleError(ValueError):
    pass


def _escape(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


@dataclass(frozen=True, order=False)
class IRI:
    value: str

    def __post_init__(self):
        if not isinstance(self.value, str) or not _SCHEME.match(self.value):
            raise ValueError(f"IRI must be absolute: {self.value!r}")
        if any(c in self.value for c in '<>" {}|\\^`\n\r\t'):
            raise ValueError(f"IRI contains illegal characters: {self.value!r}")

    def n3(self) -> str:
        return f"<{self.value}>"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, order=False)
class BNode:
    """Skolem-style labelled node. Labels are expected to be deterministic."""

    label: str

    def __post_init__(self):
        if not re.fullmatch(r"[A-Za-z0-9_][A-Za-z0-9_.\-]*", self.label) or self.label.endswith("."):
            raise ValueError(f"invalid blank node label: {self.label!r}")

    def n3(self) -> str:
        return f"_:{self.label}"

    def __str__(self) -> str:
        return self.n3()


@dataclass(frozen=True, order=False)
class Literal:
    lexical: str
    datatype: str = XSD_STRING
    lang: Optional[str] = None

    def __init__(self, lexical: str, datatype: Optional[str] = None, lang: Optional[str] = None):
        if lang is not None:
            lang = lang.lower()
            if datatype not in (None, RDF_LANGSTRING):
                raise ValueError("a language-tagged literal must have datatype rdf:langString")
            datatype = RDF_LANGSTRING
        elif datatype is None:
            datatype = XSD_STRING
        elif datatype == RDF_LANGSTRING:
            raise ValueError("rdf:langString literal requires a language tag")
        if not _SCHEME.match(datatype):
            raise ValueError(f"datatype must be an absolute IRI: {datatype!r}")
        object.__setattr__(self, "lexical", str(lexical))
        object.__setattr__(self, "datatype", datatype)
        object.__setattr__(self, "lang", lang)

    def n3(self) -> str:
        quoted = f'"{_escape(self.lexical)}"'
        if self.lang is not None:
            return f"{quoted}@{self.lang}"
        if self.datatype == XSD_STRING:
            return quoted
        return f"{quoted}^^<{self.datatype}>"

    def to_python(self):
        """Best-effort numeric/boolean conversion; falls back to the lexical form."""
        local = self.datatype[len(XSD_NS):] if self.datatype.startswith(XSD_NS) else None
        try:
            if local in ("integer", "int", "long", "short", "byte", "nonNegativeInteger",
                         "positiveInteger", "unsignedInt", "unsignedLong"):
                return int(self.lexical)
            if local in ("double", "float", "decimal"):
                return float(self.lexical)
            if local == "boolean":
                return self.lexical.strip() in ("true", "1")
        except ValueError:
            pass
        return self.lexical

    def __str__(self) -> str:
        return self.lexical


Node = Union[IRI, BNode, Literal]


def sort_key(node: Node) -> str:
    return node.n3()


@dataclass(frozen=True)
class Triple:
    subject: Node
    predicate: IRI
    object: Node

    def __post_init__(self):
        if isinstance(self.subject, Literal):
            raise MalformedTripleError(f"literal subject: {self.subject.n3()}")
        if not isinstance(self.subject, (IRI, BNode)):
            raise MalformedTripleError(f"subject is not an RDF term: {self.subject!r}")
        if not isinstance(self.predicate, IRI):
            raise MalformedTripleError(f"predicate must be an IRI: {self.predicate!r}")
        if not isinstance(self.object, (IRI, BNode, Literal)):
            raise MalformedTripleError(f"object is not an RDF term: {self.object!r}")

    def key(self) -> tuple[str, str, str]:
        return (self.subject.n3(), self.predicate.n3(), self.object.n3())

    def n3(self) -> str:
        return f"{self.subject.n3()} {self.predicate.n3()} {self.object.n3()} ."

    def __iter__(self):
        return iter((self.subject, self.predicate, self.object))


DEFAULT_PREFIXES = {
    "aml": "http://www.w3id.org/animl/ontology/",
    "rdf": RDF_NS,
    "rdfs": "http://www.w3.org/2000/01/rdf-schema#",
    "xsd": XSD_NS,
    "owl": "http://www.w3.org/2002/07/owl#",
    "skos": "http://www.w3.org/2004/02/skos/core#",
}


def default_prefixes() -> dict[str, str]:
    # imported lazily: vocab depends on this module
    from animl_kg import vocab

    prefixes = dict(DEFAULT_PREFIXES)
    prefixes["odp"] = vocab.ODP_NS
    prefixes["seq"] = vocab.SEQ_NS
    return prefixes


class FrozenGraphError(RuntimeError):
    pass


class Graph:
    """Set of triples with subject/predicate/object indexes.

    A graph is built by one writer and then frozen; after ``freeze()`` any
    mutation raises ``FrozenGraphError``.
    """

    def __init__(self, triples: Iterable[Triple] = (), prefixes: Optional[dict[str, str]] = None):
        self._triples: set[Triple] = set()
        self._by_s: dict[Node, set[Triple]] = defaultdict(set)
        self._by_p: dict[Node, set[Triple]] = defaultdict(set)
        self._by_o: dict[Node, set[Triple]] = defaultdict(set)
        self.prefixes: dict[str, str] = default_prefixes()
        if prefixes:
            self.prefixes.update(prefixes)
        self._frozen = False
        for t in triples:
            self.add(t)

    # -- mutation ----------------------------------------------------------
    def add(self, triple: Triple) -> "Graph":
        if self._frozen:
            raise FrozenGraphError("graph is frozen")
        if not isinstance(triple, Triple):
            triple = Triple(*triple)
        if triple in self._triples:
            return self
        self._triples.add(triple)
        self._by_s[triple.subject].add(triple)
        self._by_p[triple.predicate].add(triple)
        self._by_o[triple.object].add(triple)
        return self

    def add_all(self, triples: Iterable[Triple]) -> "Graph":
        for t in triples:
            self.add(t)
        return self

    def remove(self, triple: Triple) -> "Graph":
        if self._frozen:
            raise FrozenGraphError("graph is frozen")
        if triple not in self._triples:
            return self
        self._triples.discard(triple)
        for index, node in ((self._by_s, triple.subject), (self._by_p, triple.predicate),
                            (self._by_o, triple.object)):
            bucket = index[node]
            bucket.discard(triple)
            if not bucket:
                del index[node]
        return self

    def freeze(self) -> "Graph":
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def copy(self) -> "Graph":
        return Graph(self._triples, self.prefixes)

    # -- read access -------------------------------------------------------
    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(sorted(self._triples, key=Triple.key))

    def __contains__(self, triple) -> bool:
        return triple in self._triples

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples == other._triples

    def __repr__(self) -> str:
        return f"<Graph {len(self)} triples>"

    def triples(self) -> frozenset[Triple]:
        return frozenset(self._triples)

    def _candidates(self, s, p, o) -> Iterable[Triple]:
        buckets = []
        if s is not None:
            buckets.append(self._by_s.get(s, ()))
        if p is not None:
            buckets.append(self._by_p.get(p, ()))
        if o is not None:
            buckets.append(self._by_o.get(o, ()))
        if not buckets:
            return self._triples
        return min(buckets, key=len)

    def match(self, s: Optional[Node] = None, p: Optional[Node] = None,
              o: Optional[Node] = None) -> list[Triple]:
        """All triples matching the bound positions, sorted by serialized form."""
        found = [
            t for t in self._candidates(s, p, o)
            if (s is None or t.subject == s)
            and (p is None or t.predicate == p)
            and (o is None or t.object == o)
        ]
        found.sort(key=Triple.key)
        return found

    def objects(self, s: Node, p: Node) -> list[Node]:
        return [t.object for t in self.match(s, p, None)]

    def subjects(self, p: Node, o: Node) -> list[Node]:
        return [t.subject for t in self.match(None, p, o)]

    def value(self, s: Node, p: Node) -> Optional[Node]:
        objs = self.objects(s, p)
        return objs[0] if objs else None

    def has_type(self, node: Node, cls: IRI) -> bool:
        from animl_kg.vocab import RDF_TYPE

        return any(True for _ in self._match_unsorted(node, RDF_TYPE, cls))

    def _match_unsorted(self, s, p, o) -> Iterator[Triple]:
        for t in self._candidates(s, p, o):
            if (s is None or t.subject == s) and (p is None or t.predicate == p) \
                    and (o is None or t.object == o):
                yield t

    def instances(self, cls: IRI) -> list[Node]:
        from animl_kg.vocab import RDF_TYPE

        return self.subjects(RDF_TYPE, cls)

    def nodes(self) -> set[Node]:
        out: set[Node] = set()
        for t in self._triples:
            out.add(t.subject)
            out.add(t.object)
        return out


def transitive_reachable(graph: Graph, start: Node, predicate: IRI) -> set[Node]:
    """Nodes reachable from ``start`` over one or more ``predicate`` edges.

    ``start`` is in the result only when it lies on a cycle through itself.
    """
    seen: set[Node] = set()
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for t in graph._match_unsorted(node, predicate, None):
            if t.object not in seen:
                seen.add(t.object)
                queue.append(t.object)
    return seen
